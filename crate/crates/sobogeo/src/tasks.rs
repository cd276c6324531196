//! One runner per task. Each writes its artifacts into the output directory and
//! returns the series for `plots.csv`.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sobogeo_core::epdiff::{euler_arnold_integrate, group_log_with, momentum_residual_trace, EpdiffOptions, GroupLogOptions};
use sobogeo_core::geodesic::{exp_curve, log_curve_with, CurveExpMap, ShootingInit};
use sobogeo_core::regularity::{bvp_report, field_report, RegularityReport};
use sobogeo_core::shooting::FdScheme;
use sobogeo_core::{
    equivariance_residual, grid, transport_identity_residual, CircleDiffeo, Curve, CurveTangent, EquivariantMap,
    EquivariantMapHandle, ExpOptions, PeriodicField, Pointwise, ShootingOptions, ShootingReport,
};

use crate::config::{Config, DiffeoSpec, FdSchemeSpec, InitSpec, MapSpec, Task};
use crate::error::{Result, RunError};
use crate::formats::{
    diffeo_to_value, field_to_value_on, num, read_diffeo, read_field, read_report_velocity, report_to_value,
    write_csv, write_json,
};
use crate::parallel::Pool;

pub type Series = Vec<(String, Vec<(f64, f64)>)>;

pub fn run_task(cfg: &Config, pool: &Pool) -> Result<Series> {
    match cfg.task {
        Task::Exp => exp(cfg),
        Task::Log => log(cfg, pool),
        Task::Epdiff => epdiff(cfg),
        Task::GroupLog => group_log(cfg, pool),
        Task::Equivariance => equivariance(cfg),
        Task::Transport => transport(cfg, pool),
        Task::Regularity => regularity(cfg),
        Task::Norm => norm(cfg),
    }
}

fn out(cfg: &Config, name: &str) -> std::path::PathBuf {
    cfg.output_dir.join(name)
}

fn exp_options(cfg: &Config) -> ExpOptions {
    let n = &cfg.numerics;
    ExpOptions {
        steps: n.steps,
        basis_band: n.basis_band,
        grid: n.n,
        fd_step_metric: n.fd_step_metric,
        energy_gate: n.energy_gate,
    }
}

fn shooting_options(cfg: &Config) -> ShootingOptions {
    let n = &cfg.numerics;
    ShootingOptions {
        max_iter: n.max_iter,
        tol: n.tol,
        damping: n.damping,
        fd_step: n.fd_step,
        fd_scheme: match n.fd_scheme {
            FdSchemeSpec::Forward => FdScheme::Forward,
            FdSchemeSpec::Central => FdScheme::Central,
        },
        ..Default::default()
    }
}

fn epdiff_options(cfg: &Config) -> EpdiffOptions {
    let n = &cfg.numerics;
    EpdiffOptions { time: n.time, steps: n.steps, energy_gate: n.energy_gate, record_every: n.record_every }
}

/// Input curve resampled to the configured grid.
fn load_curve(cfg: &Config, path: &Path) -> Result<Curve> {
    Curve::new(read_field(path)?.with_band(cfg.band())).map_err(RunError::input)
}

fn real_basis_header(prefix: &str, dim: usize, band: usize) -> Vec<String> {
    let mut h = Vec::with_capacity(dim * (2 * band + 1));
    for a in 0..dim {
        h.push(format!("{prefix}{a}_const"));
        for k in 1..=band {
            h.push(format!("{prefix}{a}_cos{k}"));
            h.push(format!("{prefix}{a}_sin{k}"));
        }
    }
    h
}

fn components(name: &str, f: &PeriodicField, n: usize) -> Series {
    let theta = grid(n);
    let values = f.samples_on(n);
    (0..f.dim())
        .map(|a| {
            let pts = theta.iter().enumerate().map(|(j, t)| (*t, values[j * f.dim() + a])).collect();
            (format!("{name}_{a}"), pts)
        })
        .collect()
}

fn spectrum(name: &str, f: &PeriodicField) -> (String, Vec<(f64, f64)>) {
    (name.to_string(), (0..=f.band()).map(|k| (k as f64, f.mode_amplitude(k))).collect())
}

fn exp(cfg: &Config) -> Result<Series> {
    let c0 = load_curve(cfg, cfg.inputs.curve.as_deref().expect("validated"))?;
    let u = read_field(cfg.inputs.velocity.as_deref().expect("validated"))?.with_band(cfg.band());
    let u = CurveTangent::at(&c0, u).map_err(RunError::input)?;
    let opts = exp_options(cfg);
    let path = exp_curve(&c0, &u, &cfg.metric()?, &opts)?;

    let mut header = vec!["t".to_string(), "energy".to_string()];
    header.extend(real_basis_header("c", path.dim, path.basis_band));
    let rows = path.times.iter().zip(&path.energy_trace).zip(&path.states).map(|((t, e), s)| {
        let mut row = vec![*t, *e];
        row.extend_from_slice(s);
        row
    });
    write_csv(&out(cfg, "path.csv"), &header, rows)?;

    let end = path.endpoint()?.into_field();
    write_json(&out(cfg, "endpoint.json"), &field_to_value_on(&end, cfg.numerics.n))?;
    write_json(
        &out(cfg, "summary.json"),
        &json!({
            "steps": opts.steps,
            "basis_band": opts.basis_band,
            "energy_initial": path.energy_trace[0],
            "energy_final": path.energy_trace[path.energy_trace.len() - 1],
            "relative_energy_drift": path.relative_energy_drift(),
        }),
    )?;

    let mut series = vec![("energy".to_string(), path.times.iter().cloned().zip(path.energy_trace.iter().cloned()).collect())];
    let samples = end.samples_on(cfg.numerics.n);
    series.push(("endpoint_xy".into(), samples.chunks(end.dim()).map(|p| (p[0], p[1])).collect()));
    Ok(series)
}

fn write_report(cfg: &Config, r: &ShootingReport) -> Result<Series> {
    let mut v = report_to_value(r);
    v["u"] = field_to_value_on(&r.u, cfg.numerics.n);
    write_json(&out(cfg, "report.json"), &v)?;
    Ok(components("u", &r.u, cfg.numerics.n))
}

fn log(cfg: &Config, pool: &Pool) -> Result<Series> {
    let c0 = load_curve(cfg, cfg.inputs.curve.as_deref().expect("validated"))?;
    let c1 = load_curve(cfg, cfg.inputs.target.as_deref().expect("validated"))?;
    if c0.dim() != c1.dim() {
        return Err(RunError::config(format!("curve has d = {}, target has d = {}", c0.dim(), c1.dim())));
    }
    let init = match cfg.numerics.init {
        InitSpec::Difference => ShootingInit::Difference,
        InitSpec::Zero => ShootingInit::Zero,
        InitSpec::Multiscale => ShootingInit::Multiscale,
    };
    let report = log_curve_with(&c0, &c1, &cfg.metric()?, &exp_options(cfg), &shooting_options(cfg), init, pool)?;
    write_report(cfg, &report)
}

fn epdiff(cfg: &Config) -> Result<Series> {
    let u0 = read_field(cfg.inputs.velocity.as_deref().expect("validated"))?;
    if u0.dim() != 1 {
        return Err(RunError::config(format!("epdiff velocity must have d = 1, got {}", u0.dim())));
    }
    let u0 = u0.with_band(cfg.band());
    let g = euler_arnold_integrate(&u0, &cfg.inertia()?, &epdiff_options(cfg))?;
    let residuals = momentum_residual_trace(&g);

    let mut header = vec!["t".to_string(), "energy".to_string(), "momentum_residual".to_string()];
    header.extend(real_basis_header("u", 1, cfg.band()));
    let rows = (0..g.times.len()).map(|i| {
        let mut row = vec![g.times[i], g.energy_trace[i], residuals[i]];
        row.extend(g.velocities[i].to_real_basis(cfg.band()));
        row
    });
    write_csv(&out(cfg, "geodesic.csv"), &header, rows)?;

    let flows = out(cfg, "flows");
    fs::create_dir_all(&flows).map_err(|e| RunError::io(&flows, e))?;
    for (i, (t, phi)) in g.times.iter().zip(&g.flows).enumerate() {
        let mut v = diffeo_to_value(phi);
        v["t"] = json!(t);
        write_json(&flows.join(format!("flow_{i:04}.json")), &v)?;
    }

    let min_jacobian = g.flow_jacobians.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    write_json(
        &out(cfg, "summary.json"),
        &json!({
            "checkpoints": g.times.len(),
            "energy_initial": g.energy_trace[0],
            "relative_energy_drift": g.relative_energy_drift(),
            "momentum_residual_max": residuals.iter().cloned().fold(0.0, f64::max),
            "min_flow_jacobian": num(min_jacobian),
        }),
    )?;

    let trace = |v: &[f64]| g.times.iter().cloned().zip(v.iter().cloned()).collect::<Vec<_>>();
    let mut series = vec![("energy".to_string(), trace(&g.energy_trace)), ("momentum_residual".into(), trace(&residuals))];
    series.extend(components("final_displacement", g.endpoint().displacement(), cfg.numerics.n));
    Ok(series)
}

fn group_log(cfg: &Config, pool: &Pool) -> Result<Series> {
    let phi = read_diffeo(cfg.inputs.diffeo.as_deref().expect("validated"))?;
    let phi = CircleDiffeo::new(phi.into_displacement().with_band(cfg.band())).map_err(RunError::input)?;
    let opts = GroupLogOptions {
        basis_band: cfg.numerics.basis_band,
        epdiff: epdiff_options(cfg),
        shooting: shooting_options(cfg),
    };
    let report = group_log_with(&phi, &cfg.inertia()?, &opts, pool)?;
    write_report(cfg, &report)
}

/// Smooth random field with coefficient envelope 1/(1 + k²).
fn random_field(cfg: &Config, dim: usize) -> Result<PeriodicField> {
    let band = cfg.numerics.random_band;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let nb = 2 * band + 1;
    let values: Vec<f64> = (0..dim * nb)
        .map(|i| {
            let k = (i % nb).div_ceil(2);
            rng.gen_range(-1.0..1.0) / (1.0 + (k * k) as f64)
        })
        .collect();
    Ok(PeriodicField::from_real_basis(dim, band, &values)?.with_band(cfg.band()))
}

fn build_map(cfg: &Config, dim: usize) -> Result<Box<dyn EquivariantMap>> {
    Ok(match cfg.map.as_ref().expect("validated") {
        MapSpec::Square => Box::new(Pointwise::new(dim, |v: f64| v * v)),
        MapSpec::Cube => Box::new(Pointwise::new(dim, |v: f64| v * v * v)),
        MapSpec::Multiplier { inverse } => {
            let symbol = cfg.inertia()?.symbol().clone();
            let inverse = *inverse;
            Box::new(EquivariantMapHandle::new(dim, dim, move |u: &PeriodicField| u.apply_multiplier(&symbol, inverse)))
        }
        MapSpec::CurveExp => {
            if dim < 4 || dim % 2 == 1 {
                return Err(RunError::config(format!("curve_exp needs a field holding (c, u) with even d >= 4, got {dim}")));
            }
            Box::new(CurveExpMap { dim: dim / 2, metric: cfg.metric()?, opts: exp_options(cfg) })
        }
    })
}

fn map_input(cfg: &Config) -> Result<PeriodicField> {
    match &cfg.inputs.field {
        Some(p) => Ok(read_field(p)?.with_band(cfg.band())),
        None => random_field(cfg, 1),
    }
}

fn map_name(cfg: &Config) -> Value {
    serde_json::to_value(cfg.map.as_ref().expect("validated")).expect("map spec serializes")
}

fn equivariance(cfg: &Config) -> Result<Series> {
    let u = map_input(cfg)?;
    let map = build_map(cfg, u.dim())?;
    let phi = match (&cfg.inputs.diffeo, &cfg.diffeo) {
        (Some(p), _) => CircleDiffeo::new(read_diffeo(p)?.into_displacement().with_band(cfg.band())).map_err(RunError::input)?,
        (None, Some(DiffeoSpec::Rotation { angle })) => CircleDiffeo::rotation(*angle, cfg.band()),
        (None, Some(DiffeoSpec::Sine { amplitude, mode })) => {
            let (a, m) = (*amplitude, *mode as f64);
            let f = PeriodicField::from_scalar_fn(cfg.numerics.n, |t| a * (m * t).sin()).map_err(RunError::input)?;
            CircleDiffeo::new(f).map_err(RunError::input)?
        }
        (None, None) => unreachable!("validated"),
    };
    let q = cfg.numerics.q;
    let residual = equivariance_residual(map.as_ref(), &u, &phi, q)?;
    write_json(&out(cfg, "equivariance.json"), &json!({ "map": map_name(cfg), "q": q, "residual": residual }))?;
    Ok(vec![("residual".into(), vec![(q, residual)])])
}

fn transport(cfg: &Config, pool: &Pool) -> Result<Series> {
    let w = map_input(cfg)?;
    build_map(cfg, w.dim())?;
    let q = cfg.numerics.q;
    let steps = cfg.numerics.fd_steps.clone();
    // maps are not Sync in general, so each worker builds its own
    let residuals = pool
        .map(steps.clone(), |h| -> Result<f64> {
            let local = build_map(cfg, w.dim())?;
            Ok(transport_identity_residual(local.as_ref(), &w, h, q)?)
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let ratios: Vec<Value> = residuals.windows(2).map(|r| num(r[0] / r[1])).collect();
    let orders: Vec<Value> = residuals
        .windows(2)
        .zip(steps.windows(2))
        .map(|(r, h)| num((r[0] / r[1]).ln() / (h[0] / h[1]).ln()))
        .collect();
    write_json(
        &out(cfg, "transport.json"),
        &json!({ "map": map_name(cfg), "q": q, "fd_steps": steps, "residuals": residuals, "ratios": ratios, "orders": orders }),
    )?;
    Ok(vec![("residual".into(), steps.iter().cloned().zip(residuals).collect())])
}

fn regularity_value(r: &RegularityReport) -> Value {
    json!({
        "decay_exponent": num(r.decay_exponent),
        "endpoint_exponents": r.endpoint_exponents.iter().map(|s| num(*s)).collect::<Vec<_>>(),
        "norm_ladder": r.norm_ladder.iter().map(|rung| json!({
            "q": rung.q,
            "norm": rung.norm,
            "growth": rung.growth.map(num),
        })).collect::<Vec<_>>(),
        "verdict": r.verdict.as_str(),
    })
}

fn regularity(cfg: &Config) -> Result<Series> {
    let n = &cfg.numerics;
    let (u, report) = match (&cfg.inputs.field, &cfg.inputs.report) {
        (Some(p), None) => {
            let u = read_field(p)?;
            let r = field_report(&u, n.k_min, n.q_max).map_err(RunError::input)?;
            (u, r)
        }
        (None, Some(p)) => {
            let u = read_report_velocity(p)?;
            let ends = cfg.inputs.endpoints.iter().map(|e| read_field(e)).collect::<Result<Vec<_>>>()?;
            let refs: Vec<&PeriodicField> = ends.iter().collect();
            let r = bvp_report(&u, &refs, n.k_min, n.q_max).map_err(RunError::input)?;
            (u, r)
        }
        _ => unreachable!("validated"),
    };
    write_json(&out(cfg, "regularity.json"), &regularity_value(&report))?;
    Ok(vec![
        ("norm_ladder".into(), report.norm_ladder.iter().map(|r| (r.q, r.norm)).collect()),
        spectrum("spectrum", &u),
    ])
}

fn norm(cfg: &Config) -> Result<Series> {
    let u = read_field(cfg.inputs.field.as_deref().expect("validated"))?;
    let q = cfg.numerics.q;
    let sq = u.sobolev_norm_sq(q).map_err(RunError::input)?;
    write_json(&out(cfg, "norm.json"), &json!({ "q": q, "norm_sq": sq, "norm": sq.sqrt() }))?;
    Ok(vec![spectrum("spectrum", &u)])
}
