//! Geodesics of the curve metric in Hamiltonian form on truncated real Fourier
//! coordinates: ċ = G(c)⁻¹p, ṗ = −∂_c H with H = ½ pᵀ G(c)⁻¹ p, integrated by
//! classical RK4 with an energy-drift gate.

use alloc::vec;
use crate::prelude::*;
use nalgebra::DMatrix;

use crate::curve::{Curve, CurveTangent, MetricCoefficients};
use crate::equivariance::EquivariantMap;
use crate::error::{Error, Result};
use crate::field::PeriodicField;
use crate::metric_engine::CurveMetricEngine;
use crate::shooting::{self, ColumnExecutor, FdScheme, Sequential, ShootingOptions, ShootingProblem, ShootingReport};

/// Numerical settings of the curve exponential map.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpOptions {
    pub steps: usize,
    /// Band of the real Fourier coordinates (dimension d(2K_b + 1)).
    pub basis_band: usize,
    /// Quadrature grid N; arc-length derivatives project to band N/2 − 1 and
    /// integrals use the 2N-point padded grid.
    pub grid: usize,
    /// `Some(step)` replaces the analytic ∂_c H by central differences of H with
    /// step `step·(1 + ‖c‖_∞)`.
    pub fd_step_metric: Option<f64>,
    /// Relative energy drift above which the solve is rejected.
    pub energy_gate: f64,
}

impl Default for ExpOptions {
    fn default() -> Self {
        Self { steps: 200, basis_band: 16, grid: 128, fd_step_metric: None, energy_gate: 1e-3 }
    }
}

impl ExpOptions {
    fn validate(&self) -> Result<()> {
        if self.steps < 16 {
            return Err(Error::InvalidArgument("geodesic integration needs at least 16 steps".into()));
        }
        if self.grid < 4 || self.grid % 2 == 1 {
            return Err(Error::InvalidGrid(alloc::format!("grid size {} must be even and >= 4", self.grid)));
        }
        if self.basis_band > self.grid / 2 - 1 {
            return Err(Error::BandTooLarge { requested: self.basis_band, available: self.grid / 2 - 1 });
        }
        if !(self.energy_gate > 0.0) {
            return Err(Error::InvalidArgument("energy gate must be positive".into()));
        }
        Ok(())
    }
}

/// Time-sampled geodesic in (curve, momentum) coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    pub dim: usize,
    pub basis_band: usize,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub momenta: Vec<Vec<f64>>,
    pub energy_trace: Vec<f64>,
}

impl GeodesicPath {
    /// max_i |H_i − H_0| / H_0 (absolute drift when H_0 = 0).
    pub fn relative_energy_drift(&self) -> f64 {
        let h0 = self.energy_trace[0];
        let drift = self.energy_trace.iter().fold(0.0, |m, h| m.max((h - h0).abs()));
        if h0 > 0.0 {
            drift / h0
        } else {
            drift
        }
    }

    pub fn curve_at(&self, i: usize) -> Result<Curve> {
        Curve::new(PeriodicField::from_real_basis(self.dim, self.basis_band, &self.states[i])?)
    }

    pub fn endpoint(&self) -> Result<Curve> {
        self.curve_at(self.states.len() - 1)
    }

    pub fn endpoint_state(&self) -> &[f64] {
        self.states.last().expect("path has at least one sample")
    }
}

/// Finite-dimensional Hamiltonian system of the curve metric.
pub struct HamiltonianSystem {
    engine: CurveMetricEngine,
    fd_step: Option<f64>,
}

impl HamiltonianSystem {
    pub fn new(dim: usize, metric: &MetricCoefficients, opts: &ExpOptions) -> Result<Self> {
        opts.validate()?;
        if dim < 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: dim });
        }
        let engine = CurveMetricEngine::new(dim, opts.basis_band, opts.grid / 2 - 1, metric.coefficients())?;
        Ok(Self { engine, fd_step: opts.fd_step_metric })
    }

    pub fn state_len(&self) -> usize {
        self.engine.state_len()
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.state_len() {
            return Err(Error::DimensionMismatch { expected: self.state_len(), found: v.len() });
        }
        Ok(())
    }

    /// H(c, p) = ½ pᵀ G(c)⁻¹ p.
    pub fn hamiltonian(&self, c: &[f64], p: &[f64]) -> Result<f64> {
        self.check_len(c)?;
        self.check_len(p)?;
        let asm = self.engine.assemble(c)?;
        Ok(self.engine.hamiltonian(&asm, p))
    }

    /// p = G(c) u.
    pub fn momentum(&self, c: &[f64], u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(c)?;
        self.check_len(u)?;
        let asm = self.engine.assemble(c)?;
        Ok(self.engine.apply_metric(&asm, u))
    }

    /// G(c) as a dense matrix in the coordinate basis.
    pub fn metric(&self, c: &[f64]) -> Result<DMatrix<f64>> {
        let asm = self.engine.assemble(c)?;
        let (d, nb) = (self.engine.dim(), self.engine.basis_len());
        let mut g = DMatrix::zeros(d * nb, d * nb);
        for a in 0..d {
            g.view_mut((a * nb, a * nb), (nb, nb)).copy_from(&asm.gram);
        }
        Ok(g)
    }

    /// ∂H/∂c.
    pub fn gradient(&self, c: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        self.check_len(c)?;
        self.check_len(p)?;
        let asm = self.engine.assemble(c)?;
        Ok(self.gradient_with(&asm, c, p)?.1)
    }

    fn gradient_with(&self, asm: &crate::metric_engine::Assembly, c: &[f64], p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let h = self.engine.solve(asm, p);
        let grad = match self.fd_step {
            None => self.engine.energy_gradient(asm, &h).into_iter().map(|g| -0.5 * g).collect(),
            Some(step) => {
                let scale = step * (1.0 + c.iter().fold(0.0f64, |m, v| m.max(v.abs())));
                let mut y = c.to_vec();
                let mut out = vec![0.0; c.len()];
                for i in 0..c.len() {
                    y[i] = c[i] + scale;
                    let hp = self.engine.hamiltonian(&self.engine.assemble(&y)?, p);
                    y[i] = c[i] - scale;
                    let hm = self.engine.hamiltonian(&self.engine.assemble(&y)?, p);
                    y[i] = c[i];
                    out[i] = (hp - hm) / (2.0 * scale);
                }
                out
            }
        };
        Ok((h, grad))
    }

    /// Hamilton's equations: (ċ, ṗ) = (G⁻¹p, −∂_c H).
    fn vector_field(&self, c: &[f64], p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.vector_field_at(&self.engine.assemble(c)?, c, p)
    }

    fn vector_field_at(&self, asm: &crate::metric_engine::Assembly, c: &[f64], p: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (h, grad) = self.gradient_with(asm, c, p)?;
        Ok((h, grad.into_iter().map(|g| -g).collect()))
    }

    /// Integrates from (c0, p0) over [0, 1].
    pub fn integrate(&self, c0: &[f64], p0: &[f64], steps: usize, energy_gate: f64) -> Result<GeodesicPath> {
        self.check_len(c0)?;
        self.check_len(p0)?;
        let dt = 1.0 / steps as f64;
        let mut c = c0.to_vec();
        let mut p = p0.to_vec();
        let mut asm = self.engine.assemble(&c)?;
        let h0 = self.engine.hamiltonian(&asm, &p);
        let mut path = GeodesicPath {
            dim: self.engine.dim(),
            basis_band: (self.engine.basis_len() - 1) / 2,
            times: vec![0.0],
            states: vec![c.clone()],
            momenta: vec![p.clone()],
            energy_trace: vec![h0],
        };
        let axpy = |x: &[f64], a: f64, y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(u, v)| u + a * v).collect() };
        for step in 0..steps {
            let time = (step + 1) as f64 * dt;
            let left = |e: Error| match e {
                Error::DegenerateCurve { .. } => Error::GeodesicLeftChart { time },
                other => other,
            };
            let (k1c, k1p) = self.vector_field_at(&asm, &c, &p).map_err(left)?;
            let (k2c, k2p) = self.vector_field(&axpy(&c, 0.5 * dt, &k1c), &axpy(&p, 0.5 * dt, &k1p)).map_err(left)?;
            let (k3c, k3p) = self.vector_field(&axpy(&c, 0.5 * dt, &k2c), &axpy(&p, 0.5 * dt, &k2p)).map_err(left)?;
            let (k4c, k4p) = self.vector_field(&axpy(&c, dt, &k3c), &axpy(&p, dt, &k3p)).map_err(left)?;
            for i in 0..c.len() {
                c[i] += dt / 6.0 * (k1c[i] + 2.0 * k2c[i] + 2.0 * k3c[i] + k4c[i]);
                p[i] += dt / 6.0 * (k1p[i] + 2.0 * k2p[i] + 2.0 * k3p[i] + k4p[i]);
            }
            if !(self.engine.min_speed_oversampled(&c) > 0.0) {
                return Err(Error::GeodesicLeftChart { time });
            }
            asm = self.engine.assemble(&c).map_err(left)?;
            let h = self.engine.hamiltonian(&asm, &p);
            let drift = if h0 > 0.0 { (h - h0).abs() / h0 } else { (h - h0).abs() };
            if !(drift <= energy_gate) {
                return Err(Error::IntegratorAccuracy { drift });
            }
            path.times.push(time);
            path.states.push(c.clone());
            path.momenta.push(p.clone());
            path.energy_trace.push(h);
        }
        Ok(path)
    }
}

fn coordinates(f: &PeriodicField, basis_band: usize) -> Vec<f64> {
    f.to_real_basis(basis_band)
}

/// H(c, p) for coordinate vectors c, p of length d(2K_b + 1).
pub fn hamiltonian(c: &[f64], p: &[f64], dim: usize, metric: &MetricCoefficients, opts: &ExpOptions) -> Result<f64> {
    HamiltonianSystem::new(dim, metric, opts)?.hamiltonian(c, p)
}

/// Geodesic with c(0) = c0 and ċ(0) = u on [0, 1]. Both are projected to the
/// coordinate band `opts.basis_band`.
pub fn exp_curve(c0: &Curve, u: &CurveTangent, metric: &MetricCoefficients, opts: &ExpOptions) -> Result<GeodesicPath> {
    if u.field().dim() != c0.dim() {
        return Err(Error::DimensionMismatch { expected: c0.dim(), found: u.field().dim() });
    }
    let system = HamiltonianSystem::new(c0.dim(), metric, opts)?;
    let c = coordinates(c0.field(), opts.basis_band);
    let v = coordinates(u.field(), opts.basis_band);
    let p = system.momentum(&c, &v)?;
    system.integrate(&c, &p, opts.steps, opts.energy_gate)
}

/// Endpoint map u ↦ Exp(c0, u)(1) in coordinates, reusing one assembled system.
struct EndpointMap {
    system: HamiltonianSystem,
    c0: Vec<f64>,
    steps: usize,
    energy_gate: f64,
}

impl EndpointMap {
    fn new(c0: &Curve, metric: &MetricCoefficients, opts: &ExpOptions) -> Result<Self> {
        Ok(Self {
            system: HamiltonianSystem::new(c0.dim(), metric, opts)?,
            c0: coordinates(c0.field(), opts.basis_band),
            steps: opts.steps,
            energy_gate: opts.energy_gate,
        })
    }

    fn endpoint(&self, u: &[f64]) -> Result<Vec<f64>> {
        let p = self.system.momentum(&self.c0, u)?;
        let path = self.system.integrate(&self.c0, &p, self.steps, self.energy_gate)?;
        Ok(path.endpoint_state().to_vec())
    }
}

/// D_u Exp(c0, u) by central finite differences of the time-1 endpoint map in
/// coordinates.
pub fn dexp_jacobian(
    c0: &Curve,
    u: &CurveTangent,
    metric: &MetricCoefficients,
    opts: &ExpOptions,
    fd_step: f64,
) -> Result<DMatrix<f64>> {
    dexp_jacobian_with(c0, u, metric, opts, fd_step, &Sequential)
}

/// [`dexp_jacobian`] with the columns dispatched through `exec`.
pub fn dexp_jacobian_with(
    c0: &Curve,
    u: &CurveTangent,
    metric: &MetricCoefficients,
    opts: &ExpOptions,
    fd_step: f64,
    exec: &dyn ColumnExecutor,
) -> Result<DMatrix<f64>> {
    if !(fd_step > 0.0) {
        return Err(Error::InvalidArgument("finite-difference step must be positive".into()));
    }
    let map = EndpointMap::new(c0, metric, opts)?;
    let x = coordinates(u.field(), opts.basis_band);
    let r0 = map.endpoint(&x)?;
    shooting::fd_jacobian_with(exec, &|y| map.endpoint(y), &x, &r0, fd_step, FdScheme::Central)
}

/// Initial guess for the curve shooting iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShootingInit {
    /// u₀ = c1 − c0 in coordinates.
    Difference,
    Zero,
    /// Solve at half the coordinate band first and prolong.
    Multiscale,
}

/// Externally supplied shooting Jacobian, x ↦ J(x).
pub type JacobianSeam = dyn Fn(&[f64]) -> Result<DMatrix<f64>> + Sync;

struct CurveShooting<'a> {
    map: EndpointMap,
    target: Vec<f64>,
    dim: usize,
    basis_band: usize,
    order: f64,
    seam: Option<&'a JacobianSeam>,
}

impl ShootingProblem for CurveShooting<'_> {
    fn unknowns(&self) -> usize {
        self.target.len()
    }

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.map.endpoint(x)?.iter().zip(&self.target).map(|(a, b)| a - b).collect())
    }

    fn residual_norm(&self, r: &[f64]) -> Result<f64> {
        PeriodicField::from_real_basis(self.dim, self.basis_band, r)?.sobolev_norm(self.order)
    }

    fn jacobian(
        &self,
        x: &[f64],
        r0: &[f64],
        opts: &ShootingOptions,
        exec: &dyn ColumnExecutor,
    ) -> Result<DMatrix<f64>> {
        match self.seam {
            Some(seam) => seam(x),
            None => shooting::fd_jacobian_with(exec, &|y| self.residual(y), x, r0, opts.fd_step, opts.fd_scheme),
        }
    }
}

/// Geodesic boundary value problem: finds u with Exp(c0, u)(1) = c1 by shooting.
/// The residual norm is the H^n norm of the endpoint mismatch.
pub fn log_curve(
    c0: &Curve,
    c1: &Curve,
    metric: &MetricCoefficients,
    exp_opts: &ExpOptions,
    opts: &ShootingOptions,
    init: ShootingInit,
) -> Result<ShootingReport> {
    log_curve_inner(c0, c1, metric, exp_opts, opts, init, None, &Sequential)
}

/// [`log_curve`] with Jacobian columns dispatched through `exec`.
pub fn log_curve_with(
    c0: &Curve,
    c1: &Curve,
    metric: &MetricCoefficients,
    exp_opts: &ExpOptions,
    opts: &ShootingOptions,
    init: ShootingInit,
    exec: &dyn ColumnExecutor,
) -> Result<ShootingReport> {
    log_curve_inner(c0, c1, metric, exp_opts, opts, init, None, exec)
}

/// [`log_curve`] with the Jacobian supplied by `seam` instead of finite
/// differences; used to exercise the conjugacy guard.
pub fn log_curve_with_jacobian(
    c0: &Curve,
    c1: &Curve,
    metric: &MetricCoefficients,
    exp_opts: &ExpOptions,
    opts: &ShootingOptions,
    seam: &JacobianSeam,
) -> Result<ShootingReport> {
    log_curve_inner(c0, c1, metric, exp_opts, opts, ShootingInit::Difference, Some(seam), &Sequential)
}

#[allow(clippy::too_many_arguments)]
fn log_curve_inner(
    c0: &Curve,
    c1: &Curve,
    metric: &MetricCoefficients,
    exp_opts: &ExpOptions,
    opts: &ShootingOptions,
    init: ShootingInit,
    seam: Option<&JacobianSeam>,
    exec: &dyn ColumnExecutor,
) -> Result<ShootingReport> {
    if c0.dim() != c1.dim() {
        return Err(Error::DimensionMismatch { expected: c0.dim(), found: c1.dim() });
    }
    let kb = exp_opts.basis_band;
    let start = coordinates(c0.field(), kb);
    let target = coordinates(c1.field(), kb);
    let x0 = match init {
        ShootingInit::Difference => target.iter().zip(&start).map(|(a, b)| a - b).collect(),
        ShootingInit::Zero => vec![0.0; target.len()],
        ShootingInit::Multiscale if kb >= 2 => {
            let coarse_opts = ExpOptions { basis_band: kb / 2, ..exp_opts.clone() };
            let coarse_shoot = ShootingOptions { tol: opts.tol.max(1e-6), ..opts.clone() };
            let coarse = log_curve_inner(c0, c1, metric, &coarse_opts, &coarse_shoot, ShootingInit::Difference, seam, exec)?;
            coarse.u.to_real_basis(kb)
        }
        ShootingInit::Multiscale => target.iter().zip(&start).map(|(a, b)| a - b).collect(),
    };
    let problem = CurveShooting {
        map: EndpointMap::new(c0, metric, exp_opts)?,
        target,
        dim: c0.dim(),
        basis_band: kb,
        order: metric.order() as f64,
        seam,
    };
    let sol = shooting::solve_with(&problem, &x0, opts, exec)?;
    Ok(ShootingReport {
        u: PeriodicField::from_real_basis(c0.dim(), kb, &sol.x)?,
        residual_norm: sol.residual_norm,
        iterations: sol.iterations,
        sigma_min: sol.sigma_min,
        converged: sol.converged,
    })
}

/// The curve exponential as a map on paired fields w = (c, u) ∈ PeriodicField(2d),
/// returning Exp(c, u)(1) at the input band.
pub struct CurveExpMap {
    pub dim: usize,
    pub metric: MetricCoefficients,
    pub opts: ExpOptions,
}

impl EquivariantMap for CurveExpMap {
    fn input_dim(&self) -> usize {
        2 * self.dim
    }

    fn output_dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, w: &PeriodicField) -> Result<PeriodicField> {
        let c = Curve::new(w.slice_components(0, self.dim)?)?;
        let u = CurveTangent::new(w.slice_components(self.dim, self.dim)?);
        let path = exp_curve(&c, &u, &self.metric, &self.opts)?;
        Ok(path.endpoint()?.into_field().with_band(w.band()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn small_opts() -> ExpOptions {
        ExpOptions { steps: 40, basis_band: 4, grid: 32, ..Default::default() }
    }

    #[test]
    fn hamiltonian_closed_form_on_circle() {
        let m = MetricCoefficients::new(vec![1.0, 2.0, 0.5]).unwrap();
        let opts = small_opts();
        let sys = HamiltonianSystem::new(2, &m, &opts).unwrap();
        let c = Curve::circle(1.0, 2, 32).unwrap().field().to_real_basis(4);
        let mut u = vec![0.0; c.len()];
        u[1] = 1.0; // cos θ e_1
        let p = sys.momentum(&c, &u).unwrap();
        let h = sys.hamiltonian(&c, &p).unwrap();
        assert!((h - 0.5 * PI * 3.5).abs() < 1e-12 * h);
        assert_eq!(sys.hamiltonian(&c, &vec![0.0; c.len()]).unwrap(), 0.0);
        let p3: Vec<f64> = p.iter().map(|v| 3.0 * v).collect();
        assert!((sys.hamiltonian(&c, &p3).unwrap() - 9.0 * h).abs() < 1e-12 * h);
    }

    #[test]
    fn zero_velocity_gives_constant_path() {
        let m = MetricCoefficients::new(vec![1.0, 1.0, 1.0]).unwrap();
        let c = Curve::circle(1.0, 2, 32).unwrap();
        let u = CurveTangent::new(PeriodicField::zeros(2, 15));
        let path = exp_curve(&c, &u, &m, &small_opts()).unwrap();
        assert_eq!(path.states.len(), 41);
        assert!(path.states.iter().all(|s| s == &path.states[0]));
    }

    #[test]
    fn fd_gradient_option_matches_analytic() {
        let m = MetricCoefficients::new(vec![1.0, 0.3, 0.7]).unwrap();
        let opts = small_opts();
        let fd_opts = ExpOptions { fd_step_metric: Some(1e-5), ..opts.clone() };
        let c = Curve::new(
            PeriodicField::from_fn(32, 2, |t, o| {
                o[0] = 2.0 * t.cos() + 0.1 * (2.0 * t).cos();
                o[1] = t.sin();
            })
            .unwrap(),
        )
        .unwrap()
        .field()
        .to_real_basis(4);
        let p: Vec<f64> = (0..c.len()).map(|i| ((i * 3) % 7) as f64 * 0.1 - 0.3).collect();
        let a = HamiltonianSystem::new(2, &m, &opts).unwrap().gradient(&c, &p).unwrap();
        let b = HamiltonianSystem::new(2, &m, &fd_opts).unwrap().gradient(&c, &p).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-7 * (1.0 + x.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn options_are_validated() {
        let m = MetricCoefficients::new(vec![1.0, 1.0, 1.0]).unwrap();
        let bad_steps = ExpOptions { steps: 8, ..small_opts() };
        assert!(HamiltonianSystem::new(2, &m, &bad_steps).is_err());
        let bad_band = ExpOptions { basis_band: 16, grid: 32, ..small_opts() };
        assert!(matches!(HamiltonianSystem::new(2, &m, &bad_band), Err(Error::BandTooLarge { .. })));
    }
}
