//! Experiment configuration: the JSON a user writes, and the fully resolved form
//! echoed into `manifest.json`.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RunError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Exp,
    Log,
    Epdiff,
    GroupLog,
    Equivariance,
    Transport,
    Regularity,
    Norm,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_possible_value().expect("no skipped variants").get_name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffeo: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub endpoints: Vec<PathBuf>,
}

impl Inputs {
    fn paths_mut(&mut self) -> impl Iterator<Item = &mut PathBuf> {
        [&mut self.curve, &mut self.velocity, &mut self.target, &mut self.field, &mut self.diffeo, &mut self.report]
            .into_iter()
            .flatten()
            .chain(self.endpoints.iter_mut())
    }
}

/// Sobolev curve metric with coefficients a_0..a_n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub n: usize,
    pub a: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InertiaSpec {
    /// (Id + Δ)^n
    Power { n: u32 },
    /// Id + Δ^n
    Sum { n: u32 },
    Custom { table: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Square,
    Cube,
    /// The inertia multiplier, or its inverse.
    Multiplier {
        #[serde(default)]
        inverse: bool,
    },
    /// (c, u) ↦ Exp(c, u)(1) under the configured metric.
    CurveExp,
}

/// Reparametrization used by the equivariance check when no diffeo file is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiffeoSpec {
    Rotation { angle: f64 },
    /// θ + amplitude·sin(mode·θ)
    Sine { amplitude: f64, mode: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdSchemeSpec {
    Forward,
    Central,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitSpec {
    Difference,
    Zero,
    Multiscale,
}

/// Numerical options; absent entries take task-dependent defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    pub n: Option<usize>,
    pub basis_band: Option<usize>,
    pub steps: Option<usize>,
    pub time: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub damping: Option<f64>,
    pub fd_step: Option<f64>,
    pub fd_scheme: Option<FdSchemeSpec>,
    pub fd_step_metric: Option<f64>,
    pub energy_gate: Option<f64>,
    pub init: Option<InitSpec>,
    pub record_every: Option<usize>,
    pub q: Option<f64>,
    pub k_min: Option<usize>,
    pub q_max: Option<f64>,
    pub fd_steps: Option<Vec<f64>>,
    pub random_band: Option<usize>,
}

/// Config as written by the user.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub task: Option<Task>,
    #[serde(default)]
    pub inputs: Inputs,
    pub metric: Option<MetricSpec>,
    pub inertia: Option<InertiaSpec>,
    pub map: Option<MapSpec>,
    pub diffeo: Option<DiffeoSpec>,
    #[serde(default)]
    pub numerics: Numerics,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    /// Written into manifests; ignored on input.
    #[allow(dead_code)]
    pub version: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedNumerics {
    pub n: usize,
    pub basis_band: usize,
    pub steps: usize,
    pub time: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub damping: f64,
    pub fd_step: f64,
    pub fd_scheme: FdSchemeSpec,
    pub fd_step_metric: Option<f64>,
    pub energy_gate: f64,
    pub init: InitSpec,
    pub record_every: usize,
    pub q: f64,
    pub k_min: usize,
    pub q_max: f64,
    pub fd_steps: Vec<f64>,
    pub random_band: usize,
}

/// Fully resolved config. Serializes to a valid input config.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub task: Task,
    pub inputs: Inputs,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<MetricSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inertia: Option<InertiaSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diffeo: Option<DiffeoSpec>,
    pub numerics: ResolvedNumerics,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub version: String,
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| RunError::config(format!("config: {e}")))
    }

    /// Applies defaults for `task`, makes paths absolute against `base` and
    /// validates everything that can be checked without running numerics.
    pub fn resolve(mut self, task: Task, base: &Path, out_override: Option<&Path>) -> Result<Config> {
        if let Some(t) = self.task {
            if t != task {
                return Err(RunError::config(format!("config is for task {t}, invoked as {task}")));
            }
        }
        for p in self.inputs.paths_mut() {
            *p = absolute(base, p);
        }
        let output_dir = match (out_override, &self.output_dir) {
            (Some(o), _) => absolute(&std::env::current_dir().map_err(|e| RunError::io(".", e))?, o),
            (None, Some(o)) => absolute(base, o),
            (None, None) => base.join("out"),
        };
        let numerics = resolve_numerics(task, &self.numerics)?;
        let config = Config {
            task,
            inputs: self.inputs,
            metric: self.metric,
            inertia: self.inertia,
            map: self.map,
            diffeo: self.diffeo,
            numerics,
            seed: self.seed.unwrap_or(0),
            output_dir,
            version: VERSION.to_string(),
        };
        config.validate()?;
        Ok(config)
    }
}

fn absolute(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn resolve_numerics(task: Task, n: &Numerics) -> Result<ResolvedNumerics> {
    let group = matches!(task, Task::Epdiff | Task::GroupLog);
    let r = ResolvedNumerics {
        n: n.n.unwrap_or(match task {
            Task::Epdiff => 1024,
            Task::GroupLog => 256,
            _ => 128,
        }),
        basis_band: n.basis_band.unwrap_or(if task == Task::GroupLog { 8 } else { 16 }),
        steps: n.steps.unwrap_or(if group { 400 } else { 200 }),
        time: n.time.unwrap_or(1.0),
        tol: n.tol.unwrap_or(if task == Task::GroupLog { 1e-11 } else { 1e-10 }),
        max_iter: n.max_iter.unwrap_or(15),
        damping: n.damping.unwrap_or(0.0),
        fd_step: n.fd_step.unwrap_or(1e-6),
        fd_scheme: n.fd_scheme.unwrap_or(FdSchemeSpec::Forward),
        fd_step_metric: n.fd_step_metric,
        energy_gate: n.energy_gate.unwrap_or(1e-3),
        init: n.init.unwrap_or(InitSpec::Difference),
        record_every: n.record_every.unwrap_or(if task == Task::Epdiff { 10 } else { 1 }),
        q: n.q.unwrap_or(2.0),
        k_min: n.k_min.unwrap_or(4),
        q_max: n.q_max.unwrap_or(3.0),
        fd_steps: n.fd_steps.clone().unwrap_or_else(|| vec![1e-3, 5e-4]),
        random_band: n.random_band.unwrap_or(8),
    };
    if r.n < 32 || !r.n.is_power_of_two() {
        return Err(RunError::config(format!("numerics.n must be a power of two >= 32, got {}", r.n)));
    }
    if r.basis_band == 0 || 2 * r.basis_band >= r.n {
        return Err(RunError::config(format!("numerics.basis_band must be in 1..{}, got {}", r.n / 2, r.basis_band)));
    }
    if r.steps == 0 {
        return Err(RunError::config("numerics.steps must be positive"));
    }
    if r.record_every == 0 {
        return Err(RunError::config("numerics.record_every must be positive"));
    }
    if r.max_iter == 0 {
        return Err(RunError::config("numerics.max_iter must be positive"));
    }
    let positive = [
        ("tol", Some(r.tol)),
        ("fd_step", Some(r.fd_step)),
        ("energy_gate", Some(r.energy_gate)),
        ("time", Some(r.time)),
        ("q_max", Some(r.q_max)),
        ("fd_step_metric", r.fd_step_metric),
    ];
    for (name, v) in positive {
        if let Some(v) = v {
            if !(v.is_finite() && v > 0.0) {
                return Err(RunError::config(format!("numerics.{name} must be positive and finite, got {v}")));
            }
        }
    }
    if !(r.damping.is_finite() && r.damping >= 0.0) {
        return Err(RunError::config("numerics.damping must be non-negative"));
    }
    if !r.q.is_finite() {
        return Err(RunError::config("numerics.q must be finite"));
    }
    if r.fd_steps.is_empty() || r.fd_steps.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return Err(RunError::config("numerics.fd_steps must be a non-empty list of positive steps"));
    }
    if r.k_min < 4 {
        return Err(RunError::config("numerics.k_min must be at least 4"));
    }
    if r.random_band == 0 || 2 * r.random_band >= r.n {
        return Err(RunError::config("numerics.random_band must be in 1..n/2"));
    }
    Ok(r)
}

impl Config {
    fn require<'a>(&self, what: &str, p: &'a Option<PathBuf>) -> Result<&'a Path> {
        p.as_deref().ok_or_else(|| RunError::config(format!("task {} needs inputs.{what}", self.task)))
    }

    fn validate(&self) -> Result<()> {
        let i = &self.inputs;
        match self.task {
            Task::Exp => {
                self.require("curve", &i.curve)?;
                self.require("velocity", &i.velocity)?;
                self.metric()?;
            }
            Task::Log => {
                self.require("curve", &i.curve)?;
                self.require("target", &i.target)?;
                self.metric()?;
            }
            Task::Epdiff => {
                self.require("velocity", &i.velocity)?;
                self.inertia()?;
            }
            Task::GroupLog => {
                self.require("diffeo", &i.diffeo)?;
                self.inertia()?;
            }
            Task::Equivariance | Task::Transport => {
                let map = self.map.as_ref().ok_or_else(|| RunError::config(format!("task {} needs map", self.task)))?;
                match map {
                    MapSpec::Multiplier { .. } => {
                        self.inertia()?;
                    }
                    MapSpec::CurveExp => {
                        self.metric()?;
                        if i.field.is_none() {
                            return Err(RunError::config("map curve_exp needs inputs.field holding (c, u)"));
                        }
                    }
                    MapSpec::Square | MapSpec::Cube => {}
                }
                if self.task == Task::Equivariance && i.diffeo.is_some() == self.diffeo.is_some() {
                    return Err(RunError::config("equivariance needs exactly one of inputs.diffeo and diffeo"));
                }
            }
            Task::Regularity => {
                if i.field.is_some() == i.report.is_some() {
                    return Err(RunError::config("regularity needs exactly one of inputs.field and inputs.report"));
                }
                if i.field.is_some() && !i.endpoints.is_empty() {
                    return Err(RunError::config("inputs.endpoints only applies to a shooting report"));
                }
            }
            Task::Norm => {
                self.require("field", &i.field)?;
            }
        }
        let mut inputs = self.inputs.clone();
        for p in inputs.paths_mut() {
            if !p.is_file() {
                return Err(RunError::config(format!("input file {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    pub fn metric(&self) -> Result<sobogeo_core::MetricCoefficients> {
        let m = self.metric.as_ref().ok_or_else(|| RunError::config(format!("task {} needs metric", self.task)))?;
        if m.a.len() != m.n + 1 {
            return Err(RunError::config(format!("metric.a must have n + 1 = {} entries, got {}", m.n + 1, m.a.len())));
        }
        sobogeo_core::MetricCoefficients::new(m.a.clone()).map_err(RunError::input)
    }

    pub fn inertia(&self) -> Result<sobogeo_core::InertiaOperator> {
        use sobogeo_core::{InertiaOperator, MultiplierSymbol};
        let spec = self.inertia.as_ref().ok_or_else(|| RunError::config(format!("task {} needs inertia", self.task)))?;
        match spec {
            InertiaSpec::Power { n } => Ok(InertiaOperator::power(*n)),
            InertiaSpec::Sum { n } => Ok(InertiaOperator::sum(*n)),
            InertiaSpec::Custom { table } => {
                InertiaOperator::new(MultiplierSymbol::Custom(table.clone())).map_err(RunError::input)
            }
        }
    }

    /// Band of fields living on the `n`-point grid.
    pub fn band(&self) -> usize {
        self.numerics.n / 2 - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_depend_on_task() {
        let base = Path::new("/tmp");
        let raw = RawConfig { inertia: Some(InertiaSpec::Power { n: 1 }), ..Default::default() };
        let n = resolve_numerics(Task::Epdiff, &raw.numerics).unwrap();
        assert_eq!((n.n, n.steps, n.record_every), (1024, 400, 10));
        let n = resolve_numerics(Task::GroupLog, &raw.numerics).unwrap();
        assert_eq!((n.n, n.basis_band, n.tol), (256, 8, 1e-11));
        let n = resolve_numerics(Task::Exp, &Numerics::default()).unwrap();
        assert_eq!((n.n, n.basis_band, n.steps), (128, 16, 200));
        let err = RawConfig::parse(r#"{"task": "norm"}"#).unwrap().resolve(Task::Log, base, None).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn rejects_bad_numerics() {
        for bad in [
            Numerics { n: Some(48), ..Default::default() },
            Numerics { n: Some(16), ..Default::default() },
            Numerics { tol: Some(0.0), ..Default::default() },
            Numerics { fd_steps: Some(vec![1e-3, -1.0]), ..Default::default() },
            Numerics { basis_band: Some(64), ..Default::default() },
        ] {
            assert!(resolve_numerics(Task::Exp, &bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RawConfig::parse(r#"{"numerics": {"N": 64}}"#).is_err());
        assert!(RawConfig::parse(r#"{"inertia": {"kind": "power", "n": 1}}"#).is_ok());
    }
}
