use std::path::PathBuf;

use serde_json::{json, Value};
use sobogeo_core::Error as CoreError;

/// Failures of a run, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(#[from] CoreError),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl RunError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Self::Io { path: path.into(), message: err.to_string() }
    }

    /// Core errors caused by bad inputs rather than by the numerics.
    pub fn input(err: CoreError) -> Self {
        Self::Config(err.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical(e) if is_input_error(e) => 2,
            Self::Numerical(_) => 3,
            Self::Io { .. } => 4,
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> Value {
        let (kind, detail) = match self {
            Self::Config(_) => ("config", Value::Null),
            Self::Numerical(e) if is_input_error(e) => ("config", core_detail(e)),
            Self::Numerical(e) => ("numerical", core_detail(e)),
            Self::Io { path, .. } => ("io", json!({ "path": path.display().to_string() })),
        };
        json!({
            "error": {
                "kind": kind,
                "exit_code": self.exit_code(),
                "message": self.to_string(),
                "detail": detail,
            }
        })
    }
}

fn is_input_error(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::InvalidGrid(_)
            | CoreError::DimensionMismatch { .. }
            | CoreError::InvalidIndex(_)
            | CoreError::InvalidSymbol(_)
            | CoreError::InvalidMetric(_)
            | CoreError::BandTooLarge { .. }
            | CoreError::InvalidArgument(_)
    )
}

fn core_detail(e: &CoreError) -> Value {
    match e {
        CoreError::InvalidDiffeo { min_jacobian } => json!({ "code": "invalid_diffeo", "min_jacobian": min_jacobian }),
        CoreError::NearDegenerateDiffeo { index } => json!({ "code": "near_degenerate_diffeo", "index": index }),
        CoreError::FlowDegenerate { time } => json!({ "code": "flow_degenerate", "time": time }),
        CoreError::DegenerateCurve { min_speed } => json!({ "code": "degenerate_curve", "min_speed": min_speed }),
        CoreError::GeodesicLeftChart { time } => json!({ "code": "geodesic_left_chart", "time": time }),
        CoreError::IntegratorAccuracy { drift } => json!({ "code": "integrator_accuracy", "drift": drift }),
        CoreError::PossiblyConjugate { sigma_min, jacobian_norm } => {
            json!({ "code": "possibly_conjugate", "sigma_min": sigma_min, "jacobian_norm": jacobian_norm })
        }
        CoreError::Linalg(_) => json!({ "code": "linalg" }),
        CoreError::InvalidGrid(_) => json!({ "code": "invalid_grid" }),
        CoreError::DimensionMismatch { expected, found } => {
            json!({ "code": "dimension_mismatch", "expected": expected, "found": found })
        }
        CoreError::InvalidIndex(q) => json!({ "code": "invalid_index", "q": q }),
        CoreError::InvalidSymbol(_) => json!({ "code": "invalid_symbol" }),
        CoreError::InvalidMetric(_) => json!({ "code": "invalid_metric" }),
        CoreError::BandTooLarge { requested, available } => {
            json!({ "code": "band_too_large", "requested": requested, "available": available })
        }
        CoreError::InvalidArgument(_) => json!({ "code": "invalid_argument" }),
    }
}

pub type Result<T> = std::result::Result<T, RunError>;
