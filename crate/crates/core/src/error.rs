use alloc::string::String;

/// Failures reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid Sobolev index {0}")]
    InvalidIndex(f64),
    #[error("invalid multiplier symbol: {0}")]
    InvalidSymbol(String),
    #[error("invalid diffeomorphism: 1 + f' reaches {min_jacobian:e} at a grid point")]
    InvalidDiffeo { min_jacobian: f64 },
    #[error("near-degenerate diffeomorphism: Newton inversion failed at grid point {index}")]
    NearDegenerateDiffeo { index: usize },
    #[error("flow left the orientation-preserving regime at t = {time}")]
    FlowDegenerate { time: f64 },
    #[error("degenerate curve: minimum speed {min_speed:e}")]
    DegenerateCurve { min_speed: f64 },
    #[error("invalid metric coefficients: {0}")]
    InvalidMetric(String),
    #[error("basis band {requested} exceeds available band {available}")]
    BandTooLarge { requested: usize, available: usize },
    #[error("geodesic left the immersion chart at t = {time}")]
    GeodesicLeftChart { time: f64 },
    #[error("integrator accuracy gate failed: relative energy drift {drift:e}")]
    IntegratorAccuracy { drift: f64 },
    #[error("possibly conjugate: sigma_min {sigma_min:e} below threshold for |J| = {jacobian_norm:e}")]
    PossiblyConjugate { sigma_min: f64, jacobian_norm: f64 },
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
