//! Riemannian geometry on periodic function spaces.
//!
//! Band-limited fields on the circle carry Sobolev norms and Fourier multipliers;
//! circle diffeomorphisms act on them by reparametrization. On top of these sit
//! the constant-coefficient Sobolev metrics on closed curves with their geodesic
//! initial and boundary value problems, and right-invariant multiplier metrics on
//! the circle diffeomorphism group (EPDiff).
//!
//! The crate is `no_std` and only needs an allocator.

#![no_std]
// `!(x > 0.0)` is how NaN gets rejected; index loops mirror the formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod curve;
pub mod decay;
pub mod diffeo;
pub mod epdiff;
pub mod equivariance;
pub mod error;
mod fft;
pub mod field;
pub mod geodesic;
mod linalg;
mod metric_engine;
pub mod multiplier;
pub mod regularity;
pub mod shooting;

// Glob-imported so the float trait stays quiet when a dev-dependency links std.
mod prelude {
    pub(crate) use alloc::vec::Vec;
    pub(crate) use num_traits::Float;
}

pub use curve::{Curve, CurveTangent, MetricCoefficients, MetricMatrix};
pub use diffeo::{compose_field, flow_one_parameter, CircleDiffeo};
pub use epdiff::{GroupGeodesic, InertiaOperator};
pub use equivariance::{equivariance_residual, transport_identity_residual, EquivariantMap, EquivariantMapHandle, Pointwise};
pub use error::{Error, Result};
pub use field::{grid, PeriodicField, SobolevIndex};
pub use geodesic::{ExpOptions, GeodesicPath};
pub use multiplier::MultiplierSymbol;
pub use shooting::{ColumnExecutor, Sequential, ShootingOptions, ShootingReport};
