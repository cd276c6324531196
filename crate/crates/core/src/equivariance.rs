//! Numerical checks of reparametrization equivariance, F(u∘φ) = F(u)∘φ, and of its
//! infinitesimal form DF(w).(∂_θ w) = ∂_θ F(w).

use crate::diffeo::CircleDiffeo;
use crate::error::{Error, Result};
use crate::field::PeriodicField;

/// A deterministic map between periodic fields, expected to commute with
/// reparametrization.
pub trait EquivariantMap {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn eval(&self, w: &PeriodicField) -> Result<PeriodicField>;
}

/// Closure-backed [`EquivariantMap`].
pub struct EquivariantMapHandle<F> {
    d_in: usize,
    d_out: usize,
    f: F,
}

impl<F> EquivariantMapHandle<F>
where
    F: Fn(&PeriodicField) -> Result<PeriodicField>,
{
    pub fn new(d_in: usize, d_out: usize, f: F) -> Self {
        Self { d_in, d_out, f }
    }
}

impl<F> EquivariantMap for EquivariantMapHandle<F>
where
    F: Fn(&PeriodicField) -> Result<PeriodicField>,
{
    fn input_dim(&self) -> usize {
        self.d_in
    }

    fn output_dim(&self) -> usize {
        self.d_out
    }

    fn eval(&self, w: &PeriodicField) -> Result<PeriodicField> {
        (self.f)(w)
    }
}

/// Componentwise scalar nonlinearity evaluated on a 2×-padded grid.
pub struct Pointwise<G> {
    dim: usize,
    g: G,
}

impl<G: Fn(f64) -> f64> Pointwise<G> {
    pub fn new(dim: usize, g: G) -> Self {
        Self { dim, g }
    }
}

impl<G: Fn(f64) -> f64> EquivariantMap for Pointwise<G> {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn output_dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, w: &PeriodicField) -> Result<PeriodicField> {
        let values: alloc::vec::Vec<f64> = w.samples_on(2 * w.grid_size()).into_iter().map(&self.g).collect();
        PeriodicField::analyze(&values, w.dim())
    }
}

fn check_input<M: EquivariantMap + ?Sized>(map: &M, u: &PeriodicField) -> Result<()> {
    if u.dim() != map.input_dim() {
        return Err(Error::DimensionMismatch { expected: map.input_dim(), found: u.dim() });
    }
    Ok(())
}

/// ‖F(u∘φ) − F(u)∘φ‖_{H^q} / (1 + ‖F(u)‖_{H^q}).
pub fn equivariance_residual<M: EquivariantMap + ?Sized>(
    map: &M,
    u: &PeriodicField,
    phi: &CircleDiffeo,
    q: f64,
) -> Result<f64> {
    check_input(map, u)?;
    let fu = map.eval(u)?;
    if phi.is_identity() {
        return Ok(0.0);
    }
    let lhs = map.eval(&u.compose_with(phi)?)?;
    let rhs = fu.compose_with(phi)?;
    let band = lhs.band().max(rhs.band());
    let diff = lhs.with_band(band).sub(&rhs.with_band(band))?;
    Ok(diff.sobolev_norm(q)? / (1.0 + fu.sobolev_norm(q)?))
}

/// ‖DF(w).(∂_θ w) − ∂_θ F(w)‖_{H^q} / (1 + ‖∂_θ F(w)‖_{H^q}) with DF from a
/// central difference of step `fd_step`.
pub fn transport_identity_residual<M: EquivariantMap + ?Sized>(
    map: &M,
    w: &PeriodicField,
    fd_step: f64,
    q: f64,
) -> Result<f64> {
    check_input(map, w)?;
    if !(fd_step > 0.0) {
        return Err(Error::InvalidArgument("finite-difference step must be positive".into()));
    }
    let dw = w.derivative(1);
    let plus = map.eval(&w.lin_comb(1.0, &dw, fd_step)?)?;
    let minus = map.eval(&w.lin_comb(1.0, &dw, -fd_step)?)?;
    let directional = plus.lin_comb(0.5 / fd_step, &minus, -0.5 / fd_step)?;
    let transported = map.eval(w)?.derivative(1);
    let band = directional.band().max(transported.band());
    let diff = directional.with_band(band).sub(&transported.with_band(band))?;
    Ok(diff.sobolev_norm(q)? / (1.0 + transported.sobolev_norm(q)?))
}
