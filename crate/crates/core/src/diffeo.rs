//! The reparametrization group of the circle: φ(θ) = θ + f(θ) with a periodic
//! displacement f and 1 + f′ > 0 on the sampling grid.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::field::{grid, PeriodicField};

const NEWTON_MAX_ITER: usize = 50;
const NEWTON_TOL: f64 = 1e-12;

/// Orientation-preserving circle diffeomorphism stored by its displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleDiffeo {
    displacement: PeriodicField,
}

impl CircleDiffeo {
    /// Validates monotonicity at the natural grid of `displacement`.
    pub fn new(displacement: PeriodicField) -> Result<Self> {
        if displacement.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: displacement.dim() });
        }
        let min_jacobian = min_jacobian(&displacement);
        if !(min_jacobian > 0.0) {
            return Err(Error::InvalidDiffeo { min_jacobian });
        }
        Ok(Self { displacement })
    }

    pub fn identity(band: usize) -> Self {
        Self { displacement: PeriodicField::zeros(1, band) }
    }

    /// θ ↦ θ + α.
    pub fn rotation(alpha: f64, band: usize) -> Self {
        Self { displacement: PeriodicField::constant(&[alpha], band) }
    }

    /// Builds φ from its values φ(θ_j) on the `n`-point grid.
    pub fn from_grid_values(values: &[f64]) -> Result<Self> {
        let disp: Vec<f64> = values.iter().zip(grid(values.len())).map(|(p, t)| p - t).collect();
        Self::new(PeriodicField::analyze(&disp, 1)?)
    }

    pub fn displacement(&self) -> &PeriodicField {
        &self.displacement
    }

    pub fn into_displacement(self) -> PeriodicField {
        self.displacement
    }

    pub fn band(&self) -> usize {
        self.displacement.band()
    }

    pub fn is_identity(&self) -> bool {
        self.displacement.coeffs().iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// φ(θ) at arbitrary points.
    pub fn eval(&self, points: &[f64]) -> Vec<f64> {
        let f = self.displacement.synthesize(points);
        points.iter().zip(f).map(|(t, d)| t + d).collect()
    }

    /// φ′(θ_j) = 1 + f′(θ_j) on the `n`-point grid.
    pub fn jacobian_on(&self, n: usize) -> Vec<f64> {
        let df = self.displacement.derivative(1);
        if n > 2 * df.band() {
            df.samples_on(n).into_iter().map(|v| 1.0 + v).collect()
        } else {
            df.synthesize(&grid(n)).into_iter().map(|v| 1.0 + v).collect()
        }
    }

    /// φ ∘ ψ, i.e. θ ↦ φ(ψ(θ)).
    pub fn compose(&self, psi: &CircleDiffeo) -> Result<CircleDiffeo> {
        let band = self.band().max(psi.band());
        let n = 2 * band + 2;
        let theta = grid(n);
        let inner = psi.eval(&theta);
        let outer = self.displacement.synthesize(&inner);
        let disp: Vec<f64> = inner.iter().zip(&outer).zip(&theta).map(|((p, f), t)| p + f - t).collect();
        Self::new(PeriodicField::analyze(&disp, 1)?)
    }

    /// φ⁻¹ by a per-grid-point Newton solve of x + f(x) = θ_j.
    pub fn invert(&self) -> Result<CircleDiffeo> {
        if self.is_identity() {
            return Ok(self.clone());
        }
        let n = self.displacement.grid_size();
        let df = self.displacement.derivative(1);
        let mut disp = vec![0.0; n];
        for (j, y) in grid(n).into_iter().enumerate() {
            let mut x = y - self.displacement.eval(y)[0];
            let mut converged = false;
            for _ in 0..NEWTON_MAX_ITER {
                let r = x + self.displacement.eval(x)[0] - y;
                if r.abs() <= NEWTON_TOL {
                    converged = true;
                    break;
                }
                let slope = 1.0 + df.eval(x)[0];
                if !(slope > 0.0) {
                    break;
                }
                x -= r / slope;
            }
            if !converged {
                return Err(Error::NearDegenerateDiffeo { index: j });
            }
            disp[j] = x - y;
        }
        Self::new(PeriodicField::analyze(&disp, 1)?)
    }
}

fn min_jacobian(displacement: &PeriodicField) -> f64 {
    let n = displacement.grid_size();
    displacement
        .derivative(1)
        .samples_on(n)
        .into_iter()
        .fold(f64::INFINITY, |m, v| m.min(1.0 + v))
}

impl PeriodicField {
    /// u ∘ φ, re-analyzed on the natural grid of `u` (band preserved).
    pub fn compose_with(&self, phi: &CircleDiffeo) -> Result<PeriodicField> {
        if phi.is_identity() {
            return Ok(self.clone());
        }
        let n = self.grid_size();
        let points = phi.eval(&grid(n));
        PeriodicField::analyze(&self.synthesize(&points), self.dim())
    }
}

/// u ∘ φ.
pub fn compose_field(u: &PeriodicField, phi: &CircleDiffeo) -> Result<PeriodicField> {
    u.compose_with(phi)
}

/// Time-`t` flow of the autonomous vector field `x` (d = 1): the one-parameter
/// subgroup exp(t·X), integrated per grid point with classical RK4.
pub fn flow_one_parameter(x: &PeriodicField, t: f64, steps: usize) -> Result<CircleDiffeo> {
    if x.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: x.dim() });
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("flow needs at least one step".into()));
    }
    let n = x.grid_size();
    if t == 0.0 {
        return Ok(CircleDiffeo::identity(x.band()));
    }
    let dx = x.derivative(1);
    let h = t / steps as f64;
    let theta = grid(n);
    let mut out = vec![0.0; n];
    // state per point: position and φ′
    let rhs = |pos: f64, jac: f64| -> (f64, f64) { (x.eval(pos)[0], dx.eval(pos)[0] * jac) };
    for (j, &t0) in theta.iter().enumerate() {
        let (mut p, mut q) = (t0, 1.0);
        for s in 0..steps {
            let (k1p, k1q) = rhs(p, q);
            let (k2p, k2q) = rhs(p + 0.5 * h * k1p, q + 0.5 * h * k1q);
            let (k3p, k3q) = rhs(p + 0.5 * h * k2p, q + 0.5 * h * k2q);
            let (k4p, k4q) = rhs(p + h * k3p, q + h * k3q);
            p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
            q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
            if !(q > 0.0) {
                return Err(Error::FlowDegenerate { time: (s + 1) as f64 * h });
            }
        }
        out[j] = p - t0;
    }
    CircleDiffeo::new(PeriodicField::analyze(&out, 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_folding_displacement() {
        let f = PeriodicField::from_scalar_fn(32, |t| 1.5 * t.sin()).unwrap();
        assert!(matches!(CircleDiffeo::new(f), Err(Error::InvalidDiffeo { .. })));
    }

    #[test]
    fn rotation_shifts_phase() {
        let u = PeriodicField::from_scalar_fn(32, |t| t.cos()).unwrap();
        let v = u.compose_with(&CircleDiffeo::rotation(0.3, 15)).unwrap();
        for t in [0.0, 1.0, 4.0] {
            assert!((v.eval(t)[0] - (t + 0.3).cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn rotations_compose_and_invert() {
        let r = CircleDiffeo::rotation(0.4, 7).compose(&CircleDiffeo::rotation(-1.1, 7)).unwrap();
        assert!((r.displacement().coeff(0, 0).re + 0.7).abs() < 1e-14);
        let inv = CircleDiffeo::rotation(0.4, 7).invert().unwrap();
        assert!((inv.displacement().coeff(0, 0).re + 0.4).abs() < 1e-12);
        assert!(CircleDiffeo::identity(7).invert().unwrap().is_identity());
    }

    #[test]
    fn constant_field_flows_to_rotation() {
        let x = PeriodicField::constant(&[0.8], 8);
        let phi = flow_one_parameter(&x, 1.5, 10).unwrap();
        assert!((phi.displacement().coeff(0, 0).re - 1.2).abs() < 1e-13);
        assert!(phi.displacement().sub(&PeriodicField::constant(&[1.2], 8)).unwrap().max_coeff_amplitude() < 1e-13);
        assert!(flow_one_parameter(&x, 0.0, 4).unwrap().is_identity());
    }

    #[test]
    fn degenerate_flow_reports_time() {
        // coarse steps on a stiff compressive field drive φ′ through zero
        let x = PeriodicField::from_scalar_fn(16, |t| -40.0 * (3.0 * t).sin()).unwrap();
        match flow_one_parameter(&x, 1.0, 4) {
            Err(Error::FlowDegenerate { time }) => assert!(time > 0.0 && time <= 1.0),
            other => panic!("expected degeneracy, got {other:?}"),
        }
    }
}
