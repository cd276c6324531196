//! Immersed closed curves and the constant-coefficient Sobolev metric
//!
//! G_c(h, k) = ∫ Σ_j a_j ⟨D_s^j h, D_s^j k⟩ ds,   D_s = |c′|⁻¹ ∂_θ,  ds = |c′| dθ.

use alloc::format;
use crate::prelude::*;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::PeriodicField;
use crate::metric_engine::{immersed, ArcFrame, CurveMetricEngine, SpectralGrid};

/// Order `n` and constants a_0..a_n with a_j ≥ 0 and a_0, a_n > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricCoefficients {
    a: Vec<f64>,
}

impl MetricCoefficients {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.len() < 3 {
            return Err(Error::InvalidMetric(format!("order must be at least 2, got {}", a.len() as i64 - 1)));
        }
        if a.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidMetric("coefficients must be finite and non-negative".into()));
        }
        if !(a[0] > 0.0 && a[a.len() - 1] > 0.0) {
            return Err(Error::InvalidMetric("a_0 and a_n must be positive".into()));
        }
        Ok(Self { a })
    }

    pub fn order(&self) -> usize {
        self.a.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.a
    }
}

/// An immersed closed curve in ℝ^d, d ≥ 2.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    field: PeriodicField,
}

impl Curve {
    /// Checks d ≥ 2 and |c′| > 0 on a 4×-oversampled grid.
    pub fn new(field: PeriodicField) -> Result<Self> {
        if field.dim() < 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: field.dim() });
        }
        let (min_speed, max_speed) = speed_range(&field, 4 * field.grid_size());
        if !immersed(min_speed, max_speed) {
            return Err(Error::DegenerateCurve { min_speed });
        }
        Ok(Self { field })
    }

    /// Circle of radius `radius` centred at the origin in the first two coordinates.
    pub fn circle(radius: f64, dim: usize, n: usize) -> Result<Self> {
        Self::new(PeriodicField::from_fn(n, dim, |t, out| {
            out[0] = radius * t.cos();
            out[1] = radius * t.sin();
        })?)
    }

    pub fn field(&self) -> &PeriodicField {
        &self.field
    }

    pub fn into_field(self) -> PeriodicField {
        self.field
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn band(&self) -> usize {
        self.field.band()
    }

    pub(crate) fn grid_and_frame(&self) -> Result<(SpectralGrid, ArcFrame)> {
        let grid = SpectralGrid::new(self.band());
        let specs = self.specs(&grid, &self.field);
        let frame = ArcFrame::from_specs(&grid, &specs)?;
        Ok((grid, frame))
    }

    fn specs(&self, grid: &SpectralGrid, f: &PeriodicField) -> Vec<Vec<Complex64>> {
        (0..f.dim())
            .map(|a| {
                let mut buf = alloc::vec![Complex64::new(0.0, 0.0); grid.len()];
                f.fill_spectrum(a, &mut buf);
                buf
            })
            .collect()
    }
}

fn speed_range(field: &PeriodicField, n: usize) -> (f64, f64) {
    let d = field.derivative(1).samples_on(n);
    d.chunks(field.dim())
        .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold((f64::INFINITY, 0.0), |(lo, hi), s| (lo.min(s), hi.max(s)))
}

/// A tangent vector at a curve: same dimension, band at most the curve's band.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveTangent {
    field: PeriodicField,
}

impl CurveTangent {
    pub fn new(field: PeriodicField) -> Self {
        Self { field }
    }

    /// Tangent at `c`, padded to the curve's band.
    pub fn at(c: &Curve, field: PeriodicField) -> Result<Self> {
        if field.dim() != c.dim() {
            return Err(Error::DimensionMismatch { expected: c.dim(), found: field.dim() });
        }
        if field.band() > c.band() {
            return Err(Error::BandTooLarge { requested: field.band(), available: c.band() });
        }
        Ok(Self { field: field.with_band(c.band()) })
    }

    pub fn field(&self) -> &PeriodicField {
        &self.field
    }

    pub fn into_field(self) -> PeriodicField {
        self.field
    }
}

fn check_tangent(c: &Curve, h: &CurveTangent) -> Result<()> {
    if h.field.dim() != c.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), found: h.field.dim() });
    }
    if h.field.band() > c.band() {
        return Err(Error::BandTooLarge { requested: h.field.band(), available: c.band() });
    }
    Ok(())
}

/// |c′| analyzed on the 2×-padded grid.
pub fn speed(c: &Curve) -> Result<PeriodicField> {
    let (_, frame) = c.grid_and_frame()?;
    PeriodicField::analyze(&frame.sigma, 1)
}

/// D_s^j h, projected to the curve's band after every application.
pub fn arc_derivative(c: &Curve, h: &CurveTangent, j: usize) -> Result<CurveTangent> {
    check_tangent(c, h)?;
    if j == 0 {
        return Ok(h.clone());
    }
    let (grid, frame) = c.grid_and_frame()?;
    let band = c.band();
    let mut out = PeriodicField::zeros(c.dim(), band);
    for (a, spec) in c.specs(&grid, &h.field).into_iter().enumerate() {
        let mut current = spec;
        for _ in 0..j {
            current = frame.arc_step(&grid, &current).1;
        }
        for k in 0..=band {
            out.set_coeff(k, a, current[k]);
        }
    }
    Ok(CurveTangent { field: out })
}

/// G_c(h, k) by trapezoidal quadrature on the 2×-padded grid.
pub fn metric_eval(c: &Curve, h: &CurveTangent, k: &CurveTangent, m: &MetricCoefficients) -> Result<f64> {
    check_tangent(c, h)?;
    check_tangent(c, k)?;
    let (grid, frame) = c.grid_and_frame()?;
    let w = grid.weight();
    let hs = c.specs(&grid, &h.field);
    let ks = c.specs(&grid, &k.field);
    let mut total = 0.0;
    for (hspec, kspec) in hs.iter().zip(&ks) {
        let hc = frame.arc_chain(&grid, hspec, m.order());
        let kc = frame.arc_chain(&grid, kspec, m.order());
        for (j, aj) in m.coefficients().iter().enumerate() {
            if *aj == 0.0 {
                continue;
            }
            let s: f64 = hc[j].iter().zip(&kc[j]).zip(&frame.sigma).map(|((x, y), s)| x * y * s).sum();
            total += aj * w * s;
        }
    }
    Ok(total)
}

/// Metric matrix in the real Fourier basis {e_α, cos kθ e_α, sin kθ e_α}, ordered
/// component-major, with its extreme eigenvalues.
#[derive(Debug, Clone)]
pub struct MetricMatrix {
    pub matrix: DMatrix<f64>,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

impl MetricMatrix {
    pub fn condition_number(&self) -> f64 {
        if self.min_eigenvalue > 0.0 {
            self.max_eigenvalue / self.min_eigenvalue
        } else {
            f64::INFINITY
        }
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue > 0.0
    }
}

/// G_{IJ} = G_c(b_I, b_J) for the real basis of band `basis_band`.
pub fn metric_matrix(c: &Curve, m: &MetricCoefficients, basis_band: usize) -> Result<MetricMatrix> {
    if basis_band > c.band() {
        return Err(Error::BandTooLarge { requested: basis_band, available: c.band() });
    }
    let engine = CurveMetricEngine::new(c.dim(), basis_band, c.band(), m.coefficients())?;
    let (_, frame) = c.grid_and_frame()?;
    let asm = engine.assemble_frame(frame)?;
    Ok(expand_blocks(&asm.gram, c.dim()))
}

fn expand_blocks(block: &DMatrix<f64>, dim: usize) -> MetricMatrix {
    let nb = block.nrows();
    let mut matrix = DMatrix::<f64>::zeros(dim * nb, dim * nb);
    for a in 0..dim {
        matrix.view_mut((a * nb, a * nb), (nb, nb)).copy_from(block);
    }
    let eig = block.clone().symmetric_eigenvalues();
    let min_eigenvalue = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_eigenvalue = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    MetricMatrix { matrix, min_eigenvalue, max_eigenvalue }
}
