//! Band-limited periodic fields on the circle, stored by their non-negative
//! Fourier modes. Negative modes are implied by Hermitian symmetry, so every
//! field is real-valued by construction.

use alloc::format;
use alloc::vec;
use crate::prelude::*;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::Fft;

/// Finite Sobolev exponent `q` of the periodic space H^q(S¹).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() {
            Ok(Self(q))
        } else {
            Err(Error::InvalidIndex(q))
        }
    }

    /// Index restricted to `q > bound`.
    pub fn above(q: f64, bound: f64) -> Result<Self> {
        let q = Self::new(q)?;
        if q.0 > bound {
            Ok(q)
        } else {
            Err(Error::InvalidIndex(q.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Bessel weight (1 + k²)^q.
    pub fn weight(self, k: usize) -> f64 {
        (1.0 + (k * k) as f64).powf(self.0)
    }
}

impl TryFrom<f64> for SobolevIndex {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        Self::new(q)
    }
}

/// A real ℝ^d-valued trigonometric polynomial of degree `band` on S¹ = ℝ/2πℤ.
///
/// `coeffs[k * dim + a]` holds û_k for component `a` and mode `0 <= k <= band`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    dim: usize,
    band: usize,
    coeffs: Vec<Complex64>,
}

/// Equispaced grid θ_j = 2πj/n.
pub fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|j| 2.0 * PI * j as f64 / n as f64).collect()
}

impl PeriodicField {
    pub fn zeros(dim: usize, band: usize) -> Self {
        assert!(dim > 0, "field dimension must be positive");
        Self { dim, band, coeffs: vec![Complex64::new(0.0, 0.0); (band + 1) * dim] }
    }

    /// Builds a field from the non-negative modes. The imaginary part of û_0 is dropped.
    pub fn from_coeffs(dim: usize, band: usize, mut coeffs: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("field dimension must be positive".into()));
        }
        if coeffs.len() != (band + 1) * dim {
            return Err(Error::DimensionMismatch { expected: (band + 1) * dim, found: coeffs.len() });
        }
        for z in coeffs.iter_mut().take(dim) {
            z.im = 0.0;
        }
        Ok(Self { dim, band, coeffs })
    }

    pub fn constant(value: &[f64], band: usize) -> Self {
        let mut f = Self::zeros(value.len(), band);
        for (a, v) in value.iter().enumerate() {
            f.coeffs[a] = Complex64::new(*v, 0.0);
        }
        f
    }

    /// Samples `f` on the `n`-point grid and analyzes the result.
    pub fn from_fn<F>(n: usize, dim: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(f64, &mut [f64]),
    {
        let mut samples = vec![0.0; n * dim];
        for (j, theta) in grid(n).into_iter().enumerate() {
            f(theta, &mut samples[j * dim..(j + 1) * dim]);
        }
        Self::analyze(&samples, dim)
    }

    /// Scalar convenience wrapper around [`PeriodicField::from_fn`].
    pub fn from_scalar_fn<F: Fn(f64) -> f64>(n: usize, f: F) -> Result<Self> {
        Self::from_fn(n, 1, |t, out| out[0] = f(t))
    }

    /// Discrete Fourier analysis of `n` equispaced samples (row-major, `dim` values
    /// per point). The band is `n/2 - 1`; the Nyquist mode is dropped.
    pub fn analyze(samples: &[f64], dim: usize) -> Result<Self> {
        if dim == 0 || !samples.len().is_multiple_of(dim) {
            return Err(Error::InvalidGrid(format!(
                "{} values do not split into points of dimension {}",
                samples.len(),
                dim
            )));
        }
        let n = samples.len() / dim;
        if n < 2 || n % 2 == 1 {
            return Err(Error::InvalidGrid(format!("grid size must be even and >= 2, got {n}")));
        }
        Self::analyze_to_band(samples, dim, n / 2 - 1)
    }

    /// Analysis followed by truncation to `band` (which must be below `n/2`).
    pub fn analyze_to_band(samples: &[f64], dim: usize, band: usize) -> Result<Self> {
        let n = samples.len() / dim.max(1);
        if dim == 0 || n * dim != samples.len() || n < 2 || 2 * band >= n {
            return Err(Error::InvalidGrid(format!(
                "cannot analyze {} values (dim {dim}) to band {band}",
                samples.len()
            )));
        }
        let fft = Fft::new(n);
        let mut field = Self::zeros(dim, band);
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let scale = 1.0 / n as f64;
        for a in 0..dim {
            for j in 0..n {
                buf[j] = Complex64::new(samples[j * dim + a], 0.0);
            }
            fft.forward(&mut buf);
            for k in 0..=band {
                field.coeffs[k * dim + a] = buf[k] * scale;
            }
            field.coeffs[a].im = 0.0;
        }
        Ok(field)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn band(&self) -> usize {
        self.band
    }

    /// Natural grid size 2·band + 2 on which analysis reproduces this band.
    pub fn grid_size(&self) -> usize {
        2 * self.band + 2
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// û_k for component `a`, negative `k` via conjugate symmetry.
    pub fn coeff(&self, k: i64, a: usize) -> Complex64 {
        let m = k.unsigned_abs() as usize;
        if m > self.band {
            return Complex64::new(0.0, 0.0);
        }
        let z = self.coeffs[m * self.dim + a];
        if k < 0 {
            z.conj()
        } else {
            z
        }
    }

    pub fn set_coeff(&mut self, k: usize, a: usize, value: Complex64) {
        self.coeffs[k * self.dim + a] = if k == 0 { Complex64::new(value.re, 0.0) } else { value };
    }

    /// Euclidean length of the mode-k coefficient vector.
    pub fn mode_amplitude(&self, k: usize) -> f64 {
        if k > self.band {
            return 0.0;
        }
        self.coeffs[k * self.dim..(k + 1) * self.dim]
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Values on the `n`-point grid, row-major. Requires `n > 2·band`.
    pub fn samples_on(&self, n: usize) -> Vec<f64> {
        assert!(n > 2 * self.band, "grid of {n} points under-resolves band {}", self.band);
        let fft = Fft::new(n);
        let mut out = vec![0.0; n * self.dim];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for a in 0..self.dim {
            self.fill_spectrum(a, &mut buf);
            fft.inverse(&mut buf);
            for j in 0..n {
                out[j * self.dim + a] = buf[j].re;
            }
        }
        out
    }

    /// Values on the natural grid.
    pub fn samples(&self) -> Vec<f64> {
        self.samples_on(self.grid_size())
    }

    pub(crate) fn fill_spectrum(&self, a: usize, buf: &mut [Complex64]) {
        let n = buf.len();
        buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        buf[0] = self.coeffs[a];
        for k in 1..=self.band {
            let z = self.coeffs[k * self.dim + a];
            buf[k] = z;
            buf[n - k] = z.conj();
        }
    }

    /// Direct trigonometric evaluation at arbitrary points, row-major output.
    pub fn synthesize(&self, points: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; points.len() * self.dim];
        for (p, &theta) in points.iter().enumerate() {
            self.eval_into(theta, &mut out[p * self.dim..(p + 1) * self.dim]);
        }
        out
    }

    /// Value at a single point.
    pub fn eval(&self, theta: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(theta, &mut out);
        out
    }

    pub(crate) fn eval_into(&self, theta: f64, out: &mut [f64]) {
        let step = Complex64::from_polar(1.0, theta);
        let mut phase = Complex64::new(1.0, 0.0);
        for (a, o) in out.iter_mut().enumerate() {
            *o = self.coeffs[a].re;
        }
        for k in 1..=self.band {
            phase *= step;
            // keep the recurrence on the unit circle
            if k % 64 == 0 {
                phase = Complex64::from_polar(1.0, k as f64 * theta);
            }
            let row = &self.coeffs[k * self.dim..(k + 1) * self.dim];
            for (o, z) in out.iter_mut().zip(row) {
                *o += 2.0 * (z.re * phase.re - z.im * phase.im);
            }
        }
    }

    /// `order`-fold θ-derivative: û_k ↦ (ik)^order û_k.
    pub fn derivative(&self, order: u32) -> Self {
        let mut out = self.clone();
        if order == 0 {
            return out;
        }
        let i_pow = match order % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        for k in 0..=self.band {
            let factor = i_pow * (k as f64).powi(order as i32);
            for a in 0..self.dim {
                out.coeffs[k * self.dim + a] *= factor;
            }
        }
        for a in 0..self.dim {
            out.coeffs[a] = Complex64::new(0.0, 0.0);
        }
        out
    }

    /// ⟨u, v⟩_{H^q} = 2π Σ_k (1+k²)^q Re⟨û_k, conj v̂_k⟩, so that q = 0 is the L² pairing.
    pub fn sobolev_inner(&self, other: &Self, q: f64) -> Result<f64> {
        let q = SobolevIndex::new(q)?;
        self.weighted_inner(other, |k| q.weight(k))
    }

    pub fn sobolev_norm_sq(&self, q: f64) -> Result<f64> {
        self.sobolev_inner(self, q)
    }

    pub fn sobolev_norm(&self, q: f64) -> Result<f64> {
        Ok(self.sobolev_norm_sq(q)?.max(0.0).sqrt())
    }

    pub(crate) fn weighted_inner<W: Fn(usize) -> f64>(&self, other: &Self, weight: W) -> Result<f64> {
        self.check_dim(other)?;
        let band = self.band.min(other.band);
        let mut acc = 0.0;
        for k in 0..=band {
            let mut term = 0.0;
            for a in 0..self.dim {
                let u = self.coeffs[k * self.dim + a];
                let v = other.coeffs[k * self.dim + a];
                term += u.re * v.re + u.im * v.im;
            }
            acc += if k == 0 { term } else { 2.0 * term } * weight(k);
        }
        Ok(2.0 * PI * acc)
    }

    pub(crate) fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    /// Same field with `band` modes: truncates or zero-pads.
    pub fn with_band(&self, band: usize) -> Self {
        let mut out = Self::zeros(self.dim, band);
        let keep = (band.min(self.band) + 1) * self.dim;
        out.coeffs[..keep].copy_from_slice(&self.coeffs[..keep]);
        out
    }

    /// `alpha * self + beta * other`, padded to the larger band.
    pub fn lin_comb(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        self.check_dim(other)?;
        let band = self.band.max(other.band);
        let mut out = self.with_band(band);
        for z in out.coeffs.iter_mut() {
            *z *= alpha;
        }
        for (z, w) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *z += w * beta;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.lin_comb(1.0, other, -1.0)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.lin_comb(1.0, other, 1.0)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|z| *z *= factor);
        out
    }

    /// Scalar component `a` as a d = 1 field.
    pub fn component(&self, a: usize) -> Self {
        let coeffs = (0..=self.band).map(|k| self.coeffs[k * self.dim + a]).collect();
        Self { dim: 1, band: self.band, coeffs }
    }

    /// Concatenates components of fields with a common band.
    pub fn stack(parts: &[&Self]) -> Result<Self> {
        let band = parts.first().map(|p| p.band).unwrap_or(0);
        if parts.is_empty() || parts.iter().any(|p| p.band != band) {
            return Err(Error::InvalidArgument("stack needs fields with a common band".into()));
        }
        let dim: usize = parts.iter().map(|p| p.dim).sum();
        let mut out = Self::zeros(dim, band);
        for k in 0..=band {
            let mut offset = 0;
            for p in parts {
                for a in 0..p.dim {
                    out.coeffs[k * dim + offset + a] = p.coeffs[k * p.dim + a];
                }
                offset += p.dim;
            }
        }
        Ok(out)
    }

    /// Components `start..start + len` as a new field.
    pub fn slice_components(&self, start: usize, len: usize) -> Result<Self> {
        if len == 0 || start + len > self.dim {
            return Err(Error::DimensionMismatch { expected: start + len, found: self.dim });
        }
        let mut out = Self::zeros(len, self.band);
        for k in 0..=self.band {
            for a in 0..len {
                out.coeffs[k * len + a] = self.coeffs[k * self.dim + start + a];
            }
        }
        Ok(out)
    }

    pub fn max_coeff_amplitude(&self) -> f64 {
        (0..=self.band).map(|k| self.mode_amplitude(k)).fold(0.0, f64::max)
    }

    /// Maximum absolute value over the natural grid.
    pub fn sup_norm(&self) -> f64 {
        self.samples().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Coefficients in the real basis {1, cos θ, sin θ, …, cos Kθ, sin Kθ} for each
    /// component, component-major, truncated to `band`.
    pub fn to_real_basis(&self, band: usize) -> Vec<f64> {
        let nb = 2 * band + 1;
        let mut out = vec![0.0; self.dim * nb];
        for a in 0..self.dim {
            out[a * nb] = self.coeffs[a].re;
            for k in 1..=band.min(self.band) {
                let z = self.coeffs[k * self.dim + a];
                out[a * nb + 2 * k - 1] = 2.0 * z.re;
                out[a * nb + 2 * k] = -2.0 * z.im;
            }
        }
        out
    }

    /// Inverse of [`PeriodicField::to_real_basis`]; the result has band `band`.
    pub fn from_real_basis(dim: usize, band: usize, values: &[f64]) -> Result<Self> {
        let nb = 2 * band + 1;
        if values.len() != dim * nb {
            return Err(Error::DimensionMismatch { expected: dim * nb, found: values.len() });
        }
        let mut out = Self::zeros(dim, band);
        for a in 0..dim {
            out.coeffs[a] = Complex64::new(values[a * nb], 0.0);
            for k in 1..=band {
                out.coeffs[k * dim + a] =
                    Complex64::new(0.5 * values[a * nb + 2 * k - 1], -0.5 * values[a * nb + 2 * k]);
            }
        }
        Ok(out)
    }
}
