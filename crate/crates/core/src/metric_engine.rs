//! Discrete arc-length calculus shared by the curve metric and its geodesic
//! Hamiltonian.
//!
//! A curve of band K is sampled on the 2×-padded grid of M = 4(K + 1) points.
//! One arc-length derivative is D_s = P Σ⁻¹ ∂_θ: spectral derivative, pointwise
//! division by the speed σ = |c′|, and projection P back to band K. The metric is
//! G_c(h, k) = (2π/M) Σ_j a_j Σ_m σ_m ⟨D_s^j h, D_s^j k⟩(θ_m).

use alloc::vec;
use crate::prelude::*;
use core::f64::consts::PI;
use nalgebra::{Cholesky, DMatrix, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{wavenumber, Fft};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// FFT plan plus the band-K projection on the padded grid.
pub(crate) struct SpectralGrid {
    m: usize,
    band: usize,
    fft: Fft,
}

impl SpectralGrid {
    pub(crate) fn new(band: usize) -> Self {
        let m = 4 * (band + 1);
        Self { m, band, fft: Fft::new(m) }
    }

    pub(crate) fn len(&self) -> usize {
        self.m
    }

    pub(crate) fn weight(&self) -> f64 {
        2.0 * PI / self.m as f64
    }

    /// Grid values of a spectrum (û_k at index k, conj at M − k).
    pub(crate) fn values(&self, spec: &[Complex64]) -> Vec<f64> {
        let mut buf = spec.to_vec();
        self.fft.inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    /// Normalized spectrum of grid values, projected to the band.
    pub(crate) fn project(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut buf);
        self.mask(&mut buf);
        buf
    }

    /// Normalizes an unnormalized forward transform and zeroes modes above the band.
    fn mask(&self, buf: &mut [Complex64]) {
        let scale = 1.0 / self.m as f64;
        for (j, z) in buf.iter_mut().enumerate() {
            let k = if j <= self.m / 2 { j } else { self.m - j };
            *z = if k <= self.band { *z * scale } else { ZERO };
        }
    }

    /// ik·û_k.
    pub(crate) fn differentiate_spec(&self, spec: &[Complex64]) -> Vec<Complex64> {
        spec.iter()
            .enumerate()
            .map(|(j, z)| z * Complex64::new(0.0, wavenumber(j, self.m)))
            .collect()
    }

    /// Full-grid spectral derivative of arbitrary grid values (Nyquist zeroed).
    pub(crate) fn differentiate_values(&self, values: &[f64]) -> Vec<f64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut buf);
        let scale = 1.0 / self.m as f64;
        for (j, z) in buf.iter_mut().enumerate() {
            *z *= Complex64::new(0.0, wavenumber(j, self.m) * scale);
        }
        self.fft.inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    /// Spectrum of a real-basis coefficient block [c_0, a_1, b_1, …, a_L, b_L].
    pub(crate) fn spec_from_real(&self, block: &[f64]) -> Vec<Complex64> {
        let mut spec = vec![ZERO; self.m];
        spec[0] = Complex64::new(block[0], 0.0);
        let l = (block.len() - 1) / 2;
        for k in 1..=l.min(self.band) {
            let z = Complex64::new(0.5 * block[2 * k - 1], -0.5 * block[2 * k]);
            spec[k] = z;
            spec[self.m - k] = z.conj();
        }
        spec
    }

    /// Spectrum of one real basis function: 1, cos kθ (odd index) or sin kθ (even index).
    pub(crate) fn basis_spec(&self, index: usize) -> Vec<Complex64> {
        let mut spec = vec![ZERO; self.m];
        if index == 0 {
            spec[0] = Complex64::new(1.0, 0.0);
        } else {
            let k = index.div_ceil(2);
            let z = if index % 2 == 1 { Complex64::new(0.5, 0.0) } else { Complex64::new(0.0, -0.5) };
            spec[k] = z;
            spec[self.m - k] = z.conj();
        }
        spec
    }
}

/// Speed data of one curve on a [`SpectralGrid`].
pub(crate) struct ArcFrame {
    /// c′(θ_m), one vector of M values per component
    pub(crate) tangent: Vec<Vec<f64>>,
    pub(crate) sigma: Vec<f64>,
}

/// Speeds below this fraction of the peak speed count as zero.
pub(crate) const IMMERSION_TOLERANCE: f64 = 1e-10;

pub(crate) fn immersed(min_speed: f64, max_speed: f64) -> bool {
    min_speed > IMMERSION_TOLERANCE * max_speed && min_speed > 0.0
}

impl ArcFrame {
    /// Builds the frame from per-component spectra of the curve.
    pub(crate) fn from_specs(grid: &SpectralGrid, specs: &[Vec<Complex64>]) -> Result<Self> {
        let tangent: Vec<Vec<f64>> = specs.iter().map(|s| grid.values(&grid.differentiate_spec(s))).collect();
        Self::from_tangent(tangent)
    }

    pub(crate) fn from_tangent(tangent: Vec<Vec<f64>>) -> Result<Self> {
        let m = tangent[0].len();
        let sigma: Vec<f64> = (0..m).map(|i| tangent.iter().map(|t| t[i] * t[i]).sum::<f64>().sqrt()).collect();
        let min_speed = sigma.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let max_speed = sigma.iter().fold(0.0f64, |a, &b| a.max(b));
        if !immersed(min_speed, max_speed) {
            return Err(Error::DegenerateCurve { min_speed });
        }
        Ok(Self { tangent, sigma })
    }

    /// Grid values of D_s^j h for j = 0..=order, from the spectrum of h.
    pub(crate) fn arc_chain(&self, grid: &SpectralGrid, spec: &[Complex64], order: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(order + 1);
        out.push(grid.values(spec));
        let mut current = spec.to_vec();
        for _ in 0..order {
            current = self.arc_step(grid, &current).1;
            out.push(grid.values(&current));
        }
        out
    }

    /// One application of D_s: returns (∂_θ h values, spectrum of D_s h).
    pub(crate) fn arc_step(&self, grid: &SpectralGrid, spec: &[Complex64]) -> (Vec<f64>, Vec<Complex64>) {
        let t = grid.values(&grid.differentiate_spec(spec));
        let (t, next) = self.divide_and_project(grid, t);
        (t, next)
    }

    fn divide_and_project(&self, grid: &SpectralGrid, t: Vec<f64>) -> (Vec<f64>, Vec<Complex64>) {
        let q: Vec<f64> = t.iter().zip(&self.sigma).map(|(a, s)| a / s).collect();
        (t, grid.project(&q))
    }
}

/// Metric, Hamiltonian and its c-gradient for curves whose coordinates are real
/// Fourier coefficients of band `basis_band`, evaluated on the padded grid of a
/// projection band.
pub(crate) struct CurveMetricEngine {
    dim: usize,
    nb: usize,
    coeffs: Vec<f64>,
    grid: SpectralGrid,
    /// φ_i′(θ_m) for each real basis function
    basis_derivs: Vec<Vec<f64>>,
    basis_values: Vec<Vec<f64>>,
    check_grid: SpectralGrid,
}

pub(crate) struct Assembly {
    pub(crate) frame: ArcFrame,
    pub(crate) gram: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl CurveMetricEngine {
    pub(crate) fn new(dim: usize, basis_band: usize, projection_band: usize, coeffs: &[f64]) -> Result<Self> {
        if basis_band > projection_band {
            return Err(Error::BandTooLarge { requested: basis_band, available: projection_band });
        }
        let grid = SpectralGrid::new(projection_band);
        let nb = 2 * basis_band + 1;
        let basis_values = (0..nb).map(|i| grid.values(&grid.basis_spec(i))).collect();
        let basis_derivs = (0..nb).map(|i| grid.values(&grid.differentiate_spec(&grid.basis_spec(i)))).collect();
        // 4× oversampling of the natural grid for the immersion check
        let check_grid = SpectralGrid::new(2 * projection_band + 1);
        Ok(Self { dim, nb, coeffs: coeffs.to_vec(), grid, basis_derivs, basis_values, check_grid })
    }

    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn basis_len(&self) -> usize {
        self.nb
    }

    pub(crate) fn state_len(&self) -> usize {
        self.dim * self.nb
    }

    fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn combine(&self, rows: &[Vec<f64>], block: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.len()];
        for (c, row) in block.iter().zip(rows) {
            if *c != 0.0 {
                for (o, v) in out.iter_mut().zip(row) {
                    *o += c * v;
                }
            }
        }
        out
    }

    pub(crate) fn frame(&self, state: &[f64]) -> Result<ArcFrame> {
        let tangent = (0..self.dim)
            .map(|a| self.combine(&self.basis_derivs, &state[a * self.nb..(a + 1) * self.nb]))
            .collect();
        ArcFrame::from_tangent(tangent)
    }

    /// Smallest speed on a 4×-oversampled grid, or 0 when below the immersion tolerance.
    pub(crate) fn min_speed_oversampled(&self, state: &[f64]) -> f64 {
        let g = &self.check_grid;
        let mut sq = vec![0.0; g.len()];
        for a in 0..self.dim {
            let spec = g.spec_from_real(&state[a * self.nb..(a + 1) * self.nb]);
            for (s, v) in sq.iter_mut().zip(g.values(&g.differentiate_spec(&spec))) {
                *s += v * v;
            }
        }
        let min = sq.iter().cloned().fold(f64::INFINITY, f64::min).sqrt();
        let max = sq.into_iter().fold(0.0, f64::max).sqrt();
        if immersed(min, max) {
            min
        } else {
            0.0
        }
    }

    /// Scalar Gram block S with G = I_d ⊗ S.
    pub(crate) fn assemble(&self, state: &[f64]) -> Result<Assembly> {
        self.assemble_frame(self.frame(state)?)
    }

    /// Gram block for a curve given directly by its speed frame on this grid.
    pub(crate) fn assemble_frame(&self, frame: ArcFrame) -> Result<Assembly> {
        let m = self.grid.len();
        let w = self.grid.weight();
        let nb = self.nb;
        let mut gram = DMatrix::<f64>::zeros(nb, nb);
        self.accumulate_gram(&mut gram, &self.basis_values, &frame.sigma, w * self.coeffs[0]);
        // basis functions are processed in pairs packed as re + i·im; every
        // operator in the chain maps real signals to real signals
        let pairs = nb.div_ceil(2);
        let mut layer: Vec<Vec<f64>> = vec![Vec::new(); nb];
        let mut specs: Vec<Vec<Complex64>> = Vec::with_capacity(pairs);
        for j in 1..=self.order() {
            let mut next_specs = Vec::with_capacity(pairs);
            for pair in 0..pairs {
                let (i0, i1) = (2 * pair, 2 * pair + 1);
                let t: Vec<Complex64> = if j == 1 {
                    let im = self.basis_derivs.get(i1);
                    (0..m)
                        .map(|x| Complex64::new(self.basis_derivs[i0][x], im.map_or(0.0, |v| v[x])))
                        .collect()
                } else {
                    let mut buf = self.grid.differentiate_spec(&specs[pair]);
                    self.grid.fft.inverse(&mut buf);
                    buf
                };
                let mut buf: Vec<Complex64> = t.iter().zip(&frame.sigma).map(|(z, s)| z / s).collect();
                self.grid.fft.forward(&mut buf);
                self.grid.mask(&mut buf);
                let mut vals = buf.clone();
                self.grid.fft.inverse(&mut vals);
                layer[i0] = vals.iter().map(|z| z.re).collect();
                if i1 < nb {
                    layer[i1] = vals.iter().map(|z| z.im).collect();
                }
                next_specs.push(buf);
            }
            specs = next_specs;
            if self.coeffs[j] != 0.0 {
                self.accumulate_gram(&mut gram, &layer, &frame.sigma, w * self.coeffs[j]);
            }
        }
        debug_assert_eq!(frame.sigma.len(), m);
        for i in 0..nb {
            for l in 0..i {
                gram[(l, i)] = gram[(i, l)];
            }
        }
        let chol = Cholesky::new(gram.clone()).ok_or_else(|| Error::Linalg("metric Gram matrix is not positive definite".into()))?;
        Ok(Assembly { frame, gram, chol })
    }

    fn accumulate_gram(&self, gram: &mut DMatrix<f64>, rows: &[Vec<f64>], sigma: &[f64], scale: f64) {
        let weighted: Vec<Vec<f64>> =
            rows.iter().map(|r| r.iter().zip(sigma).map(|(v, s)| v * s * scale).collect()).collect();
        for i in 0..rows.len() {
            for l in 0..=i {
                let dot: f64 = weighted[i].iter().zip(&rows[l]).map(|(a, b)| a * b).sum();
                gram[(i, l)] += dot;
            }
        }
    }

    /// Applies G (block diagonal over components).
    pub(crate) fn apply_metric(&self, asm: &Assembly, h: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; h.len()];
        for a in 0..self.dim {
            let block = nalgebra::DVector::from_column_slice(&h[a * self.nb..(a + 1) * self.nb]);
            let r = &asm.gram * block;
            out[a * self.nb..(a + 1) * self.nb].copy_from_slice(r.as_slice());
        }
        out
    }

    /// G⁻¹ p.
    pub(crate) fn solve(&self, asm: &Assembly, p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; p.len()];
        for a in 0..self.dim {
            let block = nalgebra::DVector::from_column_slice(&p[a * self.nb..(a + 1) * self.nb]);
            let r = asm.chol.solve(&block);
            out[a * self.nb..(a + 1) * self.nb].copy_from_slice(r.as_slice());
        }
        out
    }

    /// ∂/∂c of hᵀ G(c) h with h held fixed (reverse-mode through the discrete
    /// arc-length chain).
    pub(crate) fn energy_gradient(&self, asm: &Assembly, h: &[f64]) -> Vec<f64> {
        let n = self.order();
        let m = self.grid.len();
        let w = self.grid.weight();
        let sigma = &asm.frame.sigma;
        let mut g_sigma = vec![0.0; m];
        for a in 0..self.dim {
            let block = &h[a * self.nb..(a + 1) * self.nb];
            if block.iter().all(|v| *v == 0.0) {
                continue;
            }
            // forward: values of h^(j) and t^(j) = ∂_θ h^(j-1)
            let mut hv: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
            let mut tv: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
            let mut spec = self.grid.spec_from_real(block);
            hv.push(self.grid.values(&spec));
            tv.push(Vec::new());
            for _ in 0..n {
                let (t, next) = asm.frame.arc_step(&self.grid, &spec);
                tv.push(t);
                hv.push(self.grid.values(&next));
                spec = next;
            }
            // reverse
            let mut g: Vec<f64> = (0..m).map(|i| 2.0 * w * self.coeffs[n] * sigma[i] * hv[n][i]).collect();
            for i in 0..m {
                g_sigma[i] += w * self.coeffs[n] * hv[n][i] * hv[n][i];
            }
            for j in (1..=n).rev() {
                let pg = self.grid.values(&self.grid.project(&g));
                for i in 0..m {
                    g_sigma[i] -= pg[i] * tv[j][i] / (sigma[i] * sigma[i]);
                }
                let scaled: Vec<f64> = pg.iter().zip(sigma).map(|(p, s)| p / s).collect();
                let back = self.grid.differentiate_values(&scaled);
                let aj = self.coeffs[j - 1];
                for i in 0..m {
                    g[i] = -back[i] + 2.0 * w * aj * sigma[i] * hv[j - 1][i];
                    g_sigma[i] += w * aj * hv[j - 1][i] * hv[j - 1][i];
                }
            }
        }
        let mut grad = vec![0.0; self.state_len()];
        for a in 0..self.dim {
            let gt: Vec<f64> = (0..m).map(|i| g_sigma[i] * asm.frame.tangent[a][i] / sigma[i]).collect();
            for i in 0..self.nb {
                grad[a * self.nb + i] = gt.iter().zip(&self.basis_derivs[i]).map(|(x, y)| x * y).sum();
            }
        }
        grad
    }

    /// hᵀ G(c) h.
    #[cfg(test)]
    pub(crate) fn energy(&self, asm: &Assembly, h: &[f64]) -> f64 {
        self.apply_metric(asm, h).iter().zip(h).map(|(a, b)| a * b).sum()
    }

    /// H = ½ pᵀ G⁻¹ p.
    pub(crate) fn hamiltonian(&self, asm: &Assembly, p: &[f64]) -> f64 {
        0.5 * self.solve(asm, p).iter().zip(p).map(|(a, b)| a * b).sum::<f64>()
    }
}
