//! Complex DFT used by the spectral routines. Power-of-two lengths take an
//! iterative radix-2 path; any other length falls back to the direct sum.

use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

pub(crate) struct Fft {
    n: usize,
    twiddles: Vec<Complex64>,
    stage_twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl Fft {
    pub(crate) fn new(n: usize) -> Self {
        let twiddles = (0..n.max(1))
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
            .collect();
        let bitrev = if n.is_power_of_two() {
            let bits = n.trailing_zeros();
            (0..n)
                .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
                .collect()
        } else {
            Vec::new()
        };
        let mut stage_twiddles = alloc::vec![Complex64::new(0.0, 0.0); n.max(2)];
        let mut half = 1;
        while half < n && n.is_power_of_two() {
            for k in 0..half {
                stage_twiddles[half + k] = Complex64::from_polar(1.0, -PI * k as f64 / half as f64);
            }
            half <<= 1;
        }
        Self { n, twiddles, stage_twiddles, bitrev }
    }

    /// X_k = sum_j x_j e^{-2 pi i jk/n}, unnormalized.
    pub(crate) fn forward(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        if self.n.is_power_of_two() {
            self.radix2(buf);
        } else {
            self.direct(buf);
        }
    }

    /// x_j = sum_k X_k e^{+2 pi i jk/n}, unnormalized.
    pub(crate) fn inverse(&self, buf: &mut [Complex64]) {
        for z in buf.iter_mut() {
            *z = z.conj();
        }
        self.forward(buf);
        for z in buf.iter_mut() {
            *z = z.conj();
        }
    }

    fn radix2(&self, buf: &mut [Complex64]) {
        let n = self.n;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                buf.swap(i, j);
            }
        }
        for pair in buf.chunks_exact_mut(2) {
            let (a, b) = (pair[0], pair[1]);
            pair[0] = a + b;
            pair[1] = a - b;
        }
        let mut half = 2;
        while half < n {
            // stage twiddles w^k for k < half sit contiguously at offset half
            let tw = &self.stage_twiddles[half..2 * half];
            for block in buf.chunks_exact_mut(2 * half) {
                let (lo, hi) = block.split_at_mut(half);
                for ((a, b), w) in lo.iter_mut().zip(hi.iter_mut()).zip(tw) {
                    let t = *b * w;
                    *b = *a - t;
                    *a += t;
                }
            }
            half <<= 1;
        }
    }

    fn direct(&self, buf: &mut [Complex64]) {
        let n = self.n;
        let input: Vec<Complex64> = buf.to_vec();
        for (k, out) in buf.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, x) in input.iter().enumerate() {
                acc += x * self.twiddles[(j * k) % n];
            }
            *out = acc;
        }
    }
}

/// Signed wavenumber of FFT bin `j` on an `n`-point grid; the Nyquist bin maps to 0
/// so that derivative operators stay real.
pub(crate) fn wavenumber(j: usize, n: usize) -> f64 {
    if 2 * j < n {
        j as f64
    } else if 2 * j == n {
        0.0
    } else {
        j as f64 - n as f64
    }
}

#[allow(dead_code)]
pub(crate) fn max_abs(buf: &[Complex64]) -> f64 {
    buf.iter().fold(0.0, |m, z| m.max(z.norm()))
}
