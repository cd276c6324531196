//! Empirical Sobolev regularity: the power-law decay rate of Fourier coefficients.

use alloc::format;
use crate::prelude::*;

use crate::error::{Error, Result};
use crate::field::PeriodicField;

/// Bins whose peak amplitude sits below this fraction of the largest coefficient
/// are treated as resolved (round-off level) and excluded from the fit.
pub const RESOLVED_FLOOR: f64 = 1e-13;

impl PeriodicField {
    /// Fitted exponent `s` in |û_k| ≈ C·k^{-s}, from the peak amplitude of each
    /// dyadic bin [k_min, 2k_min), [2k_min, 4k_min), … up to the band.
    ///
    /// Returns `f64::INFINITY` when fewer than two bins carry content above the
    /// resolution floor: the field is smooth at this resolution.
    pub fn decay_exponent(&self, k_min: usize) -> Result<f64> {
        if k_min < 4 || self.band() < 2 * k_min {
            return Err(Error::InvalidArgument(format!(
                "decay fit needs band >= 2*k_min >= 8 (band {}, k_min {k_min})",
                self.band()
            )));
        }
        let floor = (RESOLVED_FLOOR * self.max_coeff_amplitude()).max(1e-300);
        let mut points: Vec<(f64, f64)> = Vec::new();
        let mut lo = k_min;
        while lo <= self.band() {
            let hi = (2 * lo).min(self.band() + 1);
            let (k_peak, amp) = (lo..hi)
                .map(|k| (k, self.mode_amplitude(k)))
                .fold((lo, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if amp > floor {
                points.push((-(k_peak as f64).ln(), amp.ln()));
            }
            lo = hi;
        }
        if points.len() < 2 {
            return Ok(f64::INFINITY);
        }
        Ok(least_squares_slope(&points))
    }
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn power_law(band: usize, s: f64) -> PeriodicField {
        let mut f = PeriodicField::zeros(1, band);
        for k in 1..=band {
            f.set_coeff(k, 0, Complex64::new((k as f64).powf(-s), 0.0));
        }
        f
    }

    #[test]
    fn recovers_power_laws() {
        assert!((power_law(63, 2.0).decay_exponent(4).unwrap() - 2.0).abs() <= 0.1);
        assert!((power_law(63, 4.0).decay_exponent(4).unwrap() - 4.0).abs() <= 0.2);
    }

    #[test]
    fn single_mode_is_resolved() {
        let f = PeriodicField::from_scalar_fn(64, |t| t.cos()).unwrap();
        assert_eq!(f.decay_exponent(4).unwrap(), f64::INFINITY);
    }

    #[test]
    fn rejects_small_bands() {
        assert!(power_law(7, 2.0).decay_exponent(4).is_err());
        assert!(power_law(63, 2.0).decay_exponent(3).is_err());
    }
}
