//! Spectral regularity diagnostics: decay exponents, Sobolev norm ladders, and
//! the endpoint-versus-velocity comparison for boundary value solves.

use alloc::vec::Vec;

use crate::error::Result;
use crate::field::PeriodicField;

/// Allowed shortfall of the solved velocity's decay exponent.
pub const REGULARITY_MARGIN: f64 = 0.3;

#[derive(Debug, Clone, PartialEq)]
pub struct NormRung {
    pub q: f64,
    pub norm: f64,
    /// ‖·‖_{H^q} / ‖·‖_{H^{q−step}} (absent on the first rung).
    pub growth: Option<f64>,
}

/// ‖u‖_{H^q} for q = 0, step, 2·step, … ≤ q_max.
pub fn norm_ladder(u: &PeriodicField, q_max: f64, step: f64) -> Result<Vec<NormRung>> {
    let mut out: Vec<NormRung> = Vec::new();
    let mut i = 0usize;
    loop {
        let q = i as f64 * step;
        if q > q_max + 1e-12 {
            break;
        }
        let norm = u.sobolev_norm(q)?;
        let growth = out.last().map(|prev| if prev.norm > 0.0 { norm / prev.norm } else { f64::INFINITY });
        out.push(NormRung { q, norm, growth });
        i += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Preserved,
    Lost,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Preserved => "preserved",
            Verdict::Lost => "lost",
        }
    }
}

/// Preserved iff the solved exponent is at least the smallest endpoint exponent
/// minus [`REGULARITY_MARGIN`]. An infinite solved exponent always passes.
pub fn verdict(solved: f64, endpoints: &[f64]) -> Verdict {
    let floor = endpoints.iter().cloned().fold(f64::INFINITY, f64::min);
    if solved == f64::INFINITY || solved >= floor - REGULARITY_MARGIN {
        Verdict::Preserved
    } else {
        Verdict::Lost
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub decay_exponent: f64,
    pub endpoint_exponents: Vec<f64>,
    pub norm_ladder: Vec<NormRung>,
    pub verdict: Verdict,
}

/// Report for a single field (no endpoints): the verdict compares the field to itself.
pub fn field_report(u: &PeriodicField, k_min: usize, q_max: f64) -> Result<RegularityReport> {
    let s = u.decay_exponent(k_min)?;
    Ok(RegularityReport { decay_exponent: s, endpoint_exponents: Vec::new(), norm_ladder: norm_ladder(u, q_max, 0.5)?, verdict: verdict(s, &[s]) })
}

/// Report for a boundary value solve: endpoint curves and the solved velocity,
/// all compared on the coordinate band of the solve.
pub fn bvp_report(
    solved: &PeriodicField,
    endpoints: &[&PeriodicField],
    k_min: usize,
    q_max: f64,
) -> Result<RegularityReport> {
    let band = solved.band();
    let s = solved.decay_exponent(k_min)?;
    let ends = endpoints.iter().map(|e| e.with_band(band).decay_exponent(k_min)).collect::<Result<Vec<_>>>()?;
    Ok(RegularityReport {
        decay_exponent: s,
        norm_ladder: norm_ladder(solved, q_max, 0.5)?,
        verdict: verdict(s, &ends),
        endpoint_exponents: ends,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_thresholds() {
        assert_eq!(verdict(2.8, &[3.0, 5.0]), Verdict::Preserved);
        assert_eq!(verdict(2.6, &[3.0, 5.0]), Verdict::Lost);
        assert_eq!(verdict(f64::INFINITY, &[3.0]), Verdict::Preserved);
        assert_eq!(verdict(4.0, &[f64::INFINITY, f64::INFINITY]), Verdict::Lost);
    }

    #[test]
    fn ladder_is_monotone() {
        let u = PeriodicField::from_scalar_fn(32, |t| t.cos().exp()).unwrap();
        let ladder = norm_ladder(&u, 3.0, 0.5).unwrap();
        assert_eq!(ladder.len(), 7);
        assert!(ladder.windows(2).all(|w| w[1].norm >= w[0].norm));
    }
}
