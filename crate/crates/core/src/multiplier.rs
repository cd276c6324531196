//! Diagonal Fourier multipliers û_k ↦ a(k)·û_k.

use alloc::format;
use crate::prelude::*;

use crate::error::{Error, Result};
use crate::field::PeriodicField;

/// Even, strictly positive symbol a(k) of a Fourier multiplier.
#[derive(Debug, Clone, PartialEq)]
pub enum MultiplierSymbol {
    /// (1 + k²)^q
    BesselPower(f64),
    /// 1 + k^{2n}, the symbol of Id + Δ^n
    InertiaSum(u32),
    /// (1 + k²)^n, the symbol of (Id + Δ)^n
    InertiaPower(u32),
    /// Explicit table a(0), a(1), …, a(K).
    Custom(Vec<f64>),
}

impl MultiplierSymbol {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::BesselPower(q) if !q.is_finite() => {
                Err(Error::InvalidSymbol(format!("non-finite exponent {q}")))
            }
            Self::Custom(table) => {
                if table.is_empty() {
                    return Err(Error::InvalidSymbol("empty table".into()));
                }
                match table.iter().position(|a| !(a.is_finite() && *a > 0.0)) {
                    Some(k) => Err(Error::InvalidSymbol(format!("a({k}) = {} is not positive", table[k]))),
                    None => Ok(()),
                }
            }
            _ => Ok(()),
        }
    }

    /// a(k) for k >= 0 (a(-k) = a(k)).
    pub fn eval(&self, k: usize) -> Result<f64> {
        let kf = k as f64;
        match self {
            Self::BesselPower(q) => Ok((1.0 + kf * kf).powf(*q)),
            Self::InertiaSum(n) => Ok(1.0 + kf.powi(2 * *n as i32)),
            Self::InertiaPower(n) => Ok((1.0 + kf * kf).powi(*n as i32)),
            Self::Custom(table) => match table.get(k) {
                Some(a) if a.is_finite() && *a > 0.0 => Ok(*a),
                Some(a) => Err(Error::InvalidSymbol(format!("a({k}) = {a} is not positive"))),
                None => Err(Error::InvalidSymbol(format!("table of length {} has no entry for k = {k}", table.len()))),
            },
        }
    }
}

impl PeriodicField {
    /// A u (or A⁻¹ u when `inverse`).
    pub fn apply_multiplier(&self, symbol: &MultiplierSymbol, inverse: bool) -> Result<Self> {
        symbol.validate()?;
        let mut out = self.clone();
        let dim = self.dim();
        let band = self.band();
        let mut coeffs = out.coeffs().to_vec();
        for k in 0..=band {
            let a = symbol.eval(k)?;
            let factor = if inverse { 1.0 / a } else { a };
            for z in &mut coeffs[k * dim..(k + 1) * dim] {
                *z *= factor;
            }
        }
        out = PeriodicField::from_coeffs(dim, band, coeffs)?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn bessel_zero_is_identity() {
        let u = PeriodicField::from_scalar_fn(16, |t| (t.sin() * 2.0).exp()).unwrap();
        assert_eq!(u.apply_multiplier(&MultiplierSymbol::BesselPower(0.0), false).unwrap(), u);
    }

    #[test]
    fn eigenfunction_scaling() {
        let k = 3.0;
        let u = PeriodicField::from_scalar_fn(16, |t| (k * t).cos()).unwrap();
        let au = u.apply_multiplier(&MultiplierSymbol::InertiaPower(2), false).unwrap();
        let expected = (1.0 + k * k).powi(2);
        assert!((au.eval(0.4)[0] - expected * (k * 0.4).cos()).abs() < 1e-11 * expected);
        let bu = u.apply_multiplier(&MultiplierSymbol::InertiaSum(2), false).unwrap();
        assert!((bu.eval(0.0)[0] - (1.0 + k.powi(4))).abs() < 1e-11 * k.powi(4));
    }

    #[test]
    fn custom_symbol_must_be_positive() {
        let u = PeriodicField::zeros(1, 2);
        let bad = MultiplierSymbol::Custom(vec![1.0, 0.0, 2.0]);
        assert!(matches!(u.apply_multiplier(&bad, false), Err(Error::InvalidSymbol(_))));
        let short = MultiplierSymbol::Custom(vec![1.0, 2.0]);
        assert!(matches!(u.apply_multiplier(&short, true), Err(Error::InvalidSymbol(_))));
        let good = MultiplierSymbol::Custom(vec![1.0, 2.0, 4.0]);
        assert!(u.apply_multiplier(&good, true).is_ok());
    }
}
