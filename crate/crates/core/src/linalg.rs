use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub(crate) struct Svd {
    pub(crate) u: DMatrix<f64>,
    pub(crate) s: DVector<f64>,
    pub(crate) v_t: DMatrix<f64>,
}

pub(crate) fn svd(m: &DMatrix<f64>) -> Result<Svd> {
    let svd = m.clone().svd(true, true);
    match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => Ok(Svd { u, s: svd.singular_values, v_t }),
        _ => Err(Error::Linalg("SVD did not converge".into())),
    }
}

impl Svd {
    pub(crate) fn sigma_max(&self) -> f64 {
        self.s.iter().cloned().fold(0.0, f64::max)
    }

    pub(crate) fn sigma_min(&self) -> f64 {
        self.s.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// argmin |J x + r|² + λ|x|², i.e. x = −V diag(s/(s²+λ)) Uᵀ r.
    pub(crate) fn damped_step(&self, r: &[f64], lambda: f64) -> Vec<f64> {
        let rt = self.u.transpose() * DVector::from_column_slice(r);
        let scaled = DVector::from_iterator(
            self.s.len(),
            self.s.iter().zip(rt.iter()).map(|(s, b)| if *s > 0.0 { -s * b / (s * s + lambda) } else { 0.0 }),
        );
        (self.v_t.transpose() * scaled).as_slice().to_vec()
    }
}
