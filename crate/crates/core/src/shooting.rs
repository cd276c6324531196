//! Gauss–Newton / Levenberg–Marquardt shooting for geodesic boundary value
//! problems, with a conjugacy guard on the smallest singular value of the
//! shooting Jacobian.

use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::field::PeriodicField;
use crate::linalg::svd;

/// Finite-difference stencil for Jacobian columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdScheme {
    Forward,
    Central,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingOptions {
    pub max_iter: usize,
    /// Convergence threshold on the problem's residual norm.
    pub tol: f64,
    /// Levenberg–Marquardt damping λ (0 gives plain Gauss–Newton).
    pub damping: f64,
    pub fd_step: f64,
    pub fd_scheme: FdScheme,
    /// Recompute the Jacobian every iteration; otherwise reuse it (chord
    /// iteration) while steps keep contracting the residual fast enough.
    pub refresh_jacobian: bool,
    /// σ_min < conjugate_ratio·‖J‖ is reported as possibly conjugate.
    pub conjugate_ratio: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            max_iter: 15,
            tol: 1e-10,
            damping: 0.0,
            fd_step: 1e-6,
            fd_scheme: FdScheme::Forward,
            refresh_jacobian: false,
            conjugate_ratio: 1e-8,
        }
    }
}

/// Runs independent Jacobian columns. [`Sequential`] evaluates them in order;
/// a std caller may fan them out to threads.
pub trait ColumnExecutor: Sync {
    fn run(&self, count: usize, column: &(dyn Fn(usize) -> Result<Vec<f64>> + Sync)) -> Result<Vec<Vec<f64>>>;
}

pub struct Sequential;

impl ColumnExecutor for Sequential {
    fn run(&self, count: usize, column: &(dyn Fn(usize) -> Result<Vec<f64>> + Sync)) -> Result<Vec<Vec<f64>>> {
        (0..count).map(column).collect()
    }
}

/// A square or overdetermined root-finding problem R(x) = 0.
pub trait ShootingProblem: Sync {
    fn unknowns(&self) -> usize;

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn residual_norm(&self, r: &[f64]) -> Result<f64>;

    /// Jacobian of the residual at `x`; `r0` is R(x). Finite differences by default.
    fn jacobian(
        &self,
        x: &[f64],
        r0: &[f64],
        opts: &ShootingOptions,
        exec: &dyn ColumnExecutor,
    ) -> Result<DMatrix<f64>> {
        fd_jacobian_with(exec, &|y| self.residual(y), x, r0, opts.fd_step, opts.fd_scheme)
    }
}

/// Finite-difference Jacobian with one column per unknown.
pub fn fd_jacobian<F>(f: F, x: &[f64], r0: &[f64], step: f64, scheme: FdScheme) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>> + Sync,
{
    fd_jacobian_with(&Sequential, &f, x, r0, step, scheme)
}

/// [`fd_jacobian`] with the columns dispatched through `exec`.
pub fn fd_jacobian_with(
    exec: &dyn ColumnExecutor,
    f: &(dyn Fn(&[f64]) -> Result<Vec<f64>> + Sync),
    x: &[f64],
    r0: &[f64],
    step: f64,
    scheme: FdScheme,
) -> Result<DMatrix<f64>> {
    let column = |i: usize| -> Result<Vec<f64>> {
        let mut y = x.to_vec();
        y[i] = x[i] + step;
        let plus = f(&y)?;
        Ok(match scheme {
            FdScheme::Forward => plus.iter().zip(r0).map(|(a, b)| (a - b) / step).collect(),
            FdScheme::Central => {
                y[i] = x[i] - step;
                let minus = f(&y)?;
                plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * step)).collect()
            }
        })
    };
    let columns = exec.run(x.len(), &column)?;
    let mut jac = DMatrix::<f64>::zeros(r0.len(), x.len());
    for (i, c) in columns.into_iter().enumerate() {
        if c.len() != r0.len() {
            return Err(Error::DimensionMismatch { expected: r0.len(), found: c.len() });
        }
        jac.set_column(i, &nalgebra::DVector::from_vec(c));
    }
    Ok(jac)
}

/// Raw outcome of [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct ShootingSolution {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub sigma_min: f64,
    pub jacobian_norm: f64,
    pub converged: bool,
}

/// Outcome of a Log solve: the initial velocity and the final shooting diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ShootingReport {
    pub u: PeriodicField,
    pub residual_norm: f64,
    pub iterations: usize,
    /// Smallest singular value of the shooting Jacobian at the solution.
    pub sigma_min: f64,
    pub converged: bool,
}

struct JacobianInfo {
    svd: crate::linalg::Svd,
    at: Vec<f64>,
}

fn factor<P: ShootingProblem + ?Sized>(
    problem: &P,
    x: &[f64],
    r: &[f64],
    opts: &ShootingOptions,
    exec: &dyn ColumnExecutor,
) -> Result<JacobianInfo> {
    let jac = problem.jacobian(x, r, opts, exec)?;
    let svd = svd(&jac)?;
    let (smin, smax) = (svd.sigma_min(), svd.sigma_max());
    if !(smin >= opts.conjugate_ratio * smax) || smax == 0.0 {
        return Err(Error::PossiblyConjugate { sigma_min: smin, jacobian_norm: smax });
    }
    Ok(JacobianInfo { svd, at: x.to_vec() })
}

/// Residual reduction factor below which a reused Jacobian is kept.
const CHORD_CONTRACTION: f64 = 0.1;

/// Damped Gauss–Newton from `x0`. Exceeding `max_iter` is reported through
/// `converged = false`, not as an error; a rank-deficient Jacobian is an error.
pub fn solve<P: ShootingProblem + ?Sized>(problem: &P, x0: &[f64], opts: &ShootingOptions) -> Result<ShootingSolution> {
    solve_with(problem, x0, opts, &Sequential)
}

/// [`solve`] with Jacobian columns dispatched through `exec`.
pub fn solve_with<P: ShootingProblem + ?Sized>(
    problem: &P,
    x0: &[f64],
    opts: &ShootingOptions,
    exec: &dyn ColumnExecutor,
) -> Result<ShootingSolution> {
    if x0.len() != problem.unknowns() {
        return Err(Error::DimensionMismatch { expected: problem.unknowns(), found: x0.len() });
    }
    let mut x = x0.to_vec();
    let mut r = problem.residual(&x)?;
    let mut norm = problem.residual_norm(&r)?;
    let mut iterations = 0;
    let mut jac: Option<JacobianInfo> = None;
    while norm > opts.tol && iterations < opts.max_iter {
        if opts.refresh_jacobian || jac.is_none() {
            jac = Some(factor(problem, &x, &r, opts, exec)?);
        }
        let mut accepted = false;
        let before = norm;
        for attempt in 0..2 {
            let info = jac.as_ref().expect("jacobian present");
            let step = info.svd.damped_step(&r, opts.damping);
            let mut scale = 1.0;
            for _ in 0..8 {
                let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + scale * b).collect();
                if let Ok(rt) = problem.residual(&trial) {
                    let nt = problem.residual_norm(&rt)?;
                    if nt < norm {
                        x = trial;
                        r = rt;
                        norm = nt;
                        accepted = true;
                        break;
                    }
                }
                scale *= 0.5;
            }
            if accepted || attempt == 1 || info.at == x {
                break;
            }
            // stale chord Jacobian: refresh once and retry
            jac = Some(factor(problem, &x, &r, opts, exec)?);
        }
        iterations += 1;
        if !accepted {
            break;
        }
        // chord steps that contract poorly trigger a fresh Jacobian
        if norm > CHORD_CONTRACTION * before {
            jac = None;
        }
    }
    let info = match jac {
        Some(info) if info.at == x => info,
        _ => factor(problem, &x, &r, opts, exec)?,
    };
    Ok(ShootingSolution {
        converged: norm <= opts.tol,
        x,
        residual_norm: norm,
        iterations,
        sigma_min: info.svd.sigma_min(),
        jacobian_norm: info.svd.sigma_max(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    struct Quadratic;

    impl ShootingProblem for Quadratic {
        fn unknowns(&self) -> usize {
            2
        }

        fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![x[0] + 0.1 * x[1] * x[1] - 1.0, x[1] + 0.2 * x[0] * x[1] - 0.5])
        }

        fn residual_norm(&self, r: &[f64]) -> Result<f64> {
            Ok(r.iter().map(|v| v * v).sum::<f64>().sqrt())
        }
    }

    struct Singular;

    impl ShootingProblem for Singular {
        fn unknowns(&self) -> usize {
            2
        }

        fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
            Ok(vec![x[0] + x[1] - 1.0, 2.0 * (x[0] + x[1]) - 2.0 + 1e-3])
        }

        fn residual_norm(&self, r: &[f64]) -> Result<f64> {
            Ok(r.iter().map(|v| v * v).sum::<f64>().sqrt())
        }
    }

    #[test]
    fn converges_on_mild_nonlinearity() {
        for refresh in [true, false] {
            let opts = ShootingOptions { refresh_jacobian: refresh, tol: 1e-12, ..Default::default() };
            let sol = solve(&Quadratic, &[0.0, 0.0], &opts).unwrap();
            assert!(sol.converged && sol.residual_norm <= 1e-12, "{sol:?}");
            assert!(sol.iterations <= 15);
        }
    }

    #[test]
    fn already_solved_takes_no_iterations() {
        let root = solve(&Quadratic, &[0.0, 0.0], &ShootingOptions { tol: 1e-12, ..Default::default() }).unwrap();
        let sol = solve(&Quadratic, &root.x, &ShootingOptions { tol: 1e-11, ..Default::default() }).unwrap();
        assert_eq!(sol.iterations, 0);
        assert!(sol.converged);
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let err = solve(&Singular, &[0.0, 0.0], &ShootingOptions::default()).unwrap_err();
        assert!(matches!(err, Error::PossiblyConjugate { .. }));
    }

    #[test]
    fn iteration_cap_is_not_an_error() {
        let opts = ShootingOptions { max_iter: 1, tol: 1e-15, refresh_jacobian: true, ..Default::default() };
        let sol = solve(&Quadratic, &[5.0, -3.0], &opts).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations, 1);
    }
}
