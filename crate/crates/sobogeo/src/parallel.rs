//! Thread pool for independent Jacobian columns and suite members.

use rayon::prelude::*;
use sobogeo_core::{ColumnExecutor, Result as CoreResult};

use crate::error::{Result, RunError};

pub const THREADS_VAR: &str = "SOBOGEO_THREADS";

/// Rayon pool sized by `SOBOGEO_THREADS` (default: hardware parallelism).
/// Results are collected in index order, so output does not depend on the
/// thread count.
pub struct Pool {
    pool: rayon::ThreadPool,
}

impl Pool {
    pub fn from_env() -> Result<Self> {
        let threads = match std::env::var(THREADS_VAR) {
            Ok(s) => match s.trim().parse::<usize>() {
                Ok(n) if n > 0 => n,
                _ => return Err(RunError::config(format!("{THREADS_VAR} must be a positive integer, got {s:?}"))),
            },
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        };
        Self::with_threads(threads)
    }

    pub fn with_threads(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| RunError::config(format!("thread pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    /// Ordered parallel map.
    pub fn map<T: Send, R: Send>(&self, items: Vec<T>, f: impl Fn(T) -> R + Sync + Send) -> Vec<R> {
        self.pool.install(|| items.into_par_iter().map(f).collect())
    }
}

impl ColumnExecutor for Pool {
    fn run(&self, count: usize, column: &(dyn Fn(usize) -> CoreResult<Vec<f64>> + Sync)) -> CoreResult<Vec<Vec<f64>>> {
        self.pool.install(|| (0..count).into_par_iter().map(column).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_keep_their_order() {
        let pool = Pool::with_threads(3).unwrap();
        let cols = pool.run(17, &|i| Ok(vec![i as f64; 2])).unwrap();
        assert!(cols.iter().enumerate().all(|(i, c)| c == &vec![i as f64; 2]));
        assert_eq!(pool.map(vec![3, 1, 2], |x| x * 10), vec![30, 10, 20]);
    }
}
