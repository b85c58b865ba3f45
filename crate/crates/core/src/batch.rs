//! Fan-out of independent evaluations (sweep points, random parameter
//! samples) over a thread pool, with a sequential path when the `parallel`
//! feature is off or when asked for explicitly.
//!
//! Results always come back in input order, and the reported error is the
//! one from the earliest failing item, so output does not depend on
//! scheduling.

use crate::error::{Error, Result};

/// Environment variable capping the number of worker threads (0 or unset: all cores).
pub const THREADS_ENV: &str = "QTRANSFER_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// `threads == 0` uses the global pool.
    Parallel {
        threads: usize,
    },
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel { threads: 0 }
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// Default execution honouring [`THREADS_ENV`].
    pub fn from_env() -> Result<Self> {
        match std::env::var(THREADS_ENV) {
            Err(_) => Ok(Self::default()),
            Ok(v) if v.trim().is_empty() => Ok(Self::default()),
            Ok(v) => {
                let threads: usize = v.trim().parse().map_err(|_| {
                    Error::InvalidInput(format!("{THREADS_ENV}={v} is not a thread count"))
                })?;
                Ok(match Self::default() {
                    Execution::Sequential => Execution::Sequential,
                    Execution::Parallel { .. } if threads == 1 => Execution::Sequential,
                    Execution::Parallel { .. } => Execution::Parallel { threads },
                })
            }
        }
    }
}

fn first_error<R>(results: Vec<Result<R>>) -> Result<Vec<R>> {
    results.into_iter().collect()
}

/// Applies `f` to every item and returns the results in order.
pub fn try_map<T, R, F>(items: &[T], exec: Execution, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    match exec {
        Execution::Sequential => first_error(items.iter().map(&f).collect()),
        Execution::Parallel { threads } => parallel_map(items, threads, f),
    }
}

#[cfg(feature = "parallel")]
fn parallel_map<T, R, F>(items: &[T], threads: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    use rayon::prelude::*;

    let run = || items.par_iter().map(&f).collect::<Vec<_>>();
    let results = if threads == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot build thread pool: {e}")))?
            .install(run)
    };
    first_error(results)
}

#[cfg(not(feature = "parallel"))]
fn parallel_map<T, R, F>(items: &[T], _threads: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    first_error(items.iter().map(&f).collect())
}
