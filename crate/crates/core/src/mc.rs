//! Parallel path loops with order-preserving collection.
//!
//! Results come back indexed by path so every reduction runs serially over
//! the same sequence, which keeps statistics bitwise identical for any
//! worker count.

use rayon::prelude::*;

pub fn run_paths<T, F>(n_paths: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    (0..n_paths as u64).into_par_iter().map(f).collect()
}

/// Like [`run_paths`] but stops at the first error (in path order).
pub fn try_run_paths<T, E, F>(n_paths: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    run_paths(n_paths, f).into_iter().collect()
}

/// Run `f` on a dedicated pool with `threads` workers (0 = rayon default).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
