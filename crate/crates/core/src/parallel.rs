//! Ordered parallel map over sample indices.

use rayon::prelude::*;

use crate::error::Result;

/// Evaluates `f(0..count)` on up to `workers` threads and returns the results
/// in index order. The first failing index (lowest, not first-to-finish) wins.
pub fn map_ordered<R, F>(count: usize, workers: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize) -> Result<R> + Sync + Send,
{
    let results: Vec<Result<R>> = if workers <= 1 {
        (0..count).map(&f).collect()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(|| (0..count).into_par_iter().map(&f).collect()),
            Err(_) => (0..count).into_par_iter().map(&f).collect(),
        }
    };
    results.into_iter().collect()
}
