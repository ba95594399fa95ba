//! Data-parallel helpers. With the `parallel` feature the work is spread over
//! the current rayon pool; without it every helper runs a plain sequential loop.
//! Both paths return identical results: outputs are collected in index order
//! and reductions are element-wise minima.

use crate::error::Result;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, collecting results in index order.
pub fn try_map_range<R, F>(n: usize, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize) -> Result<R> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Evaluates `f` for every index in `0..n`; each call yields a vector of
/// length `width`. Returns the element-wise minimum over all calls.
pub fn try_min_reduce<F>(n: usize, width: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(usize) -> Result<Vec<f64>> + Sync + Send,
{
    let identity = || vec![f64::INFINITY; width];
    #[cfg(feature = "parallel")]
    {
        (0..n)
            .into_par_iter()
            .map(f)
            .try_fold(identity, |acc, row| row.map(|r| elementwise_min(acc, r)))
            .try_reduce(identity, |a, b| Ok(elementwise_min(a, b)))
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).try_fold(identity(), |acc, i| Ok(elementwise_min(acc, f(i)?)))
    }
}

fn elementwise_min(mut acc: Vec<f64>, other: Vec<f64>) -> Vec<f64> {
    for (a, b) in acc.iter_mut().zip(other) {
        if b < *a {
            *a = b;
        }
    }
    acc
}

/// Whether the crate was built with the rayon backend.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
