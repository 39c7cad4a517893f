//! Thin dispatch layer between the rayon data-parallel kernels and the
//! sequential fallback selected by `--no-default-features`.
//!
//! All reductions used here are order-independent (max, or writes to disjoint
//! slices), so both paths produce bitwise-identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Minimum items per rayon task; below this the split overhead dominates.
/// Work units routed through this module are coarse (quadratures, concave
/// maximizations, solver instances), so the threshold is small.
const MIN_CHUNK: usize = 4;

/// Maximum of `f(i)` over `0..n` (`f64::NEG_INFINITY` when `n == 0`).
pub(crate) fn max_over<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        (0..n)
            .into_par_iter()
            .with_min_len(MIN_CHUNK)
            .map(f)
            .reduce(|| f64::NEG_INFINITY, f64::max)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Map `f` over `0..n` collecting results in index order.
pub(crate) fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().with_min_len(MIN_CHUNK).map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
