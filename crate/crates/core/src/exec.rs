//! Data-parallel execution helpers.
//!
//! With the `parallel` feature (default) the mapping helper runs on rayon's
//! ambient thread pool; without it it compiles to a plain sequential loop.
//! Both paths produce outputs in index order, and callers reduce those
//! outputs sequentially, so results are identical for any thread count.
//! `seq_map_indices` is the always-sequential reference the dispatch is
//! checked against.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, collecting results in index order.
#[cfg(feature = "parallel")]
pub fn map_indices<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..n`, collecting results in index order.
#[cfg(not(feature = "parallel"))]
pub fn map_indices<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    (0..n).map(f).collect()
}

/// Sequential counterpart of [`map_indices`], independent of feature flags.
pub fn seq_map_indices<U, F>(n: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..n).map(f).collect()
}
