//! Execution strategy for the permutation searches.
//!
//! Every search is defined by a deterministic sequential order. Parallel
//! runs reduce by position in that order, never by completion order, so both
//! strategies return identical results.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How a search loop is executed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    /// Uses the rayon thread pool; identical to `Sequential` when the
    /// `parallel` feature is disabled.
    #[default]
    Parallel,
}

/// First `f(i)` that is `Some`, scanning `0..n` in order.
pub(crate) fn find_map_first<T, F>(n: usize, exec: Exec, f: F) -> Option<T>
where
    T: Send,
    F: Fn(usize) -> Option<T> + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => (0..n).into_par_iter().find_map_first(f),
        _ => (0..n).find_map(f),
    }
}

/// Smallest `f(i)` over `0..n`.
pub(crate) fn min_by_map<T, F>(n: usize, exec: Exec, f: F) -> Option<T>
where
    T: Ord + Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => (0..n).into_par_iter().map(f).min(),
        _ => (0..n).map(f).min(),
    }
}

/// `f` applied to each item, results in input order.
pub(crate) fn map_collect<I, T, F>(items: &[I], exec: Exec, f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Exec::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}
