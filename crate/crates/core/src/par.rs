//! Deterministic helpers for the data-parallel loops.
//!
//! Every Monte-Carlo loop in this crate is an indexed map over paths or
//! batches followed by an order-independent reduction. `indexed_map` runs
//! on rayon when the `parallel` feature is enabled and sequentially
//! otherwise; because each index owns its random stream and the reductions
//! below are fixed binary trees, results are bit-identical either way and
//! for any worker count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, always sequentially. Kept as a standalone entry
/// point so benchmarks can compare it against the parallel version.
pub fn indexed_map_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Maps `f` over `0..n` on the rayon pool (or sequentially without the
/// `parallel` feature). Output order matches the index order.
#[cfg(feature = "parallel")]
pub fn indexed_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn indexed_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    indexed_map_seq(n, f)
}

/// Runs `f` inside a dedicated pool with `n_threads` workers (0 = default).
/// Without the `parallel` feature, `f` simply runs on the calling thread.
#[cfg(feature = "parallel")]
pub fn with_threads<R, F>(n_threads: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    rayon::ThreadPoolBuilder::new()
        .num_threads(n_threads)
        .build()
        .expect("failed to build thread pool")
        .install(f)
}

#[cfg(not(feature = "parallel"))]
pub fn with_threads<R, F>(_n_threads: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    f()
}

const PAIRWISE_LEAF: usize = 16;

/// Pairwise (cascade) summation over a fixed binary tree. The tree shape
/// depends only on the slice length, so the result is independent of how
/// the values were produced.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    pairwise_sum_by(v, |x| x)
}

/// Pairwise summation of `f(v_i)`.
pub fn pairwise_sum_by<F>(v: &[f64], f: F) -> f64
where
    F: Fn(f64) -> f64 + Copy,
{
    if v.len() <= PAIRWISE_LEAF {
        return v.iter().map(|&x| f(x)).sum();
    }
    let mid = v.len() / 2;
    pairwise_sum_by(&v[..mid], f) + pairwise_sum_by(&v[mid..], f)
}

/// Maximum of a nonempty slice via the same fixed reduction tree.
pub fn pairwise_max(v: &[f64]) -> f64 {
    assert!(!v.is_empty(), "pairwise_max of empty slice");
    if v.len() <= PAIRWISE_LEAF {
        return v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
    let mid = v.len() / 2;
    pairwise_max(&v[..mid]).max(pairwise_max(&v[mid..]))
}
