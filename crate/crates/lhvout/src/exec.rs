//! Parallel execution helpers with bit-identical sequential fallbacks.
//!
//! Every helper fixes its work decomposition independently of the thread
//! count, so results are the same whether the `parallel` feature is enabled
//! or not. Floating-point accumulation uses a fixed midpoint-split tree with
//! a constant leaf size, making sums bit-stable across runs.

use std::ops::Range;

/// Leaf size of the fixed pairwise-summation tree.
const SUM_LEAF: usize = 64;
/// Below this many items a parallel split is not attempted.
const PAR_CUTOFF: usize = 1024;

/// Splits `0..total` into at most `target` contiguous ranges of near-equal size.
pub fn chunk_ranges(total: u64, target: usize) -> Vec<Range<u64>> {
    if total == 0 {
        return Vec::new();
    }
    let target = target.max(1) as u64;
    let n = target.min(total);
    let base = total / n;
    let rem = total % n;
    let mut out = Vec::with_capacity(n as usize);
    let mut start = 0;
    for i in 0..n {
        let len = base + u64::from(i < rem);
        out.push(start..start + len);
        start += len;
    }
    out
}

/// Applies `kernel` to every range and folds the results with `merge`.
///
/// `merge` must be associative and commutative (tie-breaks included) for the
/// result to be independent of the thread count.
pub fn reduce_ranges<T, K, M>(ranges: Vec<Range<u64>>, kernel: K, merge: M) -> Option<T>
where
    T: Send,
    K: Fn(Range<u64>) -> T + Sync,
    M: Fn(T, T) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        ranges.into_par_iter().map(&kernel).reduce_with(&merge)
    }
    #[cfg(not(feature = "parallel"))]
    {
        reduce_ranges_seq(ranges, kernel, merge)
    }
}

/// Sequential variant of [`reduce_ranges`] (always compiled; used by benches).
pub fn reduce_ranges_seq<T, K, M>(ranges: Vec<Range<u64>>, kernel: K, merge: M) -> Option<T>
where
    K: Fn(Range<u64>) -> T,
    M: Fn(T, T) -> T,
{
    ranges.into_iter().map(kernel).reduce(merge)
}

/// Maps `f` over `0..n`, preserving index order in the output.
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential variant of [`map_collect`].
pub fn map_collect_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Accumulates `n_terms` vectors of length `dim` over a fixed summation tree.
///
/// `add_term(i, buf)` must add term `i` into `buf`. The tree splits ranges at
/// their midpoint down to leaves of [`SUM_LEAF`] terms, so the result is
/// bitwise identical for the parallel and sequential paths.
pub fn pairwise_sum<F>(n_terms: usize, dim: usize, add_term: &F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    sum_node(0..n_terms, dim, add_term, cfg!(feature = "parallel"))
}

/// Sequential variant of [`pairwise_sum`]; same tree, same bits.
#[cfg(test)]
pub fn pairwise_sum_seq<F>(n_terms: usize, dim: usize, add_term: &F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    sum_node(0..n_terms, dim, add_term, false)
}

fn sum_node<F>(range: Range<usize>, dim: usize, add_term: &F, parallel: bool) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let len = range.len();
    if len <= SUM_LEAF {
        let mut buf = vec![0.0; dim];
        for i in range {
            add_term(i, &mut buf);
        }
        return buf;
    }
    let mid = range.start + len / 2;
    let (left, right) = (range.start..mid, mid..range.end);
    let (a, b) = if parallel && len >= PAR_CUTOFF {
        #[cfg(feature = "parallel")]
        {
            rayon::join(
                || sum_node(left, dim, add_term, true),
                || sum_node(right, dim, add_term, true),
            )
        }
        #[cfg(not(feature = "parallel"))]
        {
            unreachable!()
        }
    } else {
        (
            sum_node(left, dim, add_term, parallel),
            sum_node(right, dim, add_term, parallel),
        )
    };
    let mut a = a;
    for (ai, bi) in a.iter_mut().zip(&b) {
        *ai += bi;
    }
    a
}
