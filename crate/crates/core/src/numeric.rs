//! Reduction helpers whose result does not depend on the rayon thread count.

use rayon::prelude::*;

const LEAF: usize = 256;

/// Pairwise (cascade) summation over a fixed binary tree.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    let (a, b) = values.split_at(mid);
    if values.len() >= 1 << 15 {
        let (x, y) = rayon::join(|| pairwise_sum(a), || pairwise_sum(b));
        x + y
    } else {
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// Dot product with the same fixed tree as [`pairwise_sum`].
pub(crate) fn pairwise_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= LEAF {
        return a.iter().zip(b).map(|(x, y)| x * y).sum();
    }
    let mid = a.len() / 2;
    let (a0, a1) = a.split_at(mid);
    let (b0, b1) = b.split_at(mid);
    if a.len() >= 1 << 15 {
        let (x, y) = rayon::join(|| pairwise_dot(a0, b0), || pairwise_dot(a1, b1));
        x + y
    } else {
        pairwise_dot(a0, b0) + pairwise_dot(a1, b1)
    }
}

/// Parallel map over indices, collected in index order.
pub(crate) fn par_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}
