//! Thread-count independent reductions.
//!
//! Work is cut into blocks whose boundaries depend only on the problem size.
//! Blocks are evaluated in parallel, collected in block order and then summed
//! by a fixed-shape pairwise tree, so the floating-point result is the same for
//! any number of rayon workers.

use std::ops::Add;

use rayon::prelude::*;

/// Pairwise (cascade) sum with a fixed tree shape.
pub fn pairwise_sum<T>(items: &[T]) -> T
where
    T: Copy + Default + Add<Output = T>,
{
    match items.len() {
        0 => T::default(),
        1 => items[0],
        n => {
            let mid = n / 2;
            pairwise_sum(&items[..mid]) + pairwise_sum(&items[mid..])
        }
    }
}

/// Evaluate `block(start, end)` over `[0, n)` cut into blocks of `block_len`
/// and reduce the partial results pairwise.
pub fn blocked_sum<T, F>(n: usize, block_len: usize, block: F) -> T
where
    T: Copy + Default + Add<Output = T> + Send,
    F: Fn(usize, usize) -> T + Sync,
{
    let block_len = block_len.max(1);
    let n_blocks = n.div_ceil(block_len);
    let partial: Vec<T> = (0..n_blocks)
        .into_par_iter()
        .map(|b| block(b * block_len, ((b + 1) * block_len).min(n)))
        .collect();
    pairwise_sum(&partial)
}

/// Parallel map that preserves order; a thin wrapper so call sites read the
/// same whether or not they reduce.
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// A pair of running sums, used for mean and variance in one pass.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub sum: f64,
    pub sum_sq: f64,
}

impl Add for Moments {
    type Output = Moments;

    fn add(self, rhs: Moments) -> Moments {
        Moments {
            sum: self.sum + rhs.sum,
            sum_sq: self.sum_sq + rhs.sum_sq,
        }
    }
}
