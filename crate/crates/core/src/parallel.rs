//! Deterministic parallel reductions.
//!
//! Rows are grouped into blocks of [`BLOCK_ROWS`] consecutive indices. Each
//! block is reduced sequentially, and block partials are combined by a
//! binary tree whose shape depends only on the number of blocks. The result
//! is therefore bit-identical for every worker count, including one.

use rayon::prelude::*;

/// Rows per reduction block. Part of the determinism contract: changing it
/// changes the low-order bits of every pair sum.
pub const BLOCK_ROWS: usize = 32;

/// Runs `f` inside a dedicated pool with `workers` threads.
pub fn with_workers<R, F>(workers: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("failed to build worker pool");
    pool.install(f)
}

fn tree_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        len => {
            let mid = len / 2;
            tree_sum(&xs[..mid]) + tree_sum(&xs[mid..])
        }
    }
}

fn block_bounds(n: usize, b: usize) -> std::ops::Range<usize> {
    let lo = b * BLOCK_ROWS;
    lo..(lo + BLOCK_ROWS).min(n)
}

/// Sums `row(i)` over `0..n`.
pub fn row_sum<F>(n: usize, row: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let blocks: Vec<f64> = (0..n.div_ceil(BLOCK_ROWS))
        .into_par_iter()
        .map(|b| {
            let mut acc = 0.0;
            for i in block_bounds(n, b) {
                acc += row(i);
            }
            acc
        })
        .collect();
    tree_sum(&blocks)
}

/// Vector-valued variant of [`row_sum`]: `row(i, acc)` adds its terms into
/// the `width`-long accumulator of the current block.
pub fn row_sum_vec<F>(n: usize, width: usize, row: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    let blocks: Vec<Vec<f64>> = (0..n.div_ceil(BLOCK_ROWS))
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![0.0; width];
            for i in block_bounds(n, b) {
                row(i, &mut acc);
            }
            acc
        })
        .collect();
    (0..width)
        .map(|k| {
            let column: Vec<f64> = blocks.iter().map(|acc| acc[k]).collect();
            tree_sum(&column)
        })
        .collect()
}

/// Order-preserving parallel map over `0..n`.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(f).collect()
}
