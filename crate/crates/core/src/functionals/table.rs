//! Pair sums grouped by the exact value of a per-pair key.

use crate::parallel::{map_indexed, BLOCK_ROWS};
use crate::space::MetricMeasureSpace;

/// Default cap on distinct keys; beyond it callers fall back to direct sums.
pub(crate) const TABLE_CAP: usize = 1 << 20;

/// Σ_{x≠y} a(x, y) w(x) w(y) split by the key k(x, y), sorted by key.
/// A sum that depends on a parameter only through a function of the key
/// then costs one evaluation per distinct key.
pub(crate) struct PairTable {
    pub keys: Vec<f64>,
    pub vals: Vec<f64>,
}

impl PairTable {
    /// Σ_k vals[k] f(keys[k]) in ascending key order.
    pub fn eval(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.keys.iter().zip(&self.vals).map(|(&k, &a)| a * f(k)).sum()
    }
}

/// Builds the table from `term(x, y) = Some((key, a))`, with nonnegative
/// keys; None skips the pair. Returns None when there are more than `cap`
/// distinct keys.
pub(crate) fn pair_table<F>(space: &MetricMeasureSpace, term: F, cap: usize) -> Option<PairTable>
where
    F: Fn(usize, usize) -> Option<(f64, f64)> + Sync,
{
    let n = space.n();
    let w = space.weights();
    let tables: Vec<Option<Vec<(u64, f64)>>> = map_indexed(n.div_ceil(BLOCK_ROWS), |b| {
        let mut entries = Vec::new();
        for x in b * BLOCK_ROWS..((b + 1) * BLOCK_ROWS).min(n) {
            for y in (0..n).filter(|&y| y != x) {
                if let Some((key, a)) = term(x, y) {
                    // nonnegative finite f64 bit patterns sort like the values
                    entries.push(((key + 0.0).to_bits(), a * w[x] * w[y]));
                }
            }
        }
        entries.sort_by_key(|e| e.0);
        let merged = merge_runs(entries);
        (merged.len() <= cap).then_some(merged)
    });
    let tables: Option<Vec<_>> = tables.into_iter().collect();
    let merged = tree_merge(tables?, cap)?;
    Some(PairTable {
        keys: merged.iter().map(|e| f64::from_bits(e.0)).collect(),
        vals: merged.iter().map(|e| e.1).collect(),
    })
}

/// Sums runs of equal keys in a key-sorted list, in list order.
fn merge_runs(sorted: Vec<(u64, f64)>) -> Vec<(u64, f64)> {
    let mut out: Vec<(u64, f64)> = Vec::new();
    for (k, v) in sorted {
        match out.last_mut() {
            Some(last) if last.0 == k => last.1 += v,
            _ => out.push((k, v)),
        }
    }
    out
}

/// Merges block tables with a binary tree whose shape depends only on the
/// number of blocks.
fn tree_merge(mut tables: Vec<Vec<(u64, f64)>>, cap: usize) -> Option<Vec<(u64, f64)>> {
    match tables.len() {
        0 => Some(Vec::new()),
        1 => tables.pop(),
        len => {
            let right = tree_merge(tables.split_off(len / 2), cap)?;
            let left = tree_merge(tables, cap)?;
            let mut out = Vec::with_capacity(left.len() + right.len());
            let (mut i, mut j) = (0, 0);
            while i < left.len() || j < right.len() {
                if j == right.len() || (i < left.len() && left[i].0 < right[j].0) {
                    out.push(left[i]);
                    i += 1;
                } else if i == left.len() || right[j].0 < left[i].0 {
                    out.push(right[j]);
                    j += 1;
                } else {
                    out.push((left[i].0, left[i].1 + right[j].1));
                    i += 1;
                    j += 1;
                }
            }
            (out.len() <= cap).then_some(out)
        }
    }
}
