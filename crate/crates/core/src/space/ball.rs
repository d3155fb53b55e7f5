use super::MetricMeasureSpace;
use crate::parallel::map_indexed;

/// Per-point distance-sorted neighbor order with prefix-summed masses.
///
/// Row x lists every point sorted by (d(x, ·), id), so the closed ball
/// B̄(x, r) is a prefix of the row and its mass is a single lookup after a
/// binary search. The index also caches ρ1(x, y) = μ(B̄(x, d(x, y))) for all
/// pairs, since every kernel built from ball masses needs it.
#[derive(Debug)]
pub struct BallIndex {
    n: usize,
    order: Vec<u32>,
    sorted: Vec<f64>,
    prefix: Vec<f64>,
    rho1: Vec<f64>,
}

struct Row {
    order: Vec<u32>,
    sorted: Vec<f64>,
    prefix: Vec<f64>,
    rho1: Vec<f64>,
}

impl BallIndex {
    pub(crate) fn build(space: &MetricMeasureSpace) -> Self {
        let n = space.n();
        let weights = space.weights();
        let uniform = space.is_uniform().then(|| weights[0]);
        let rows = map_indexed(n, |x| {
            let mut order: Vec<u32> = (0..n as u32).collect();
            let dist: Vec<f64> = (0..n).map(|y| space.distance(x, y)).collect();
            order.sort_by(|&a, &b| dist[a as usize].total_cmp(&dist[b as usize]).then(a.cmp(&b)));
            let sorted: Vec<f64> = order.iter().map(|&y| dist[y as usize]).collect();
            let prefix: Vec<f64> = match uniform {
                // (k+1)·w keeps the last entry equal to total_mass exactly
                Some(w) => (0..n).map(|k| (k + 1) as f64 * w).collect(),
                None => {
                    let mut acc = Neumaier::default();
                    let mut prefix: Vec<f64> = order
                        .iter()
                        .map(|&y| {
                            acc.add(weights[y as usize]);
                            acc.value()
                        })
                        .collect();
                    prefix[n - 1] = space.total_mass();
                    prefix
                }
            };
            let mut rho1 = vec![0.0; n];
            let mut start = 0;
            while start < n {
                let mut end = start + 1;
                while end < n && sorted[end] == sorted[start] {
                    end += 1;
                }
                for &y in &order[start..end] {
                    rho1[y as usize] = prefix[end - 1];
                }
                start = end;
            }
            Row {
                order,
                sorted,
                prefix,
                rho1,
            }
        });
        let mut idx = BallIndex {
            n,
            order: Vec::with_capacity(n * n),
            sorted: Vec::with_capacity(n * n),
            prefix: Vec::with_capacity(n * n),
            rho1: Vec::with_capacity(n * n),
        };
        for row in rows {
            idx.order.extend(row.order);
            idx.sorted.extend(row.sorted);
            idx.prefix.extend(row.prefix);
            idx.rho1.extend(row.rho1);
        }
        idx
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn row(&self, x: usize) -> std::ops::Range<usize> {
        x * self.n..(x + 1) * self.n
    }

    /// Points sorted by distance from x (x itself first).
    pub fn order(&self, x: usize) -> &[u32] {
        &self.order[self.row(x)]
    }

    /// Distances from x in the order of [`BallIndex::order`].
    pub fn sorted_distances(&self, x: usize) -> &[f64] {
        &self.sorted[self.row(x)]
    }

    /// Prefix sums of mass in the order of [`BallIndex::order`].
    pub fn prefix(&self, x: usize) -> &[f64] {
        &self.prefix[self.row(x)]
    }

    /// Number of points in the closed ball B̄(x, r), r ≥ 0.
    pub fn count(&self, x: usize, r: f64) -> usize {
        self.sorted_distances(x).partition_point(|&d| d <= r)
    }

    /// Points of the closed ball B̄(x, r).
    pub fn members(&self, x: usize, r: f64) -> &[u32] {
        &self.order(x)[..self.count(x, r)]
    }

    /// μ(B̄(x, r)) for r ≥ 0.
    pub fn measure(&self, x: usize, r: f64) -> f64 {
        let k = self.count(x, r);
        self.prefix(x)[k.max(1) - 1]
    }

    /// ρ1(x, y) = μ(B̄(x, d(x, y))).
    #[inline]
    pub fn rho1(&self, x: usize, y: usize) -> f64 {
        self.rho1[x * self.n + y]
    }

    /// ρ2(x, y) = μ(B̄(y, d(x, y))) = ρ1(y, x).
    #[inline]
    pub fn rho2(&self, x: usize, y: usize) -> f64 {
        self.rho1[y * self.n + x]
    }
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub(crate) fn compensated_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let mut acc = Neumaier::default();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}
