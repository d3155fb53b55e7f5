//! Finite metric measure spaces.
//!
//! A space is a finite point set with a metric, positive point masses, and
//! (lazily) a per-point index of neighbors sorted by distance with prefix
//! sums of mass, which answers closed-ball queries in O(log n).

mod ball;
mod build;
mod doubling;
mod file;

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use ball::BallIndex;
pub use build::build_space;
pub use doubling::{doubling_constant, kernel_comparability, DoublingReport, NON_DOUBLING_THRESHOLD};
pub use file::{load_space, save_space, SpaceFile};

use crate::constants::ConvexBody;
use crate::error::{Error, Result};

/// Largest space stored with an explicit distance matrix.
pub const MATRIX_CAP: usize = 4096;

/// Neighbor count for spaces without a natural stencil.
pub const DEFAULT_KNN: usize = 4;

/// Generator for the bundled families of spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SpaceSpec {
    /// Cell-centered grid on [0, 1] with density x^alpha.
    Interval { n: usize, alpha: f64 },
    /// n equally spaced points on the unit-radius circle, arc-length metric.
    Circle { n: usize },
    /// Cell-centered grid on the flat unit torus.
    Torus2d { nx: usize, ny: usize },
    /// Cell-centered n×n grid on [0, 1]² with the gauge of `body` as metric.
    GaugeGrid { n: usize, body: ConvexBody },
    /// Weighted graph with geodesic distance; uniform unit total mass when
    /// `weights` is absent.
    Graph {
        n: usize,
        edges: Vec<(usize, usize, f64)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    /// Level-m graph approximation of the Sierpinski gasket.
    Sierpinski { level: u32 },
}

impl SpaceSpec {
    pub fn interval(n: usize) -> Self {
        SpaceSpec::Interval { n, alpha: 0.0 }
    }

    /// Same family at twice the resolution, if the family has one.
    pub fn refined(&self) -> Option<SpaceSpec> {
        Some(match self {
            SpaceSpec::Interval { n, alpha } => SpaceSpec::Interval {
                n: 2 * n,
                alpha: *alpha,
            },
            SpaceSpec::Circle { n } => SpaceSpec::Circle { n: 2 * n },
            SpaceSpec::Torus2d { nx, ny } => SpaceSpec::Torus2d { nx: 2 * nx, ny: 2 * ny },
            SpaceSpec::GaugeGrid { n, body } => SpaceSpec::GaugeGrid {
                n: 2 * n,
                body: body.clone(),
            },
            SpaceSpec::Sierpinski { level } => SpaceSpec::Sierpinski { level: level + 1 },
            SpaceSpec::Graph { .. } => return None,
        })
    }

    pub fn label(&self) -> String {
        match self {
            SpaceSpec::Interval { n, alpha } if *alpha == 0.0 => format!("interval:{n}"),
            SpaceSpec::Interval { n, alpha } => format!("interval:{n}:{alpha}"),
            SpaceSpec::Circle { n } => format!("circle:{n}"),
            SpaceSpec::Torus2d { nx, ny } => format!("torus2d:{nx}x{ny}"),
            SpaceSpec::GaugeGrid { n, .. } => format!("gauge_grid:{n}"),
            SpaceSpec::Graph { n, .. } => format!("graph:{n}"),
            SpaceSpec::Sierpinski { level } => format!("sierpinski:{level}"),
        }
    }
}

/// How pairwise distances are produced.
#[derive(Debug, Clone)]
pub(crate) enum Metric {
    Interval {
        n: usize,
    },
    Circle {
        n: usize,
        step: f64,
    },
    Torus {
        nx: usize,
        ny: usize,
    },
    Gauge {
        n: usize,
        body: ConvexBody,
    },
    Euclidean,
    /// Full row-major n×n matrix.
    Dense(Vec<f64>),
}

/// Coordinates stored as a flat array of `dim`-tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct Coords {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Coords {
    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

#[derive(Debug)]
pub struct MetricMeasureSpace {
    name: String,
    spec: Option<SpaceSpec>,
    metric: Metric,
    weights: Vec<f64>,
    coords: Option<Coords>,
    adjacency: Option<Vec<Vec<usize>>>,
    total_mass: f64,
    uniform: bool,
    knn: usize,
    ball: OnceLock<BallIndex>,
}

impl MetricMeasureSpace {
    pub(crate) fn new(
        name: String,
        spec: Option<SpaceSpec>,
        metric: Metric,
        weights: Vec<f64>,
        coords: Option<Coords>,
        adjacency: Option<Vec<Vec<usize>>>,
    ) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least 2 points, got {}",
                weights.len()
            )));
        }
        for (point, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::NonPositiveWeight { point, value });
            }
        }
        let uniform = weights.iter().all(|w| w.to_bits() == weights[0].to_bits());
        let total_mass = if uniform {
            weights.len() as f64 * weights[0]
        } else {
            ball::compensated_sum(weights.iter().copied())
        };
        Ok(Self {
            name,
            spec,
            metric,
            weights,
            coords,
            adjacency,
            total_mass,
            uniform,
            knn: DEFAULT_KNN,
            ball: OnceLock::new(),
        })
    }

    /// A space from an explicit symmetric distance matrix (row-major, n×n).
    pub fn from_matrix(name: &str, matrix: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let n = weights.len();
        if matrix.len() != n * n {
            return Err(Error::InvalidSpec(format!(
                "matrix has {} entries, expected {}",
                matrix.len(),
                n * n
            )));
        }
        if n > MATRIX_CAP {
            return Err(Error::TooLarge { n, cap: MATRIX_CAP });
        }
        validate_matrix(&matrix, n)?;
        let space = Self::new(name.into(), None, Metric::Dense(matrix), weights, None, None)?;
        space.check_triangle_sampled(200_000)?;
        Ok(space)
    }

    /// A space of points in R^dim with the Euclidean metric.
    pub fn from_points(name: &str, coords: Coords, weights: Vec<f64>) -> Result<Self> {
        if coords.data.len() != coords.dim * weights.len() {
            return Err(Error::InvalidSpec("coordinate count does not match weights".into()));
        }
        let space = Self::new(name.into(), None, Metric::Euclidean, weights, Some(coords), None)?;
        for i in 0..space.n() {
            for j in 0..i {
                if space.distance(i, j) <= 0.0 {
                    return Err(Error::InvalidDistance { a: j, b: i, value: 0.0 });
                }
            }
        }
        Ok(space)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spec(&self) -> Option<&SpaceSpec> {
        self.spec.as_ref()
    }

    pub fn n(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn coords(&self) -> Option<&Coords> {
        self.coords.as_ref()
    }

    pub fn set_knn(&mut self, k: usize) {
        self.knn = k.max(1);
    }

    pub fn check_point(&self, x: usize) -> Result<()> {
        if x < self.n() {
            Ok(())
        } else {
            Err(Error::UnknownPoint(x))
        }
    }

    /// d(i, j). Closed-form metrics are evaluated from integer offsets, so
    /// equal offsets give bit-identical distances and d(i, j) == d(j, i).
    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        match &self.metric {
            Metric::Interval { n } => i.abs_diff(j) as f64 / *n as f64,
            Metric::Circle { n, step } => {
                let k = i.abs_diff(j);
                k.min(n - k) as f64 * step
            }
            Metric::Torus { nx, ny } => {
                let (dx, dy) = torus_offsets(*nx, *ny, i, j);
                let dx = dx.unsigned_abs() as f64 / *nx as f64;
                let dy = dy.unsigned_abs() as f64 / *ny as f64;
                (dx * dx + dy * dy).sqrt()
            }
            Metric::Gauge { n, body } => {
                let (lo, hi) = if i < j { (i, j) } else { (j, i) };
                let dx = ((hi % n) as f64 - (lo % n) as f64) / *n as f64;
                let dy = ((hi / n) as f64 - (lo / n) as f64) / *n as f64;
                body.gauge(&[dx, dy])
            }
            Metric::Euclidean => {
                let c = self.coords.as_ref().expect("euclidean space has coordinates");
                c.point(i)
                    .iter()
                    .zip(c.point(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            }
            Metric::Dense(m) => m[i * self.n() + j],
        }
    }

    /// Displacement from the lower-indexed to the higher-indexed point,
    /// using the minimal image on the torus. None without coordinates.
    pub fn displacement(&self, i: usize, j: usize) -> Option<Vec<f64>> {
        let mut v = [0.0; 3];
        match self.displacement_into(i, j, &mut v) {
            0 => None,
            dim => Some(v[..dim].to_vec()),
        }
    }

    /// Non-allocating form of [`Self::displacement`]; returns the dimension
    /// written into `out`, or 0 when the space has no coordinates.
    #[inline]
    pub fn displacement_into(&self, i: usize, j: usize, out: &mut [f64; 3]) -> usize {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        match &self.metric {
            Metric::Torus { nx, ny } => {
                let (dx, dy) = torus_offsets(*nx, *ny, lo, hi);
                out[0] = dx as f64 / *nx as f64;
                out[1] = dy as f64 / *ny as f64;
                2
            }
            Metric::Circle { n, step } => {
                let k = (hi - lo) as i64;
                let n = *n as i64;
                let k = if 2 * k > n { k - n } else { k };
                out[0] = k as f64 * step;
                1
            }
            _ => match &self.coords {
                Some(c) if c.dim <= 3 => {
                    for (k, (a, b)) in c.point(hi).iter().zip(c.point(lo)).enumerate() {
                        out[k] = a - b;
                    }
                    c.dim
                }
                _ => 0,
            },
        }
    }

    /// The convex body defining the metric of a gauge grid.
    pub fn gauge_body(&self) -> Option<&ConvexBody> {
        match &self.metric {
            Metric::Gauge { body, .. } => Some(body),
            _ => None,
        }
    }

    pub fn ball_index(&self) -> &BallIndex {
        self.ball.get_or_init(|| BallIndex::build(self))
    }

    /// μ(B̄(x, r)), the mass of the closed ball.
    pub fn ball_measure(&self, x: usize, r: f64) -> Result<f64> {
        self.check_point(x)?;
        if !(r >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "r",
                value: r,
                reason: "radius must be nonnegative",
            });
        }
        Ok(self.ball_index().measure(x, r))
    }

    /// Smallest positive distance.
    pub fn min_distance(&self) -> f64 {
        match &self.metric {
            Metric::Interval { n } => 1.0 / *n as f64,
            Metric::Circle { step, .. } => *step,
            _ => {
                let n = self.n();
                crate::parallel::map_indexed(n, |i| {
                    (0..n)
                        .filter(|&j| j != i)
                        .map(|j| self.distance(i, j))
                        .fold(f64::INFINITY, f64::min)
                })
                .into_iter()
                .fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match &self.metric {
            Metric::Interval { n } => (*n - 1) as f64 / *n as f64,
            Metric::Circle { n, step } => (n / 2) as f64 * step,
            _ => {
                let n = self.n();
                crate::parallel::map_indexed(n, |i| (0..n).map(|j| self.distance(i, j)).fold(0.0, f64::max))
                    .into_iter()
                    .fold(0.0, f64::max)
            }
        }
    }

    /// Whether the space carries a natural stencil or graph structure along
    /// which discrete paths make sense.
    pub fn has_path_structure(&self) -> bool {
        !matches!(self.metric, Metric::Euclidean | Metric::Dense(_)) || self.adjacency.is_some()
    }

    /// Stencil neighbors on grids, edges on graphs, k nearest neighbors
    /// otherwise. Sorted ascending.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut out = match (&self.metric, &self.adjacency) {
            (_, Some(adj)) => adj[i].clone(),
            (Metric::Interval { n }, _) => {
                let mut v = Vec::with_capacity(2);
                if i > 0 {
                    v.push(i - 1);
                }
                if i + 1 < *n {
                    v.push(i + 1);
                }
                v
            }
            (Metric::Circle { n, .. }, _) => vec![(i + n - 1) % n, (i + 1) % n],
            (Metric::Torus { nx, ny }, _) => {
                let (ix, iy) = (i % nx, i / nx);
                vec![
                    iy * nx + (ix + nx - 1) % nx,
                    iy * nx + (ix + 1) % nx,
                    ((iy + ny - 1) % ny) * nx + ix,
                    ((iy + 1) % ny) * nx + ix,
                ]
            }
            (Metric::Gauge { n, .. }, _) => {
                let (ix, iy) = (i % n, i / n);
                let mut v = Vec::with_capacity(4);
                if ix > 0 {
                    v.push(i - 1);
                }
                if ix + 1 < *n {
                    v.push(i + 1);
                }
                if iy > 0 {
                    v.push(i - n);
                }
                if iy + 1 < *n {
                    v.push(i + n);
                }
                v
            }
            _ => {
                let idx = self.ball_index();
                idx.order(i)
                    .iter()
                    .map(|&j| j as usize)
                    .filter(|&j| j != i)
                    .take(self.knn)
                    .collect()
            }
        };
        out.sort_unstable();
        out.dedup();
        out.retain(|&j| j != i);
        out
    }

    /// Structured grid shape, used by the finite-difference evaluators.
    pub(crate) fn grid(&self) -> Option<Grid> {
        match (&self.metric, &self.spec) {
            (Metric::Interval { n }, _) => Some(Grid::Line {
                n: *n,
                h: 1.0 / *n as f64,
                periodic: false,
            }),
            (Metric::Circle { n, step }, _) => Some(Grid::Line {
                n: *n,
                h: *step,
                periodic: true,
            }),
            (Metric::Torus { nx, ny }, _) => Some(Grid::Plane {
                nx: *nx,
                ny: *ny,
                hx: 1.0 / *nx as f64,
                hy: 1.0 / *ny as f64,
                periodic: true,
            }),
            (Metric::Gauge { n, .. }, _) => Some(Grid::Plane {
                nx: *n,
                ny: *n,
                hx: 1.0 / *n as f64,
                hy: 1.0 / *n as f64,
                periodic: false,
            }),
            _ => None,
        }
    }

    /// Checks the triangle inequality on every triple when n is small and on
    /// `samples` seeded random triples otherwise.
    pub fn check_triangle_sampled(&self, samples: usize) -> Result<()> {
        use rand::{Rng, SeedableRng};
        let n = self.n();
        let check = |a: usize, b: usize, c: usize| -> Result<()> {
            let ac = self.distance(a, c);
            let via = self.distance(a, b) + self.distance(b, c);
            if ac > via * (1.0 + 1e-12) {
                Err(Error::TriangleViolation { a, b, c, ac, via })
            } else {
                Ok(())
            }
        };
        if n * n * n <= samples {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        check(a, b, c)?;
                    }
                }
            }
        } else {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x7472_6961);
            for _ in 0..samples {
                check(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum Grid {
    Line {
        n: usize,
        h: f64,
        periodic: bool,
    },
    Plane {
        nx: usize,
        ny: usize,
        hx: f64,
        hy: f64,
        periodic: bool,
    },
}

/// Signed minimal-image offsets (in cells) from point i to point j.
fn torus_offsets(nx: usize, ny: usize, i: usize, j: usize) -> (i64, i64) {
    let wrap = |a: usize, b: usize, m: usize| -> i64 {
        let d = b as i64 - a as i64;
        let m = m as i64;
        let d = d.rem_euclid(m);
        if 2 * d > m {
            d - m
        } else {
            d
        }
    };
    (wrap(i % nx, j % nx, nx), wrap(i / nx, j / nx, ny))
}

pub(crate) fn validate_matrix(m: &[f64], n: usize) -> Result<()> {
    for a in 0..n {
        let d = m[a * n + a];
        if d != 0.0 {
            return Err(Error::InvalidDistance { a, b: a, value: d });
        }
        for b in (a + 1)..n {
            let ab = m[a * n + b];
            let ba = m[b * n + a];
            if ab.to_bits() != ba.to_bits() {
                return Err(Error::AsymmetricDistance { a, b, ab, ba });
            }
            if !(ab.is_finite() && ab > 0.0) {
                return Err(Error::InvalidDistance { a, b, value: ab });
            }
        }
    }
    Ok(())
}

pub(crate) fn circle_step(n: usize) -> f64 {
    2.0 * PI / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_offsets_wrap_to_minimal_image() {
        assert_eq!(torus_offsets(8, 8, 0, 7), (-1, 0));
        assert_eq!(torus_offsets(8, 8, 7, 0), (1, 0));
        assert_eq!(torus_offsets(8, 8, 0, 4 * 8), (0, 4));
    }

    #[test]
    fn matrix_validation_names_the_pair() {
        let m = vec![0.0, 1.0, 2.0, 0.0];
        match MetricMeasureSpace::from_matrix("bad", m, vec![1.0, 1.0]) {
            Err(Error::AsymmetricDistance { a: 0, b: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn matrix_triangle_violation_is_rejected() {
        #[rustfmt::skip]
        let m = vec![
            0.0, 1.0, 5.0,
            1.0, 0.0, 1.0,
            5.0, 1.0, 0.0,
        ];
        let err = MetricMeasureSpace::from_matrix("t", m, vec![1.0; 3]).unwrap_err();
        assert!(matches!(err, Error::TriangleViolation { .. }));
    }

    #[test]
    fn negative_weight_names_the_point() {
        let m = vec![0.0, 1.0, 1.0, 0.0];
        let err = MetricMeasureSpace::from_matrix("w", m, vec![1.0, -0.5]).unwrap_err();
        assert!(matches!(err, Error::NonPositiveWeight { point: 1, .. }));
    }
}
