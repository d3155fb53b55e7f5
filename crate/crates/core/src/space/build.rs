use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use super::{circle_step, Coords, Metric, MetricMeasureSpace, SpaceSpec, MATRIX_CAP};
use crate::error::{Error, Result};
use crate::parallel::map_indexed;

pub fn build_space(spec: &SpaceSpec) -> Result<MetricMeasureSpace> {
    let name = spec.label();
    match spec {
        SpaceSpec::Interval { n, alpha } => {
            let n = at_least_two(*n)?;
            if !(alpha.is_finite() && *alpha > -1.0) {
                return Err(Error::InvalidParameter {
                    name: "alpha",
                    value: *alpha,
                    reason: "weight exponent must exceed -1",
                });
            }
            let xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
            let weights = if *alpha == 0.0 {
                vec![1.0 / n as f64; n]
            } else {
                xs.iter().map(|x| x.powf(*alpha) / n as f64).collect()
            };
            MetricMeasureSpace::new(
                name,
                Some(spec.clone()),
                Metric::Interval { n },
                weights,
                Some(Coords { dim: 1, data: xs }),
                None,
            )
        }
        SpaceSpec::Circle { n } => {
            let n = at_least_two(*n)?;
            let step = circle_step(n);
            let angles = (0..n).map(|i| i as f64 * step).collect();
            MetricMeasureSpace::new(
                name,
                Some(spec.clone()),
                Metric::Circle { n, step },
                vec![step; n],
                Some(Coords { dim: 1, data: angles }),
                None,
            )
        }
        SpaceSpec::Torus2d { nx, ny } => {
            let (nx, ny) = (at_least_two(*nx)?, at_least_two(*ny)?);
            let coords = cell_centers(nx, ny);
            let n = nx * ny;
            MetricMeasureSpace::new(
                name,
                Some(spec.clone()),
                Metric::Torus { nx, ny },
                vec![1.0 / n as f64; n],
                Some(coords),
                None,
            )
        }
        SpaceSpec::GaugeGrid { n, body } => {
            let n = at_least_two(*n)?;
            body.validate()?;
            if body.dim() != 2 {
                return Err(Error::UnsupportedDimension(body.dim()));
            }
            MetricMeasureSpace::new(
                name,
                Some(spec.clone()),
                Metric::Gauge { n, body: body.clone() },
                vec![1.0 / (n * n) as f64; n * n],
                Some(cell_centers(n, n)),
                None,
            )
        }
        SpaceSpec::Graph { n, edges, weights } => {
            let n = at_least_two(*n)?;
            let weights = match weights {
                Some(w) if w.len() != n => {
                    return Err(Error::InvalidSpec(format!(
                        "graph has {n} vertices but {} weights",
                        w.len()
                    )))
                }
                Some(w) => w.clone(),
                None => vec![1.0 / n as f64; n],
            };
            let adjacency = adjacency_from_edges(n, edges)?;
            let matrix = geodesic_matrix(&adjacency)?;
            MetricMeasureSpace::new(
                name,
                Some(spec.clone()),
                Metric::Dense(matrix),
                weights,
                None,
                Some(adjacency.iter().map(|a| a.iter().map(|e| e.0).collect()).collect()),
            )
        }
        SpaceSpec::Sierpinski { level } => {
            let g = sierpinski(*level)?;
            let n = g.coords.len() / 2;
            let scale = 0.5f64.powi(*level as i32);
            let adjacency = g.adjacency;
            let hops = hop_matrix(&adjacency);
            let matrix = hops.into_iter().map(|h| h as f64 * scale).collect();
            MetricMeasureSpace::new(
                name,
                Some(spec.clone()),
                Metric::Dense(matrix),
                vec![1.0 / n as f64; n],
                Some(Coords { dim: 2, data: g.coords }),
                Some(adjacency),
            )
        }
    }
}

fn at_least_two(n: usize) -> Result<usize> {
    if n >= 2 {
        Ok(n)
    } else {
        Err(Error::InvalidSpec(format!("need n >= 2, got {n}")))
    }
}

fn cell_centers(nx: usize, ny: usize) -> Coords {
    let mut data = Vec::with_capacity(2 * nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            data.push((ix as f64 + 0.5) / nx as f64);
            data.push((iy as f64 + 0.5) / ny as f64);
        }
    }
    Coords { dim: 2, data }
}

type WeightedAdjacency = Vec<Vec<(usize, f64)>>;

pub(crate) fn adjacency_from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<WeightedAdjacency> {
    if n > MATRIX_CAP {
        return Err(Error::TooLarge { n, cap: MATRIX_CAP });
    }
    let mut adj: WeightedAdjacency = vec![Vec::new(); n];
    for &(a, b, len) in edges {
        if a >= n {
            return Err(Error::UnknownPoint(a));
        }
        if b >= n {
            return Err(Error::UnknownPoint(b));
        }
        if a == b || !(len.is_finite() && len > 0.0) {
            return Err(Error::InvalidDistance { a, b, value: len });
        }
        adj[a].push((b, len));
        adj[b].push((a, len));
    }
    for list in &mut adj {
        list.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.total_cmp(&y.1)));
        // keep the shortest of parallel edges
        list.dedup_by_key(|e| e.0);
    }
    Ok(adj)
}

/// All-pairs geodesic distances by Dijkstra from every source. Only the
/// upper triangle is taken from the runs and mirrored, so the matrix is
/// exactly symmetric.
pub(crate) fn geodesic_matrix(adj: &WeightedAdjacency) -> Result<Vec<f64>> {
    let n = adj.len();
    let rows = map_indexed(n, |src| dijkstra(adj, src));
    if let Some(vertex) = rows[0].iter().position(|d| d.is_infinite()) {
        return Err(Error::Disconnected { vertex });
    }
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            m[i * n + j] = rows[i][j];
            m[j * n + i] = rows[i][j];
        }
    }
    Ok(m)
}

fn dijkstra(adj: &WeightedAdjacency, src: usize) -> Vec<f64> {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Reverse((OrdF64(0.0), src)));
    while let Some(Reverse((OrdF64(d), v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, len) in &adj[v] {
            let nd = d + len;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Reverse((OrdF64(nd), w)));
            }
        }
    }
    dist
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Hop counts between all pairs of an unweighted connected graph.
fn hop_matrix(adj: &[Vec<usize>]) -> Vec<u32> {
    let n = adj.len();
    let rows = map_indexed(n, |src| {
        let mut hops = vec![u32::MAX; n];
        let mut queue = VecDeque::from([src]);
        hops[src] = 0;
        while let Some(v) = queue.pop_front() {
            for &w in &adj[v] {
                if hops[w] == u32::MAX {
                    hops[w] = hops[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        hops
    });
    rows.concat()
}

struct Gasket {
    coords: Vec<f64>,
    adjacency: Vec<Vec<usize>>,
}

/// Level-m gasket graph. Vertices live on the triangular lattice
/// a·(1, 0) + b·(1/2, √3/2) with integer (a, b) and side 2^m.
fn sierpinski(level: u32) -> Result<Gasket> {
    if level > 7 {
        // level 8 has 9843 vertices, past the matrix cap
        let n = (3usize.pow(level + 1) + 3) / 2;
        return Err(Error::TooLarge { n, cap: MATRIX_CAP });
    }
    let mut edges = BTreeSet::new();
    let mut stack = vec![(0i64, 0i64, 1i64 << level)];
    while let Some((a, b, s)) = stack.pop() {
        if s == 1 {
            let corners = [(a, b), (a + 1, b), (a, b + 1)];
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let (p, q) = (corners[i], corners[j]);
                    edges.insert(if p < q { (p, q) } else { (q, p) });
                }
            }
        } else {
            let h = s / 2;
            stack.push((a, b, h));
            stack.push((a + h, b, h));
            stack.push((a, b + h, h));
        }
    }
    let vertices: BTreeSet<(i64, i64)> = edges.iter().flat_map(|&(p, q)| [p, q]).collect();
    let id: BTreeMap<(i64, i64), usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adjacency = vec![Vec::new(); vertices.len()];
    for (p, q) in &edges {
        adjacency[id[p]].push(id[q]);
        adjacency[id[q]].push(id[p]);
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    let side = (1i64 << level) as f64;
    let h = 3f64.sqrt() / 2.0;
    let coords = vertices
        .iter()
        .flat_map(|&(a, b)| [(a as f64 + 0.5 * b as f64) / side, h * b as f64 / side])
        .collect();
    Ok(Gasket { coords, adjacency })
}
