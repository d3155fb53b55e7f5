use serde::Serialize;

use super::MetricMeasureSpace;
use crate::error::Result;
use crate::kernel::{pair_rho, KernelSpec};
use crate::parallel::map_indexed;

/// Doubling ratios above this are reported as non-doubling-like.
pub const NON_DOUBLING_THRESHOLD: f64 = 64.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingReport {
    /// sup over x and realized r of μ(B̄(x, 2r)) / μ(B̄(x, r)).
    pub c_d_hat: f64,
    /// (x, r) attaining `c_d_hat`.
    pub witness: (usize, f64),
    /// max(sup ρ/ρ1, sup ρ1/ρ) over off-diagonal pairs, when a kernel was given.
    pub c_rho_hat: Option<f64>,
    pub rho_witness: Option<(usize, usize)>,
    pub non_doubling_like: bool,
}

/// Exact doubling constant of the space. Ball masses are step functions of
/// the radius, so the ratio only needs checking at r ∈ {d(x,y)} ∪ {d(x,y)/2}.
pub fn doubling_constant(space: &MetricMeasureSpace) -> DoublingReport {
    let idx = space.ball_index();
    let per_point = map_indexed(space.n(), |x| {
        let mut best = (1.0, 0.0);
        for &d in idx.sorted_distances(x) {
            for r in [d / 2.0, d] {
                let ratio = idx.measure(x, 2.0 * r) / idx.measure(x, r);
                if ratio > best.0 {
                    best = (ratio, r);
                }
            }
        }
        best
    });
    let mut c_d_hat = 1.0;
    let mut witness = (0, 0.0);
    for (x, &(ratio, r)) in per_point.iter().enumerate() {
        if ratio > c_d_hat {
            c_d_hat = ratio;
            witness = (x, r);
        }
    }
    DoublingReport {
        c_d_hat,
        witness,
        c_rho_hat: None,
        rho_witness: None,
        non_doubling_like: c_d_hat > NON_DOUBLING_THRESHOLD,
    }
}

/// Doubling report together with the comparability constant of `kernel`
/// against ρ1.
pub fn kernel_comparability(space: &MetricMeasureSpace, kernel: &KernelSpec) -> Result<DoublingReport> {
    let rho = pair_rho(space, kernel)?;
    let idx = space.ball_index();
    let n = space.n();
    let per_point = map_indexed(n, |x| {
        let mut best = (1.0, usize::MAX);
        for y in (0..n).filter(|&y| y != x) {
            let r = rho.get(x, y);
            let r1 = idx.rho1(x, y);
            let ratio = (r / r1).max(r1 / r);
            if ratio > best.0 {
                best = (ratio, y);
            }
        }
        best
    });
    let mut c_rho = 1.0;
    let mut pair = (0, 1);
    for (x, &(ratio, y)) in per_point.iter().enumerate() {
        if ratio > c_rho {
            c_rho = ratio;
            pair = (x, y);
        }
    }
    let mut report = doubling_constant(space);
    report.c_rho_hat = Some(c_rho);
    report.rho_witness = Some(pair);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{build_space, SpaceSpec};

    /// Brute force over every x and every r in the realized set, without the
    /// index.
    fn brute_doubling(s: &MetricMeasureSpace) -> f64 {
        let n = s.n();
        let mass = |x: usize, r: f64| -> f64 { (0..n).filter(|&y| s.distance(x, y) <= r).map(|y| s.weight(y)).sum() };
        let mut best: f64 = 1.0;
        for x in 0..n {
            for y in 0..n {
                let d = s.distance(x, y);
                for r in [d, d / 2.0] {
                    best = best.max(mass(x, 2.0 * r) / mass(x, r));
                }
            }
        }
        best
    }

    #[test]
    fn circle_eight_has_doubling_three() {
        let s = build_space(&SpaceSpec::Circle { n: 8 }).unwrap();
        let rep = doubling_constant(&s);
        assert!((rep.c_d_hat - 3.0).abs() < 1e-12);
        assert!((rep.c_d_hat - brute_doubling(&s)).abs() < 1e-12);
        assert!(!rep.non_doubling_like);
    }

    #[test]
    fn single_pair_space() {
        let s = MetricMeasureSpace::from_matrix("pair", vec![0.0, 1.0, 1.0, 0.0], vec![0.5, 0.5]).unwrap();
        // r = 1/2: B̄(x, 1/2) = {x}, B̄(x, 1) = both points
        assert_eq!(doubling_constant(&s).c_d_hat, 2.0);
    }

    #[test]
    fn dominated_star_is_flagged() {
        let n = 6;
        let edges = (1..n).map(|v| (0, v, 1.0)).collect();
        let mut weights = vec![1e-4; n];
        weights[0] = 1.0;
        let spec = SpaceSpec::Graph {
            n,
            edges,
            weights: Some(weights),
        };
        let s = build_space(&spec).unwrap();
        let rep = doubling_constant(&s);
        assert!(rep.non_doubling_like, "c_d = {}", rep.c_d_hat);
        assert!((rep.c_d_hat - brute_doubling(&s)).abs() < 1e-9 * rep.c_d_hat);
    }

    #[test]
    fn rho1_is_self_comparable() {
        let s = build_space(&SpaceSpec::interval(16)).unwrap();
        let rep = kernel_comparability(&s, &KernelSpec::Rho1).unwrap();
        assert_eq!(rep.c_rho_hat, Some(1.0));
    }

    #[test]
    fn ahlfors_on_interval_matches_brute_force() {
        let n = 64;
        let s = build_space(&SpaceSpec::interval(n)).unwrap();
        let rep = kernel_comparability(&s, &KernelSpec::Ahlfors(1.0)).unwrap();
        // interior pair at k cells: ρ1 = (2k+1)/n and d = k/n, so ρ1/d = 3 at k = 1
        let mut brute: f64 = 1.0;
        for x in 0..n {
            for y in 0..n {
                if x == y {
                    continue;
                }
                let d = s.distance(x, y);
                let r1: f64 = (0..n).filter(|&z| s.distance(x, z) <= d).map(|z| s.weight(z)).sum();
                brute = brute.max(r1 / d).max(d / r1);
            }
        }
        let c = rep.c_rho_hat.unwrap();
        assert!((c - brute).abs() < 1e-12 * brute);
        assert!((c - 3.0).abs() < 1e-12);
    }
}
