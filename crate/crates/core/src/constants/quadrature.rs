//! Composite Gauss–Legendre rules.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Base order of every panel rule.
pub const ORDER: usize = 64;

/// Levels of geometric refinement toward each panel endpoint.
const GRADING_LEVELS: u32 = 40;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes and weights on [-1, 1] by Newton iteration on P_n.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// Returns (P_n(x), P_n'(x)).
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

pub fn rule(order: usize) -> &'static GaussLegendre {
    static R64: OnceLock<GaussLegendre> = OnceLock::new();
    static R128: OnceLock<GaussLegendre> = OnceLock::new();
    match order {
        64 => R64.get_or_init(|| GaussLegendre::new(64)),
        128 => R128.get_or_init(|| GaussLegendre::new(128)),
        _ => panic!("only orders 64 and 128 are cached"),
    }
}

/// Integral over [a, b] with panels graded geometrically toward both ends,
/// suited to integrands with algebraic endpoint singularities such as
/// |cos θ|^p at θ = π/2.
pub fn graded<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, order: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let gl = rule(order);
    let half = 0.5 * (b - a);
    let mut total = 0.0;
    // left half, smallest panel first
    let mut lo = a;
    for k in (0..GRADING_LEVELS).rev() {
        let hi = a + half * 0.5f64.powi(k as i32);
        total += gl.integrate(f, lo, hi);
        lo = hi;
    }
    let mut hi = b;
    for k in (0..GRADING_LEVELS).rev() {
        let lo = b - half * 0.5f64.powi(k as i32);
        total += gl.integrate(f, lo, hi);
        hi = lo;
    }
    total
}

/// Graded integral summed over consecutive breakpoints, at base and doubled
/// order. Returns (value, |difference|) so callers can report an error
/// estimate.
pub fn piecewise<F: Fn(f64) -> f64>(f: &F, breaks: &[f64]) -> (f64, f64) {
    let mut coarse = 0.0;
    let mut fine = 0.0;
    for w in breaks.windows(2) {
        coarse += graded(f, w[0], w[1], ORDER);
        fine += graded(f, w[0], w[1], 2 * ORDER);
    }
    (fine, (fine - coarse).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_nodes_are_symmetric() {
        for n in [1, 2, 5, 64, 128] {
            let gl = GaussLegendre::new(n);
            let s: f64 = gl.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
            for i in 0..n {
                assert!((gl.nodes[i] + gl.nodes[n - 1 - i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_for_high_degree_polynomials() {
        let gl = rule(64);
        // x^126 is integrated exactly by a 64-point rule
        let v = gl.integrate(|x| x.powi(126), -1.0, 1.0);
        assert!((v - 2.0 / 127.0).abs() < 1e-14);
    }

    #[test]
    fn graded_handles_endpoint_singularity() {
        // ∫_0^1 x^1.5 dx = 0.4 with a non-smooth endpoint
        let v = graded(&|x: f64| x.powf(1.5), 0.0, 1.0, ORDER);
        assert!((v - 0.4).abs() < 1e-13);
        let v = graded(&|x: f64| x.sqrt(), 0.0, 1.0, ORDER);
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
    }
}
