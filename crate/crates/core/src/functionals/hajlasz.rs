//! Minimal Hajłasz-type gradients: minimize Σ w g^p subject to
//! g(x) + g(y) ≥ |u(x) − u(y)| / d(x, y)^σ on pairs with d ≤ r.
//!
//! Projected gradient descent in the L²(w) geometry with step 1/k. The
//! projection onto the constraint polyhedron is computed by Hildreth's
//! row-action method (per-pair repair with nonnegative multipliers), with
//! multipliers carried over between iterations. A final multiplier-free
//! repair pass only raises values, so the returned iterate is feasible.

use serde::Serialize;

use super::{pow_p, ScalarField};
use crate::error::{check_exponent, Error, Result};
use crate::space::MetricMeasureSpace;

/// Iterations without improvement over which the stop rule is measured.
const WINDOW: usize = 50;
const REL_TOL: f64 = 1e-8;
const MAX_SWEEPS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HajlaszOptions {
    pub max_iter: usize,
}

impl Default for HajlaszOptions {
    fn default() -> Self {
        Self { max_iter: 5000 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HajlaszResult {
    #[serde(skip)]
    pub g: ScalarField,
    pub objective: f64,
    pub initial_objective: f64,
    pub max_violation: f64,
    pub iterations: usize,
    pub converged: bool,
    pub constraints: usize,
}

struct Constraint {
    i: usize,
    j: usize,
    c: f64,
    /// 1/w_i + 1/w_j
    inv_sum: f64,
}

pub fn hajlasz_minimal(
    space: &MetricMeasureSpace,
    u: &ScalarField,
    p: f64,
    sigma: f64,
    r: f64,
) -> Result<HajlaszResult> {
    hajlasz_minimal_with(space, u, p, sigma, r, HajlaszOptions::default())
}

pub fn hajlasz_minimal_with(
    space: &MetricMeasureSpace,
    u: &ScalarField,
    p: f64,
    sigma: f64,
    r: f64,
    opts: HajlaszOptions,
) -> Result<HajlaszResult> {
    check_exponent(p)?;
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            value: sigma,
            reason: "fractional order must lie in (0, 1]",
        });
    }
    if !(r > 0.0) {
        return Err(Error::InvalidParameter {
            name: "r",
            value: r,
            reason: "cutoff must be positive",
        });
    }
    u.check_len(space)?;
    let n = space.n();
    let w = space.weights();
    let v = u.values();
    let mut cons = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = space.distance(i, j);
            let diff = (v[i] - v[j]).abs();
            if d <= r && diff > 0.0 {
                cons.push(Constraint {
                    i,
                    j,
                    c: diff / d.powf(sigma),
                    inv_sum: 1.0 / w[i] + 1.0 / w[j],
                });
            }
        }
    }
    let objective = |g: &[f64]| -> f64 { g.iter().zip(w).map(|(&x, &wx)| wx * pow_p(x, p)).sum() };

    let mut g = vec![0.0f64; n];
    for k in &cons {
        g[k.i] = g[k.i].max(k.c);
        g[k.j] = g[k.j].max(k.c);
    }
    let initial_objective = objective(&g);
    let mut best = (initial_objective, g.clone());
    let mut history = vec![initial_objective];
    let mut lambda = vec![0.0; cons.len()];
    let mut nu = vec![0.0; n];
    let mut converged = cons.is_empty();
    let mut iterations = 0;

    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let step = 1.0 / iterations as f64;
        let z: Vec<f64> = g
            .iter()
            .map(|&x| x - step * p * if p == 1.0 { 1.0 } else { pow_p(x, p - 1.0) })
            .collect();
        g = project(&z, w, &cons, &mut lambda, &mut nu);
        repair(&mut g, w, &cons);
        let f = objective(&g);
        if f < best.0 {
            best = (f, g.clone());
        }
        history.push(best.0);
        if history.len() > WINDOW {
            let old = history[history.len() - 1 - WINDOW];
            converged = (old - best.0).abs() <= REL_TOL * best.0.abs().max(f64::MIN_POSITIVE);
        }
    }

    let (objective, g) = best;
    let max_violation = cons
        .iter()
        .map(|k| (k.c - g[k.i] - g[k.j]).max(0.0))
        .fold(0.0, f64::max);
    Ok(HajlaszResult {
        g: ScalarField::computed(g, "hajlasz gradient"),
        objective,
        initial_objective,
        max_violation,
        iterations,
        converged,
        constraints: cons.len(),
    })
}

/// L²(w) projection of z onto {g_i + g_j ≥ c_ij, g ≥ 0} by Hildreth's
/// method, warm-started from the given multipliers.
fn project(z: &[f64], w: &[f64], cons: &[Constraint], lambda: &mut [f64], nu: &mut [f64]) -> Vec<f64> {
    let mut g = z.to_vec();
    for (k, l) in cons.iter().zip(lambda.iter()) {
        g[k.i] += l / w[k.i];
        g[k.j] += l / w[k.j];
    }
    for (i, l) in nu.iter().enumerate() {
        g[i] += l / w[i];
    }
    let scale = z.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
    for _ in 0..MAX_SWEEPS {
        let mut moved = 0.0f64;
        for (k, l) in cons.iter().zip(lambda.iter_mut()) {
            let theta = (k.c - g[k.i] - g[k.j]) / k.inv_sum;
            let next = (*l + theta).max(0.0);
            let delta = next - *l;
            if delta != 0.0 {
                g[k.i] += delta / w[k.i];
                g[k.j] += delta / w[k.j];
                *l = next;
                moved = moved.max(delta.abs() * k.inv_sum);
            }
        }
        for (i, l) in nu.iter_mut().enumerate() {
            let next = (*l - g[i] * w[i]).max(0.0);
            let delta = next - *l;
            if delta != 0.0 {
                g[i] += delta / w[i];
                *l = next;
                moved = moved.max((delta / w[i]).abs());
            }
        }
        if moved <= 1e-11 * scale {
            break;
        }
    }
    g
}

/// Raises values until every constraint holds; never lowers anything, so
/// constraints repaired earlier stay satisfied.
fn repair(g: &mut [f64], w: &[f64], cons: &[Constraint]) {
    for x in g.iter_mut() {
        *x = x.max(0.0);
    }
    for k in cons {
        let deficit = k.c - g[k.i] - g[k.j];
        if deficit > 0.0 {
            let theta = deficit / k.inv_sum;
            g[k.i] += theta / w[k.i];
            g[k.j] += theta / w[k.j];
            // absorb rounding in the sum
            let rest = k.c - g[k.i] - g[k.j];
            if rest > 0.0 {
                g[k.i] += rest;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::Provenance;

    fn field(v: Vec<f64>) -> ScalarField {
        ScalarField::new(v, Provenance::Operation("test".into())).unwrap()
    }

    #[test]
    fn two_point_optimum() {
        let s = MetricMeasureSpace::from_matrix("two", vec![0.0, 1.0, 1.0, 0.0], vec![0.5, 0.5]).unwrap();
        let res = hajlasz_minimal(&s, &field(vec![0.0, 1.0]), 2.0, 1.0, f64::INFINITY).unwrap();
        assert!((res.objective - 0.25).abs() < 1e-12);
        assert!(res.g.values().iter().all(|&x| (x - 0.5).abs() < 1e-9));
        assert!(res.max_violation <= 1e-10);
        assert!(res.converged);
    }

    #[test]
    fn constant_field_gives_zero() {
        let s = MetricMeasureSpace::from_matrix("two", vec![0.0, 1.0, 1.0, 0.0], vec![0.5, 0.5]).unwrap();
        let res = hajlasz_minimal(&s, &field(vec![2.0, 2.0]), 2.0, 1.0, 1.0).unwrap();
        assert_eq!(res.objective, 0.0);
        assert_eq!(res.g.values(), &[0.0, 0.0]);
    }
}
