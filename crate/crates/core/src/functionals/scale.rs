//! Energies and fields defined through balls of a fixed radius t.

use serde::Serialize;

use super::pair::pair_sum;
use super::{pow_p, EnergySpec, ScalarField};
use crate::error::{check_exponent, check_positive, Error, Result};
use crate::kernel::pair_rho;
use crate::parallel::{map_indexed, row_sum};
use crate::space::MetricMeasureSpace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaleEnergies {
    pub k: f64,
    pub h: f64,
    pub s: f64,
}

/// Which of the two equivalent formulas evaluates S_t.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SRoute {
    /// Σ_{x'} w(x') μ(B(x',t))^{-2} Σ_{x,y ∈ B(x',t)} w w |u(x)−u(y)|^p
    TripleLoop,
    /// Σ_{x,y} w w |u(x)−u(y)|^p f_t(x, y) with the x'-integral done first.
    Reformulated,
}

/// K_t, H_t and S_t at the radius `spec.t`, S_t by the triple loop.
pub fn scale_energies(space: &MetricMeasureSpace, u: &ScalarField, spec: &EnergySpec) -> Result<ScaleEnergies> {
    scale_energies_via(space, u, spec, SRoute::TripleLoop)
}

pub fn scale_energies_via(
    space: &MetricMeasureSpace,
    u: &ScalarField,
    spec: &EnergySpec,
    route: SRoute,
) -> Result<ScaleEnergies> {
    let t = spec.require("t", spec.t)?;
    u.check_len(space)?;
    let rho = pair_rho(space, &spec.kernel)?;
    let p = spec.p;
    let v = u.values();
    let k = pair_sum(space, |x, y| {
        if space.distance(x, y) > t {
            return 0.0;
        }
        pow_p((v[x] - v[y]).abs(), p) / rho.get(x, y)
    });
    let h = h_energy(space, v, p, t, t);
    let s = s_energy(space, v, p, t, route);
    Ok(ScaleEnergies { k, h, s })
}

/// Σ_{d(x,y) ≤ t} |u(x)−u(y)|^p / √(μB(x,R) μB(y,R)) w w. The proof's H′
/// uses R = 2t; the plain H_t uses R = t.
pub(crate) fn h_energy(space: &MetricMeasureSpace, v: &[f64], p: f64, t: f64, radius: f64) -> f64 {
    let idx = space.ball_index();
    let masses: Vec<f64> = (0..space.n()).map(|x| idx.measure(x, radius)).collect();
    let w = space.weights();
    row_sum(space.n(), |x| {
        let mut acc = 0.0;
        for &y in idx.members(x, t) {
            let y = y as usize;
            if y != x {
                acc += pow_p((v[x] - v[y]).abs(), p) / (masses[x] * masses[y]).sqrt() * w[y];
            }
        }
        acc * w[x]
    })
}

pub(crate) fn s_energy(space: &MetricMeasureSpace, v: &[f64], p: f64, t: f64, route: SRoute) -> f64 {
    let idx = space.ball_index();
    let w = space.weights();
    let n = space.n();
    match route {
        SRoute::TripleLoop => row_sum(n, |c| {
            let ball = idx.members(c, t);
            let m = idx.measure(c, t);
            let mut acc = 0.0;
            for &x in ball {
                let x = x as usize;
                let mut inner = 0.0;
                for &y in ball {
                    let y = y as usize;
                    inner += pow_p((v[x] - v[y]).abs(), p) * w[y];
                }
                acc += inner * w[x];
            }
            w[c] * acc / (m * m)
        }),
        SRoute::Reformulated => {
            let inv_m2: Vec<f64> = (0..n)
                .map(|c| {
                    let m = idx.measure(c, t);
                    1.0 / (m * m)
                })
                .collect();
            row_sum(n, |x| {
                let near = idx.members(x, t);
                let mut acc = 0.0;
                for &y in idx.members(x, 2.0 * t) {
                    let y = y as usize;
                    if y == x {
                        continue;
                    }
                    let diff = pow_p((v[x] - v[y]).abs(), p);
                    if diff == 0.0 {
                        continue;
                    }
                    // f_t(x, y) = Σ_{c ∈ B(x,t) ∩ B(y,t)} w(c) μ(B(c,t))^{-2}
                    let mut f = 0.0;
                    for &c in near {
                        let c = c as usize;
                        if space.distance(y, c) <= t {
                            f += w[c] * inv_m2[c];
                        }
                    }
                    acc += diff * f * w[y];
                }
                acc * w[x]
            })
        }
    }
}

/// (M_t u)(x): the w-average of u over the closed ball B̄(x, t).
pub fn mollify(space: &MetricMeasureSpace, u: &ScalarField, t: f64) -> Result<ScalarField> {
    check_positive("t", t)?;
    u.check_len(space)?;
    let idx = space.ball_index();
    let v = u.values();
    let w = space.weights();
    let out = map_indexed(space.n(), |x| {
        let sum: f64 = idx.members(x, t).iter().map(|&y| w[y as usize] * v[y as usize]).sum();
        sum / idx.measure(x, t)
    });
    Ok(ScalarField::computed(out, &format!("mollify t={t}")))
}

/// A piecewise-linear function given by breakpoints, constant beyond the
/// first and last.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    points: Vec<(f64, f64)>,
}

impl PiecewiseLinear {
    /// Builds φ and checks that it is 1-Lipschitz with values in [0, r].
    pub fn new(points: Vec<(f64, f64)>, r: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter {
                name: "phi",
                value: 0.0,
                reason: "needs at least one breakpoint",
            });
        }
        for (k, pair) in points.windows(2).enumerate() {
            let ((x0, y0), (x1, y1)) = (pair[0], pair[1]);
            if !(x1 > x0) {
                return Err(Error::InvalidParameter {
                    name: "phi",
                    value: x1,
                    reason: "breakpoints must be strictly increasing",
                });
            }
            if (y1 - y0).abs() > (x1 - x0) * (1.0 + 1e-12) {
                return Err(Error::NotLipschitz(k, k + 1));
            }
        }
        for &(_, y) in &points {
            if !(0.0..=r).contains(&y) {
                return Err(Error::InvalidParameter {
                    name: "phi",
                    value: y,
                    reason: "values must lie in [0, r]",
                });
            }
        }
        Ok(Self { points })
    }

    /// The identity clipped to [0, r].
    pub fn clip(r: f64) -> Result<Self> {
        Self::new(vec![(0.0, 0.0), (r, r)], r)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let pts = &self.points;
        if x <= pts[0].0 {
            return pts[0].1;
        }
        let last = pts[pts.len() - 1];
        if x >= last.0 {
            return last.1;
        }
        let k = pts.partition_point(|&(bx, _)| bx <= x);
        let (x0, y0) = pts[k - 1];
        let (x1, y1) = pts[k];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Numerator of the gradient-at-scale average.
#[derive(Debug, Clone, PartialEq)]
pub enum GMode {
    /// |(u(x) − u(y)) / t|^p
    Plain,
    /// min(|u(x) − u(y)|, r) / t; r = ∞ gives the first-power form.
    Truncated(f64),
    /// |φ(u(x)) − φ(u(y))| / t
    Composed(PiecewiseLinear),
}

/// g_t(x') = μ(B(x',t))^{-2} Σ_{x,y ∈ B(x',t)} numerator(x, y) w(x) w(y).
pub fn g_scale(space: &MetricMeasureSpace, u: &ScalarField, p: f64, t: f64, mode: &GMode) -> Result<ScalarField> {
    check_exponent(p)?;
    check_positive("t", t)?;
    u.check_len(space)?;
    let v: Vec<f64> = match mode {
        GMode::Composed(phi) => u.values().iter().map(|&x| phi.eval(x)).collect(),
        _ => u.values().to_vec(),
    };
    let num = |a: f64, b: f64| -> f64 {
        let diff = (a - b).abs();
        match mode {
            GMode::Plain => pow_p(diff / t, p),
            GMode::Truncated(r) => diff.min(*r) / t,
            GMode::Composed(_) => diff / t,
        }
    };
    let idx = space.ball_index();
    let w = space.weights();
    let out = map_indexed(space.n(), |c| {
        let ball = idx.members(c, t);
        let m = idx.measure(c, t);
        let mut acc = 0.0;
        for &x in ball {
            let x = x as usize;
            let mut inner = 0.0;
            for &y in ball {
                let y = y as usize;
                inner += num(v[x], v[y]) * w[y];
            }
            acc += inner * w[x];
        }
        acc / (m * m)
    });
    let label = match mode {
        GMode::Plain => format!("g plain t={t}"),
        GMode::Truncated(r) => format!("g truncated r={r} t={t}"),
        GMode::Composed(_) => format!("g composed t={t}"),
    };
    Ok(ScalarField::computed(out, &label))
}
