//! Gradient-type bounds: the averaged field as an upper gradient of the
//! mollified function, and the minimal Hajłasz gradient against the slope.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Constants, Record, VerificationReport};
use crate::error::{check_exponent, check_positive, Error, Result};
use crate::functionals::{cheeger_surrogate, g_scale, hajlasz_minimal, mollify, path_integral, GMode, ScalarField};
use crate::space::{doubling_constant, MetricMeasureSpace};

/// Default bound on objective / slope energy.
pub const HAJLASZ_BUDGET: f64 = 100.0;

/// Allowed relative shift of that ratio under one refinement.
pub const HAJLASZ_SHIFT: f64 = 0.25;

const PATH_SEED: u64 = 0x7061_7468;

/// Shortest-path distances and predecessors along the neighbor graph, with
/// edge lengths d(a, b).
fn dijkstra(space: &MetricMeasureSpace, src: usize) -> (Vec<f64>, Vec<usize>) {
    let n = space.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    // nonnegative f64 bit patterns order like the values
    heap.push(Reverse((0u64, src)));
    while let Some(Reverse((bits, a))) = heap.pop() {
        if f64::from_bits(bits) > dist[a] {
            continue;
        }
        for b in space.neighbors(a) {
            let nd = dist[a] + space.distance(a, b);
            if nd < dist[b] {
                dist[b] = nd;
                prev[b] = a;
                heap.push(Reverse((nd.to_bits(), b)));
            }
        }
    }
    (dist, prev)
}

fn chain(prev: &[usize], end: usize) -> Vec<usize> {
    let mut path = vec![end];
    let mut at = end;
    while prev[at] != usize::MAX {
        at = prev[at];
        path.push(at);
    }
    path.reverse();
    path
}

/// Along sampled discrete geodesics γ from a to b,
/// |M_t u(a) − M_t u(b)| ≤ ∫_γ 4 c_D⁴ g_{2t}, with g_{2t} the first-power
/// averaged difference quotient. Half the samples have length in
/// [t/2, t], half in (t, 2t]; the worst ratio of each kind is recorded.
pub fn check_upper_gradient_scale(
    space: &MetricMeasureSpace,
    u: &ScalarField,
    t: f64,
    samples: usize,
) -> Result<VerificationReport> {
    check_positive("t", t)?;
    u.check_len(space)?;
    let c_d = doubling_constant(space).c_d_hat;
    let factor = 4.0 * c_d.powi(4);
    let constants = Constants::new(Some(c_d), None).with("4 c_D^4", factor);
    let item_short = "|M_t u(a)-M_t u(b)| <= int_gamma 4c_D^4 g_2t, len in [t/2,t]";
    let item_long = "|M_t u(a)-M_t u(b)| <= int_gamma 4c_D^4 g_2t, len in (t,2t]";
    if !space.has_path_structure() {
        let records = vec![Record::not_applicable(item_short, "space has no path structure")];
        return Ok(VerificationReport::new(
            "upper_gradient_scale",
            space,
            constants,
            records,
        ));
    }
    let m = mollify(space, u, t)?;
    let h = g_scale(space, u, 1.0, 2.0 * t, &GMode::Truncated(f64::INFINITY))?.map("4 c_D^4 g_2t", |g| factor * g);
    let mv = m.values();
    let mut rng = ChaCha8Rng::seed_from_u64(PATH_SEED);
    // (ratio, lhs, rhs, a, b, length, count)
    let mut worst = [(f64::NEG_INFINITY, 0.0, 0.0, 0, 0, 0.0, 0usize); 2];
    for k in 0..samples {
        let kind = k % 2;
        let (lo, hi) = if kind == 0 { (t / 2.0, t) } else { (t, 2.0 * t) };
        let src = rng.gen_range(0..space.n());
        let (dist, prev) = dijkstra(space, src);
        let ends: Vec<usize> = (0..space.n())
            .filter(|&y| dist[y] >= lo && dist[y] <= hi && (kind == 0 || dist[y] > t))
            .collect();
        if ends.is_empty() {
            continue;
        }
        let end = ends[rng.gen_range(0..ends.len())];
        let path = chain(&prev, end);
        let (integral, length) = path_integral(space, &h, &path)?;
        let lhs = (mv[src] - mv[end]).abs();
        let ratio = if integral > 0.0 {
            lhs / integral
        } else if lhs > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        let w = &mut worst[kind];
        w.6 += 1;
        if ratio > w.0 {
            *w = (ratio, lhs, integral, src, end, length, w.6);
        }
    }
    if worst[0].6 == 0 {
        return Err(Error::NoPath { lo: t / 2.0, hi: t });
    }
    let records = [item_short, item_long]
        .iter()
        .zip(&worst)
        .map(|(item, w)| {
            if w.6 == 0 {
                return Record::not_applicable(item, "no path of this length");
            }
            Record::le(item, &[("t", t), ("length", w.5)], w.1, w.2).with_note(format!(
                "worst ratio {:.4} on {} -> {} over {} paths",
                w.0, w.3, w.4, w.6
            ))
        })
        .collect();
    Ok(VerificationReport::new(
        "upper_gradient_scale",
        space,
        constants,
        records,
    ))
}

fn hajlasz_ratio(space: &MetricMeasureSpace, u: &ScalarField, p: f64, r: f64) -> Result<(f64, f64, f64, f64)> {
    let res = hajlasz_minimal(space, u, p, 1.0, r)?;
    let (slope, _) = cheeger_surrogate(space, u, p)?;
    if slope == 0.0 {
        if res.objective == 0.0 {
            return Err(Error::Degenerate("u is constant; the ratio is undefined".into()));
        }
        return Err(Error::Degenerate(format!(
            "slope energy vanishes but the Hajlasz objective is {}",
            res.objective
        )));
    }
    Ok((res.objective / slope, res.objective, slope, res.max_violation))
}

/// objective / slope energy ≤ `budget`, and the ratio moves by less than
/// 25% on the refined space when one is given.
pub fn check_hajlasz_bound(
    space: &MetricMeasureSpace,
    u: &ScalarField,
    p: f64,
    r: f64,
    budget: f64,
    refined: Option<(&MetricMeasureSpace, &ScalarField)>,
) -> Result<VerificationReport> {
    check_exponent(p)?;
    check_positive("r", r)?;
    let (ratio, objective, slope, violation) = hajlasz_ratio(space, u, p, r)?;
    let ps = [("p", p), ("r", r)];
    let mut records = vec![
        Record::le("Hajlasz objective / slope energy <= budget", &ps, ratio, budget)
            .with_note(format!("objective {objective:.6e}, slope energy {slope:.6e}")),
        Record::le("constraint violation <= 1e-10", &ps, violation, 1e-10),
    ];
    match refined {
        Some((fine, uf)) => {
            let (fine_ratio, ..) = hajlasz_ratio(fine, uf, p, r)?;
            records.push(
                Record::le(
                    "ratio shift under refinement",
                    &ps,
                    (fine_ratio / ratio - 1.0).abs(),
                    HAJLASZ_SHIFT,
                )
                .with_note(format!("refined ratio {fine_ratio:.6} on {}", fine.name())),
            );
        }
        None => records.push(Record::not_applicable(
            "ratio shift under refinement",
            "no refined space given",
        )),
    }
    let constants = Constants::none().with("budget", budget);
    Ok(VerificationReport::new("hajlasz_bound", space, constants, records))
}
