//! Exact identities. The parameter integrals are evaluated in closed form:
//! on a finite space K_t and A_δ are step functions of their parameter that
//! jump only at realized distances and realized differences |u(x) − u(y)|.

use super::{Constants, Record, VerificationReport, IDENTITY_TOL};
use crate::error::{check_exponent, check_fraction, check_positive, Result};
use crate::functionals::{gagliardo_with, pair_sum, pair_table, pow_p, s_energy, SRoute, ScalarField};
use crate::kernel::{pair_rho, KernelSpec};
use crate::space::MetricMeasureSpace;

/// ps·∫₀^∞ K_t t^{−ps−1} dt = [u]^p.
pub fn check_fubini_identity(
    space: &MetricMeasureSpace,
    u: &ScalarField,
    p: f64,
    s: f64,
    kernel: &KernelSpec,
) -> Result<VerificationReport> {
    check_exponent(p)?;
    check_fraction("s", s)?;
    u.check_len(space)?;
    let rho = pair_rho(space, kernel)?;
    let v = u.values();
    let table = pair_table(
        space,
        |x, y| {
            let diff = (v[x] - v[y]).abs();
            (diff > 0.0).then(|| (space.distance(x, y), pow_p(diff, p) / rho.get(x, y)))
        },
        usize::MAX,
    )
    .expect("uncapped table");
    let ps = p * s;
    // K_t = Σ_{j ≤ k} vals[j] on [d_k, d_{k+1}), and
    // ps ∫_{d_k}^{d_{k+1}} t^{−ps−1} dt = d_k^{−ps} − d_{k+1}^{−ps}
    let mut k_t = 0.0;
    let mut lhs = 0.0;
    for (k, (&d, &a)) in table.keys.iter().zip(&table.vals).enumerate() {
        k_t += a;
        let upper = table.keys.get(k + 1).map_or(0.0, |&e| e.powf(-ps));
        lhs += k_t * (d.powf(-ps) - upper);
    }
    let rhs = gagliardo_with(space, v, p, s, &rho);
    let rec = Record::eq(
        "ps*int K_t t^(-ps-1) dt = [u]^p",
        &[("p", p), ("s", s)],
        lhs,
        rhs,
        IDENTITY_TOL,
    )
    .with_note(format!("{} jumps", table.keys.len()));
    Ok(VerificationReport::new(
        "fubini_identity",
        space,
        Constants::none(),
        vec![rec],
    ))
}

/// ∫₀^r ε δ^{ε−1} A_δ dδ = ε/(p+ε) Σ min(|u(x)−u(y)|, r)^{p+ε} / (ρ d^p) w w.
pub fn check_nguyen_averaging(
    space: &MetricMeasureSpace,
    u: &ScalarField,
    p: f64,
    eps: f64,
    r: f64,
    kernel: &KernelSpec,
) -> Result<VerificationReport> {
    check_exponent(p)?;
    check_positive("eps", eps)?;
    check_positive("r", r)?;
    u.check_len(space)?;
    let rho = pair_rho(space, kernel)?;
    let v = u.values();
    let b = |x: usize, y: usize| 1.0 / (rho.get(x, y) * pow_p(space.distance(x, y), p));
    let table = pair_table(
        space,
        |x, y| {
            let diff = (v[x] - v[y]).abs();
            (diff > 0.0).then(|| (diff, b(x, y)))
        },
        usize::MAX,
    )
    .expect("uncapped table");
    let q = p + eps;
    let factor = eps / q;
    // A_δ / δ^p = Σ_{j ≥ k} vals[j] for δ ∈ [v_{k−1}, v_k), and
    // ∫ ε δ^{p+ε−1} dδ over that segment is ε/(p+ε)·(v_k^q − v_{k−1}^q)
    let mut tail = 0.0;
    let mut lhs = 0.0;
    for k in (0..table.keys.len()).rev() {
        tail += table.vals[k];
        let hi = table.keys[k].min(r);
        let lo = if k == 0 { 0.0 } else { table.keys[k - 1].min(r) };
        lhs += tail * (hi.powf(q) - lo.powf(q));
    }
    lhs *= factor;
    let rhs = factor
        * pair_sum(space, |x, y| {
            let diff = (v[x] - v[y]).abs();
            if diff == 0.0 {
                0.0
            } else {
                diff.min(r).powf(q) * b(x, y)
            }
        });
    let rec = Record::eq(
        "int_0^r eps d^(eps-1) A_d = eps/(p+eps) sum min(|du|,r)^(p+eps)/(rho d^p)",
        &[("p", p), ("eps", eps), ("r", r)],
        lhs,
        rhs,
        IDENTITY_TOL,
    )
    .with_note(format!("{} jumps", table.keys.len()));
    Ok(VerificationReport::new(
        "nguyen_averaging",
        space,
        Constants::none(),
        vec![rec],
    ))
}

/// Tolerance of the S_t route comparison.
pub const S_ROUTE_TOL: f64 = 1e-10;

/// S_t by the triple loop against the reformulated pair sum.
pub fn check_s_reformulation(
    space: &MetricMeasureSpace,
    u: &ScalarField,
    p: f64,
    t_grid: &[f64],
) -> Result<VerificationReport> {
    check_exponent(p)?;
    u.check_len(space)?;
    let v = u.values();
    let mut records = Vec::new();
    for &t in t_grid {
        check_positive("t", t)?;
        let triple = s_energy(space, v, p, t, SRoute::TripleLoop);
        let reform = s_energy(space, v, p, t, SRoute::Reformulated);
        records.push(Record::eq(
            "S_t triple loop = S_t reformulated",
            &[("t", t)],
            triple,
            reform,
            S_ROUTE_TOL,
        ));
    }
    Ok(VerificationReport::new(
        "s_reformulation",
        space,
        Constants::none(),
        records,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::Provenance;
    use crate::space::{build_space, SpaceSpec};

    fn two_point() -> MetricMeasureSpace {
        MetricMeasureSpace::from_matrix("two", vec![0.0, 1.0, 1.0, 0.0], vec![0.5, 0.5]).unwrap()
    }

    fn field(v: Vec<f64>) -> ScalarField {
        ScalarField::new(v, Provenance::Operation("test".into())).unwrap()
    }

    #[test]
    fn two_point_fubini_by_hand() {
        let r = check_fubini_identity(
            &two_point(),
            &field(vec![0.0, 1.0]),
            2.0,
            0.5,
            &KernelSpec::Ahlfors(1.0),
        )
        .unwrap();
        assert!(r.pass);
        assert_eq!(r.records[0].lhs, 0.5);
        assert_eq!(r.records[0].rhs, 0.5);
    }

    #[test]
    fn two_point_nguyen_by_hand() {
        let r = check_nguyen_averaging(
            &two_point(),
            &field(vec![0.0, 1.0]),
            2.0,
            1.0,
            1.0,
            &KernelSpec::Ahlfors(1.0),
        )
        .unwrap();
        assert!(r.pass);
        assert!((r.records[0].rhs - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn constant_field_gives_zero_sides() {
        let s = build_space(&SpaceSpec::interval(16)).unwrap();
        let c = ScalarField::constant(16, 2.0).unwrap();
        let f = check_fubini_identity(&s, &c, 2.0, 0.7, &KernelSpec::Rho1).unwrap();
        assert_eq!((f.records[0].lhs, f.records[0].rhs), (0.0, 0.0));
        assert!(f.pass);
        let n = check_nguyen_averaging(&s, &c, 2.0, 0.5, 0.5, &KernelSpec::Rho1).unwrap();
        assert!(n.pass);
    }

    #[test]
    fn interval_identities() {
        let s = build_space(&SpaceSpec::interval(128)).unwrap();
        let u = ScalarField::from_coords(&s, "x", |c| c[0]).unwrap();
        let k = KernelSpec::Ahlfors(1.0);
        assert!(check_fubini_identity(&s, &u, 2.0, 0.7, &k).unwrap().pass);
        assert!(check_nguyen_averaging(&s, &u, 2.0, 0.5, 0.5, &k).unwrap().pass);
        assert!(check_s_reformulation(&s, &u, 2.0, &[0.05, 0.2]).unwrap().pass);
    }
}
