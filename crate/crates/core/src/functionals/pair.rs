//! Double sums over ordered pairs x ≠ y weighted by w(x) w(y).

use super::{pow_p, EnergySpec, ScalarField};
use crate::error::Result;
use crate::kernel::{pair_rho, PairRho};
use crate::parallel::row_sum;
use crate::space::MetricMeasureSpace;

/// Σ_{x≠y} term(x, y) w(x) w(y), reduced in fixed block order.
pub(crate) fn pair_sum<F>(space: &MetricMeasureSpace, term: F) -> f64
where
    F: Fn(usize, usize) -> f64 + Sync,
{
    let n = space.n();
    let w = space.weights();
    row_sum(n, |x| {
        let mut acc = 0.0;
        for (y, &wy) in w.iter().enumerate() {
            if y != x {
                acc += term(x, y) * wy;
            }
        }
        acc * w[x]
    })
}

/// [u]^p = Σ_{x≠y} |u(x)−u(y)|^p / (d^{ps} ρ) w(x) w(y).
pub fn gagliardo_p(space: &MetricMeasureSpace, u: &ScalarField, spec: &EnergySpec) -> Result<f64> {
    let s = spec.require("s", spec.s)?;
    u.check_len(space)?;
    let rho = pair_rho(space, &spec.kernel)?;
    Ok(gagliardo_with(space, u.values(), spec.p, s, &rho))
}

pub(crate) fn gagliardo_with(space: &MetricMeasureSpace, u: &[f64], p: f64, s: f64, rho: &PairRho<'_>) -> f64 {
    let ps = p * s;
    pair_sum(space, |x, y| {
        let diff = (u[x] - u[y]).abs();
        if diff == 0.0 {
            return 0.0;
        }
        pow_p(diff, p) / (space.distance(x, y).powf(ps) * rho.get(x, y))
    })
}

/// A_δ = Σ_{|u(x)−u(y)|>δ} δ^p / (ρ d^p) w(x) w(y).
pub fn nguyen_a(space: &MetricMeasureSpace, u: &ScalarField, spec: &EnergySpec) -> Result<f64> {
    let delta = spec.require("delta", spec.delta)?;
    u.check_len(space)?;
    let rho = pair_rho(space, &spec.kernel)?;
    Ok(nguyen_with(space, u.values(), spec.p, delta, f64::INFINITY, &rho))
}

/// B_{δ,r}: A_δ restricted to pairs with d(x, y) ≤ r.
pub fn nguyen_b(space: &MetricMeasureSpace, u: &ScalarField, spec: &EnergySpec) -> Result<f64> {
    let delta = spec.require("delta", spec.delta)?;
    let r = spec.require("r", spec.r)?;
    u.check_len(space)?;
    let rho = pair_rho(space, &spec.kernel)?;
    Ok(nguyen_with(space, u.values(), spec.p, delta, r, &rho))
}

pub(crate) fn nguyen_with(space: &MetricMeasureSpace, u: &[f64], p: f64, delta: f64, r: f64, rho: &PairRho<'_>) -> f64 {
    let dp = pow_p(delta, p);
    pair_sum(space, |x, y| {
        if (u[x] - u[y]).abs() <= delta {
            return 0.0;
        }
        let d = space.distance(x, y);
        if d > r {
            return 0.0;
        }
        dp / (rho.get(x, y) * pow_p(d, p))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::Provenance;
    use crate::kernel::KernelSpec;
    use crate::space::{build_space, SpaceSpec};

    fn two_point() -> MetricMeasureSpace {
        MetricMeasureSpace::from_matrix("two", vec![0.0, 1.0, 1.0, 0.0], vec![0.5, 0.5]).unwrap()
    }

    fn field(v: Vec<f64>) -> ScalarField {
        ScalarField::new(v, Provenance::Operation("test".into())).unwrap()
    }

    #[test]
    fn two_point_gagliardo() {
        let s = two_point();
        let spec = EnergySpec::new(2.0, KernelSpec::Ahlfors(1.0)).with_s(0.5);
        assert_eq!(gagliardo_p(&s, &field(vec![0.0, 1.0]), &spec).unwrap(), 0.5);
        assert_eq!(gagliardo_p(&s, &field(vec![3.0, 3.0]), &spec).unwrap(), 0.0);
    }

    #[test]
    fn two_point_nguyen() {
        let s = two_point();
        let u = field(vec![0.0, 1.0]);
        let spec = EnergySpec::new(2.0, KernelSpec::Ahlfors(1.0)).with_delta(0.5);
        assert_eq!(nguyen_a(&s, &u, &spec).unwrap(), 0.125);
        // strict threshold: δ equal to the oscillation gives the empty set
        let spec = spec.with_delta(1.0);
        assert_eq!(nguyen_a(&s, &u, &spec).unwrap(), 0.0);
        let spec = spec.with_delta(0.5).with_r(0.5);
        assert_eq!(nguyen_b(&s, &u, &spec).unwrap(), 0.0);
    }

    #[test]
    fn missing_parameter_is_reported() {
        let s = two_point();
        let spec = EnergySpec::new(2.0, KernelSpec::Rho1);
        assert!(gagliardo_p(&s, &field(vec![0.0, 1.0]), &spec).is_err());
        let spec = spec.with_s(1.0);
        assert!(gagliardo_p(&s, &field(vec![0.0, 1.0]), &spec).is_err());
    }

    #[test]
    fn interval_closed_forms() {
        let sp = build_space(&SpaceSpec::interval(1024)).unwrap();
        let u = ScalarField::from_coords(&sp, "x", |c| c[0]).unwrap();
        let spec = EnergySpec::new(2.0, KernelSpec::Ahlfors(1.0)).with_delta(0.1);
        let a = nguyen_a(&sp, &u, &spec).unwrap();
        assert!((a / 0.81 - 1.0).abs() < 0.01, "A = {a}");
        let spec = spec.with_s(0.5);
        let g = gagliardo_p(&sp, &u, &spec).unwrap();
        let exact = 2.0 * (1.0 / 1.0 - 1.0 / 2.0);
        assert!((g / exact - 1.0).abs() < 0.01, "G = {g}");
    }
}
