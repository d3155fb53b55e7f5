//! Two-sided comparison of the extrapolated limits with the slope energy.

use super::{Constants, Record, VerificationReport};
use crate::error::{check_exponent, Error, Result};
use crate::functionals::{cheeger_fd, cheeger_surrogate, ScalarField};
use crate::kernel::KernelSpec;
use crate::limits::{bbm_sweep, extrapolate, mesh_guard_s, nguyen_sweep, LimitEstimate};
use crate::space::{MetricMeasureSpace, SpaceSpec};

/// Relative thresholds of the default δ grid, scaled by the oscillation of u.
const DELTA_FRACTIONS: [f64; 7] = [0.5, 0.2, 0.1, 0.08, 0.06, 0.04, 0.02];

#[derive(Debug, Clone, PartialEq)]
pub struct TwoSidedOptions {
    /// accepted range of each ratio
    pub window: (f64, f64),
    /// largest relative shift of a ratio under refinement
    pub max_shift: f64,
    /// None: ten points evenly spaced in [guard − 0.2, guard]
    pub s_grid: Option<Vec<f64>>,
    /// None: fixed fractions of the oscillation of u
    pub delta_grid: Option<Vec<f64>>,
}

impl Default for TwoSidedOptions {
    fn default() -> Self {
        Self {
            window: (0.05, 20.0),
            max_shift: 0.15,
            s_grid: None,
            delta_grid: None,
        }
    }
}

/// Ten s values ending at the mesh guard of the space.
pub fn default_s_grid(space: &MetricMeasureSpace) -> Vec<f64> {
    let guard = mesh_guard_s(space);
    let hi = guard.max(0.3);
    let lo = (hi - 0.2).max(0.05);
    (0..10).map(|k| lo + (hi - lo) * k as f64 / 9.0).collect()
}

struct Ratios {
    surrogate: f64,
    bbm: LimitEstimate,
    ngu: LimitEstimate,
}

impl Ratios {
    fn r_bbm(&self) -> f64 {
        self.bbm.limit / self.surrogate
    }

    fn r_ngu(&self) -> f64 {
        self.ngu.limit / self.surrogate
    }
}

/// Finite differences where the space is a grid, the local slope otherwise.
fn slope_energy(space: &MetricMeasureSpace, u: &ScalarField, p: f64) -> Result<f64> {
    match cheeger_fd(space, u, p) {
        Ok((e, _)) => Ok(e),
        Err(Error::InvalidSpec(_)) => Ok(cheeger_surrogate(space, u, p)?.0),
        Err(e) => Err(e),
    }
}

fn ratios(
    space: &MetricMeasureSpace,
    u: &ScalarField,
    p: f64,
    kernel: &KernelSpec,
    opts: &TwoSidedOptions,
) -> Result<Ratios> {
    u.check_len(space)?;
    let surrogate = slope_energy(space, u, p)?;
    if surrogate == 0.0 {
        return Err(Error::Degenerate(format!(
            "slope energy of {} vanishes on {}",
            u.provenance(),
            space.name()
        )));
    }
    let s_grid = opts.s_grid.clone().unwrap_or_else(|| default_s_grid(space));
    let osc = u.oscillation();
    let delta_grid = opts
        .delta_grid
        .clone()
        .unwrap_or_else(|| DELTA_FRACTIONS.iter().map(|f| f * osc).collect());
    let bbm = extrapolate(&bbm_sweep(space, u, p, kernel, &s_grid)?)?;
    let ngu = extrapolate(&nguyen_sweep(space, u, p, kernel, &delta_grid)?)?;
    Ok(Ratios { surrogate, bbm, ngu })
}

/// R_BBM and R_NGU, the extrapolated limits over the slope energy. Both
/// must lie in the window, and move by less than `max_shift` on the
/// refined space when one is given. On Sierpinski spaces every record is
/// informational.
pub fn two_sided_report(
    space: &MetricMeasureSpace,
    u: &ScalarField,
    p: f64,
    kernel: &KernelSpec,
    refined: Option<(&MetricMeasureSpace, &ScalarField)>,
    opts: &TwoSidedOptions,
) -> Result<VerificationReport> {
    check_exponent(p)?;
    let coarse = ratios(space, u, p, kernel, opts)?;
    let (lo, hi) = opts.window;
    let ps = [("p", p)];
    let mut records = vec![
        Record::info("slope energy", &ps, coarse.surrogate, coarse.surrogate),
        Record::info("BBM limit vs slope energy", &ps, coarse.bbm.limit, coarse.surrogate).with_note(format!(
            "{:?} fit, residual {:.2e}{}",
            coarse.bbm.model,
            coarse.bbm.residual,
            if coarse.bbm.non_monotone { ", non-monotone" } else { "" }
        )),
        Record::info("Nguyen limit vs slope energy", &ps, coarse.ngu.limit, coarse.surrogate).with_note(format!(
            "{:?} fit, residual {:.2e}{}",
            coarse.ngu.model,
            coarse.ngu.residual,
            if coarse.ngu.non_monotone { ", non-monotone" } else { "" }
        )),
    ];
    for (name, r) in [("R_BBM", coarse.r_bbm()), ("R_NGU", coarse.r_ngu())] {
        records.push(Record::le(&format!("{name} >= window low"), &ps, lo, r));
        records.push(Record::le(&format!("{name} <= window high"), &ps, r, hi));
    }
    match refined {
        Some((fine_space, fine_u)) => {
            let fine = ratios(fine_space, fine_u, p, kernel, opts)?;
            for (name, a, b) in [
                ("R_BBM", coarse.r_bbm(), fine.r_bbm()),
                ("R_NGU", coarse.r_ngu(), fine.r_ngu()),
            ] {
                records.push(
                    Record::le(
                        &format!("{name} shift under refinement"),
                        &ps,
                        (b / a - 1.0).abs(),
                        opts.max_shift,
                    )
                    .with_note(format!("{a:.6} -> {b:.6} on {}", fine_space.name())),
                );
            }
        }
        None => records.push(Record::not_applicable(
            "shift under refinement",
            "no refined space given",
        )),
    }
    if matches!(space.spec(), Some(SpaceSpec::Sierpinski { .. })) {
        for r in &mut records {
            if r.relation == super::Relation::Le {
                *r = Record::info(&r.item, &[("p", p)], r.lhs, r.rhs)
                    .with_note("informational: no Poincare inequality is asserted on this space");
            }
        }
    }
    let constants = Constants::none()
        .with("window low", lo)
        .with("window high", hi)
        .with("max shift", opts.max_shift);
    Ok(VerificationReport::new("two_sided", space, constants, records))
}
