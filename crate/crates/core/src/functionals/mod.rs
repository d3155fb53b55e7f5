//! Pair energies, ball averages and discrete gradients of scalar fields.
//!
//! Every pair sum runs over ordered pairs x ≠ y and is reduced with the
//! fixed-order scheme of [`crate::parallel`], so values do not depend on the
//! number of worker threads.

mod cheeger;
mod field;
mod hajlasz;
mod pair;
mod scale;
mod spec;
mod table;

pub use cheeger::{cheeger_fd, cheeger_surrogate};
pub use field::{Provenance, ScalarField};
pub use hajlasz::{hajlasz_minimal, hajlasz_minimal_with, HajlaszOptions, HajlaszResult};
pub use pair::{gagliardo_p, nguyen_a, nguyen_b};
pub use scale::{g_scale, mollify, scale_energies, scale_energies_via, GMode, PiecewiseLinear, SRoute, ScaleEnergies};
pub use spec::EnergySpec;

pub(crate) use pair::{gagliardo_with, nguyen_with, pair_sum};
pub(crate) use scale::{h_energy, s_energy};
pub(crate) use table::{pair_table, TABLE_CAP};

use crate::error::{Error, Result};
use crate::space::MetricMeasureSpace;

/// |v|^p with exact fast paths for p = 1 and p = 2.
#[inline]
pub(crate) fn pow_p(v: f64, p: f64) -> f64 {
    if p == 2.0 {
        v * v
    } else if p == 1.0 {
        v
    } else {
        v.powf(p)
    }
}

/// Trapezoid line integral of g along a chain of points. Returns
/// (∫_γ g, length of γ).
pub fn path_integral(space: &MetricMeasureSpace, g: &ScalarField, path: &[usize]) -> Result<(f64, f64)> {
    g.check_len(space)?;
    let v = g.values();
    let mut integral = 0.0;
    let mut length = 0.0;
    for &x in path {
        space.check_point(x)?;
    }
    for pair in path.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if a == b {
            return Err(Error::Degenerate(format!("path repeats point {a}")));
        }
        let d = space.distance(a, b);
        integral += 0.5 * (v[a] + v[b]) * d;
        length += d;
    }
    Ok((integral, length))
}
