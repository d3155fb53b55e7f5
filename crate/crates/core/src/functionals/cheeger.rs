//! Discrete stand-ins for the Cheeger energy Σ w |∇u|^p.

use super::{pow_p, ScalarField};
use crate::error::{check_exponent, Error, Result};
use crate::parallel::map_indexed;
use crate::space::{Grid, MetricMeasureSpace};

/// Local slope max_{y ~ x} |u(x) − u(y)| / d(x, y) over the space's
/// neighbors, and its energy Σ w(x) slope(x)^p.
pub fn cheeger_surrogate(space: &MetricMeasureSpace, u: &ScalarField, p: f64) -> Result<(f64, ScalarField)> {
    check_exponent(p)?;
    u.check_len(space)?;
    let v = u.values();
    let slopes = map_indexed(space.n(), |x| {
        let nb = space.neighbors(x);
        if nb.is_empty() {
            return Err(Error::IsolatedPoint(x));
        }
        Ok(nb
            .iter()
            .map(|&y| (v[x] - v[y]).abs() / space.distance(x, y))
            .fold(0.0, f64::max))
    });
    let slopes = slopes.into_iter().collect::<Result<Vec<f64>>>()?;
    let g = ScalarField::computed(slopes, "local slope");
    Ok((energy(space, &g, p), g))
}

/// Centered finite-difference gradient norm on 1D and 2D grids, one-sided
/// at non-periodic boundaries. On gauge grids the norm is the dual norm of
/// the gauge, which is the metric slope of a linear function.
pub fn cheeger_fd(space: &MetricMeasureSpace, u: &ScalarField, p: f64) -> Result<(f64, ScalarField)> {
    check_exponent(p)?;
    u.check_len(space)?;
    let grid = space
        .grid()
        .ok_or_else(|| Error::InvalidSpec(format!("finite differences need a grid; {} has none", space.name())))?;
    let v = u.values();
    let g: Vec<f64> = match grid {
        Grid::Line { n, h, periodic } => (0..n)
            .map(|i| line_derivative(n, periodic, h, i, |k| v[k]).abs())
            .collect(),
        Grid::Plane {
            nx,
            ny,
            hx,
            hy,
            periodic,
        } => {
            let body = space.gauge_body();
            (0..nx * ny)
                .map(|i| {
                    let (ix, iy) = (i % nx, i / nx);
                    let gx = line_derivative(nx, periodic, hx, ix, |k| v[iy * nx + k]);
                    let gy = line_derivative(ny, periodic, hy, iy, |k| v[k * nx + ix]);
                    match body {
                        Some(b) => b.dual_norm(&[gx, gy]),
                        None => gx.hypot(gy),
                    }
                })
                .collect()
        }
    };
    let g = ScalarField::computed(g, "finite-difference gradient");
    Ok((energy(space, &g, p), g))
}

fn line_derivative(n: usize, periodic: bool, h: f64, i: usize, at: impl Fn(usize) -> f64) -> f64 {
    if periodic {
        (at((i + 1) % n) - at((i + n - 1) % n)) / (2.0 * h)
    } else if i == 0 {
        (at(1) - at(0)) / h
    } else if i == n - 1 {
        (at(n - 1) - at(n - 2)) / h
    } else {
        (at(i + 1) - at(i - 1)) / (2.0 * h)
    }
}

fn energy(space: &MetricMeasureSpace, g: &ScalarField, p: f64) -> f64 {
    g.values()
        .iter()
        .zip(space.weights())
        .map(|(&s, &w)| w * pow_p(s, p))
        .sum()
}
