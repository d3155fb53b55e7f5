//! Parameter sweeps toward s → 1, δ → 0 and t → 0, and extrapolation of
//! the sampled curves to the limit.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_exponent, Error, Result};
use crate::functionals::{gagliardo_with, nguyen_with, pair_table, pow_p, s_energy, SRoute, ScalarField, TABLE_CAP};
use crate::kernel::{pair_rho, KernelSpec};
use crate::space::MetricMeasureSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    S,
    Delta,
    T,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::S => "s",
            SweepParam::Delta => "delta",
            SweepParam::T => "t",
        }
    }

    /// Distance of a grid value from the limit point.
    pub fn small(self, x: f64) -> f64 {
        match self {
            SweepParam::S => 1.0 - x,
            SweepParam::Delta | SweepParam::T => x,
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub param: SweepParam,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel: Option<KernelSpec>,
    #[serde(default)]
    pub space: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    Linear,
    Quadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub limit: f64,
    pub model: FitModel,
    /// max |value − fit| over the window
    pub residual: f64,
    /// grid values used by the fit
    pub window: Vec<f64>,
    /// the sampled curve is not monotone, so limsup and liminf may differ
    pub non_monotone: bool,
}

/// Relative residual above which the linear model falls back to quadratic.
pub const LINEAR_TOLERANCE: f64 = 0.01;

/// Points used by the fit.
pub const FIT_WINDOW: usize = 5;

/// (1 − s)·log(D / h_min) below this means s is past what the mesh resolves.
pub const MESH_GUARD: f64 = 1.0;

fn check_grid(name: &'static str, grid: &[f64], increasing: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter {
            name,
            value: 0.0,
            reason: "grid is empty",
        });
    }
    for w in grid.windows(2) {
        let ok = if increasing { w[1] > w[0] } else { w[1] < w[0] };
        if !ok {
            return Err(Error::InvalidParameter {
                name,
                value: w[1],
                reason: if increasing {
                    "grid must be strictly increasing"
                } else {
                    "grid must be strictly decreasing"
                },
            });
        }
    }
    Ok(())
}

/// Largest s the mesh resolves: 1 − 1 / log(D / h_min).
pub fn mesh_guard_s(space: &MetricMeasureSpace) -> f64 {
    let ratio = (space.diameter() / space.min_distance()).ln();
    if ratio <= MESH_GUARD {
        0.0
    } else {
        1.0 - MESH_GUARD / ratio
    }
}

/// values[i] = (1 − s_i)·[u]^p at s_i.
pub fn bbm_sweep(
    space: &MetricMeasureSpace,
    u: &ScalarField,
    p: f64,
    kernel: &KernelSpec,
    s_grid: &[f64],
) -> Result<SweepResult> {
    check_exponent(p)?;
    check_grid("s", s_grid, true)?;
    for &s in s_grid {
        crate::error::check_fraction("s", s)?;
    }
    u.check_len(space)?;
    let rho = pair_rho(space, kernel)?;
    let v = u.values();
    let table = pair_table(
        space,
        |x, y| {
            let diff = (v[x] - v[y]).abs();
            if diff == 0.0 {
                return None;
            }
            Some((space.distance(x, y), pow_p(diff, p) / rho.get(x, y)))
        },
        TABLE_CAP,
    );
    let values = s_grid
        .iter()
        .map(|&s| {
            let g = match &table {
                Some(t) => t.eval(|d| d.powf(-p * s)),
                None => gagliardo_with(space, v, p, s, &rho),
            };
            (1.0 - s) * g
        })
        .collect();
    let guard = mesh_guard_s(space);
    let past: Vec<f64> = s_grid.iter().copied().filter(|&s| s > guard).collect();
    let mut warnings = Vec::new();
    if !past.is_empty() {
        warnings.push(format!(
            "mesh guard: {} of {} grid values exceed s = {guard:.4}, where (1-s)*ln(D/h_min) < 1; \
             the discrete sum no longer tracks the continuum limit there",
            past.len(),
            s_grid.len()
        ));
    }
    Ok(SweepResult {
        param: SweepParam::S,
        grid: s_grid.to_vec(),
        values,
        p,
        kernel: Some(kernel.clone()),
        space: space.name().into(),
        warnings,
    })
}

/// values[i] = A_{δ_i}.
pub fn nguyen_sweep(
    space: &MetricMeasureSpace,
    u: &ScalarField,
    p: f64,
    kernel: &KernelSpec,
    delta_grid: &[f64],
) -> Result<SweepResult> {
    check_exponent(p)?;
    check_grid("delta", delta_grid, false)?;
    if let Some(&d) = delta_grid.iter().find(|&&d| !(d > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: d,
            reason: "thresholds must be positive",
        });
    }
    u.check_len(space)?;
    let rho = pair_rho(space, kernel)?;
    let values = delta_grid
        .iter()
        .map(|&d| nguyen_with(space, u.values(), p, d, f64::INFINITY, &rho))
        .collect();
    Ok(SweepResult {
        param: SweepParam::Delta,
        grid: delta_grid.to_vec(),
        values,
        p,
        kernel: Some(kernel.clone()),
        space: space.name().into(),
        warnings: Vec::new(),
    })
}

/// values[i] = S_{t_i} / t_i^p.
pub fn ks_sweep(space: &MetricMeasureSpace, u: &ScalarField, p: f64, t_grid: &[f64]) -> Result<SweepResult> {
    check_exponent(p)?;
    if check_grid("t", t_grid, true).is_err() {
        check_grid("t", t_grid, false)?;
    }
    u.check_len(space)?;
    let h_min = space.min_distance();
    let diameter = space.diameter();
    let mut warnings = Vec::new();
    for &t in t_grid {
        if !(t >= h_min) {
            return Err(Error::InvalidParameter {
                name: "t",
                value: t,
                reason: "below the minimum positive distance, where every ball is a single point",
            });
        }
        if t > diameter {
            warnings.push(format!("t = {t} exceeds the diameter {diameter}"));
        }
    }
    let values = t_grid
        .iter()
        .map(|&t| s_energy(space, u.values(), p, t, SRoute::TripleLoop) / pow_p(t, p))
        .collect();
    Ok(SweepResult {
        param: SweepParam::T,
        grid: t_grid.to_vec(),
        values,
        p,
        kernel: None,
        space: space.name().into(),
        warnings,
    })
}

/// Least-squares polynomial fit of the given degree; returns coefficients
/// (constant first) of the fit in the variable h.
fn polyfit(h: &[f64], v: &[f64], degree: usize) -> Vec<f64> {
    let m = degree + 1;
    // normal equations in the scaled variable h / h_max
    let scale = h.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut a = vec![vec![0.0; m + 1]; m];
    for (&x, &y) in h.iter().zip(v) {
        let x = x / scale;
        let powers: Vec<f64> = (0..m).map(|k| x.powi(k as i32)).collect();
        for r in 0..m {
            for c in 0..m {
                a[r][c] += powers[r] * powers[c];
            }
            a[r][m] += powers[r] * y;
        }
    }
    let coef = solve(a);
    coef.iter().enumerate().map(|(k, c)| c / scale.powi(k as i32)).collect()
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
#[allow(clippy::needless_range_loop)]
fn solve(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let m = a.len();
    for col in 0..m {
        let pivot = (col..m)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        a.swap(col, pivot);
        let d = a[col][col];
        if d == 0.0 {
            continue;
        }
        for r in 0..m {
            if r != col {
                let f = a[r][col] / d;
                for c in col..=m {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    (0..m)
        .map(|r| if a[r][r] == 0.0 { 0.0 } else { a[r][m] / a[r][r] })
        .collect()
}

fn eval_poly(coef: &[f64], h: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * h + c)
}

/// Fits value = a + b·h on the grid points closest to the limit and
/// reports a as the limit. Falls back to a quadratic when the linear
/// residual exceeds [`LINEAR_TOLERANCE`] of the value.
pub fn extrapolate(sweep: &SweepResult) -> Result<LimitEstimate> {
    let mut pts: Vec<(f64, f64, f64)> = sweep
        .grid
        .iter()
        .zip(&sweep.values)
        .map(|(&x, &v)| (sweep.param.small(x), v, x))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.truncate(FIT_WINDOW);
    if pts.len() < 3 {
        return Err(Error::TooFewPoints(pts.len()));
    }
    let h: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let v: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let residual_of = |coef: &[f64]| {
        h.iter()
            .zip(&v)
            .map(|(&x, &y)| (y - eval_poly(coef, x)).abs())
            .fold(0.0, f64::max)
    };
    let linear = polyfit(&h, &v, 1);
    let lin_res = residual_of(&linear);
    let (coef, residual, model) = if lin_res > LINEAR_TOLERANCE * linear[0].abs() {
        let quad = polyfit(&h, &v, 2);
        let r = residual_of(&quad);
        (quad, r, FitModel::Quadratic)
    } else {
        (linear, lin_res, FitModel::Linear)
    };
    let increasing = sweep.values.windows(2).all(|w| w[1] >= w[0]);
    let decreasing = sweep.values.windows(2).all(|w| w[1] <= w[0]);
    Ok(LimitEstimate {
        limit: coef[0],
        model,
        residual,
        window: pts.iter().map(|p| p.2).collect(),
        non_monotone: !(increasing || decreasing),
    })
}

impl SweepResult {
    /// CSV with columns (parameter, value).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::MalformedFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        w.write_record([self.param.name(), "value"])?;
        for (x, v) in self.grid.iter().zip(&self.values) {
            w.write_record([format!("{x:?}"), format!("{v:?}")])?;
        }
        w.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Reads a CSV written by [`SweepResult::write_csv`].
    pub fn read_csv(path: &Path, p: f64) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::MalformedFile {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let param = match r.headers()?.get(0) {
            Some("s") => SweepParam::S,
            Some("delta") => SweepParam::Delta,
            Some("t") => SweepParam::T,
            other => {
                return Err(Error::MalformedFile {
                    path: path.to_path_buf(),
                    reason: format!("unknown sweep parameter column {other:?}"),
                })
            }
        };
        let mut grid = Vec::new();
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |k: usize| -> Result<f64> {
                rec.get(k)
                    .and_then(|c| c.trim().parse().ok())
                    .ok_or_else(|| Error::MalformedFile {
                        path: path.to_path_buf(),
                        reason: format!("bad number in row {:?}", rec),
                    })
            };
            grid.push(parse(0)?);
            values.push(parse(1)?);
        }
        Ok(SweepResult {
            param,
            grid,
            values,
            p,
            kernel: None,
            space: String::new(),
            warnings: Vec::new(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep(param: SweepParam, grid: Vec<f64>, values: Vec<f64>) -> SweepResult {
        SweepResult {
            param,
            grid,
            values,
            p: 2.0,
            kernel: None,
            space: String::new(),
            warnings: Vec::new(),
        }
    }

    #[test]
    fn exact_linear_samples() {
        let s = sweep(SweepParam::Delta, vec![0.1, 0.05, 0.01], vec![1.1, 1.05, 1.01]);
        let e = extrapolate(&s).unwrap();
        assert!((e.limit - 1.0).abs() < 1e-12);
        assert!(e.residual <= 1e-12);
        assert_eq!(e.model, FitModel::Linear);
        assert!(!e.non_monotone);
    }

    #[test]
    fn constant_samples() {
        let s = sweep(SweepParam::S, vec![0.5, 0.6, 0.7, 0.8], vec![2.5; 4]);
        let e = extrapolate(&s).unwrap();
        assert!((e.limit - 2.5).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let s = sweep(SweepParam::S, vec![0.5, 0.6], vec![1.0, 1.0]);
        assert!(matches!(extrapolate(&s), Err(Error::TooFewPoints(2))));
    }

    #[test]
    fn bbm_closed_form_samples() {
        let f = |s: f64| (1.0 - s) * 2.0 * (1.0 / (2.0 - 2.0 * s) - 1.0 / (3.0 - 2.0 * s));
        let grid = vec![0.9, 0.95, 0.99];
        let values = grid.iter().map(|&s| f(s)).collect();
        let e = extrapolate(&sweep(SweepParam::S, grid, values)).unwrap();
        assert!((e.limit - 1.0).abs() < 0.03, "{}", e.limit);
    }

    #[test]
    fn window_takes_points_nearest_the_limit() {
        let grid: Vec<f64> = (0..10).map(|k| 0.5 + 0.05 * k as f64).collect();
        let values = grid.iter().map(|s| 3.0 - s).collect();
        let e = extrapolate(&sweep(SweepParam::S, grid, values)).unwrap();
        assert_eq!(e.window.len(), FIT_WINDOW);
        assert!(e.window.iter().all(|&s| s > 0.7));
        assert!((e.limit - 2.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_fallback() {
        let grid = vec![0.4, 0.3, 0.2, 0.1, 0.05];
        let values: Vec<f64> = grid.iter().map(|d| 1.0 - 2.0 * d + 5.0 * d * d).collect();
        let e = extrapolate(&sweep(SweepParam::Delta, grid, values)).unwrap();
        assert_eq!(e.model, FitModel::Quadratic);
        assert!((e.limit - 1.0).abs() < 1e-10);
        assert!(e.non_monotone);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sweep.csv");
        let s = sweep(SweepParam::T, vec![0.1, 0.2], vec![1.0 / 3.0, 2.0]);
        s.write_csv(&path).unwrap();
        let back = SweepResult::read_csv(&path, 2.0).unwrap();
        assert_eq!(back.grid, s.grid);
        assert_eq!(back.values, s.values);
        assert_eq!(back.param, SweepParam::T);
    }
}
