//! Active-set oracle for the Hajłasz program, shared by test targets.

/// Solves a small dense system by Gaussian elimination; None when singular.
#[allow(clippy::needless_range_loop)]
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let m = b.len();
    for col in 0..m {
        let piv = (col..m).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..m {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..m {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..m).map(|i| b[i] / a[i][i]).collect())
}

/// min Σ w g² subject to g_i + g_j ≥ c_ij and g ≥ 0, by enumerating active
/// sets: each subset of constraints held with equality gives a KKT system,
/// and the optimum is the best feasible solution among them.
pub fn brute_force(w: &[f64], cons: &[(usize, usize, f64)]) -> f64 {
    let n = w.len();
    let rows: Vec<(Vec<f64>, f64)> = cons
        .iter()
        .map(|&(i, j, c)| {
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            r[j] = 1.0;
            (r, c)
        })
        .chain((0..n).map(|i| {
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            (r, 0.0)
        }))
        .collect();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << rows.len()) {
        let active: Vec<&(Vec<f64>, f64)> = (0..rows.len())
            .filter(|k| mask >> k & 1 == 1)
            .map(|k| &rows[k])
            .collect();
        let m = n + active.len();
        let mut a = vec![vec![0.0; m]; m];
        let mut b = vec![0.0; m];
        for i in 0..n {
            a[i][i] = 2.0 * w[i];
        }
        for (k, (row, c)) in active.iter().enumerate() {
            for i in 0..n {
                a[i][n + k] = -row[i];
                a[n + k][i] = row[i];
            }
            b[n + k] = *c;
        }
        let Some(sol) = solve(a, b) else { continue };
        let g = &sol[..n];
        let feasible = rows
            .iter()
            .all(|(row, c)| row.iter().zip(g).map(|(r, x)| r * x).sum::<f64>() >= c - 1e-12);
        if feasible {
            best = best.min(g.iter().zip(w).map(|(x, wi)| wi * x * x).sum());
        }
    }
    best
}

pub fn line_space(pos: &[f64], w: Vec<f64>) -> nsl_core::MetricMeasureSpace {
    let n = pos.len();
    let matrix = (0..n * n).map(|k| (pos[k / n] - pos[k % n]).abs()).collect();
    nsl_core::MetricMeasureSpace::from_matrix("line", matrix, w).unwrap()
}
