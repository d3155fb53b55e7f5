mod common;

use common::{brute_force, line_space};
use proptest::prelude::*;

use nsl_core::functionals::{hajlasz_minimal, Provenance, ScalarField};

fn field(v: Vec<f64>) -> ScalarField {
    ScalarField::new(v, Provenance::Operation("oracle".into())).unwrap()
}

#[test]
fn two_point_optimum_is_a_quarter() {
    let s = line_space(&[0.0, 1.0], vec![0.5, 0.5]);
    let res = hajlasz_minimal(&s, &field(vec![0.0, 1.0]), 2.0, 1.0, f64::INFINITY).unwrap();
    assert!((res.objective - 0.25).abs() < 1e-6);
    assert!(res.max_violation <= 1e-10);
}

#[test]
fn three_collinear_points_match_oracle() {
    let s = line_space(&[0.0, 0.5, 1.0], vec![1.0 / 3.0; 3]);
    let u = vec![0.0, 0.5, 1.0];
    let res = hajlasz_minimal(&s, &field(u.clone()), 2.0, 1.0, f64::INFINITY).unwrap();
    let cons = vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)];
    let oracle = brute_force(s.weights(), &cons);
    assert!((oracle - 0.25).abs() < 1e-12);
    assert!((res.objective - oracle).abs() < 1e-4);
    assert!(res.max_violation <= 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn small_spaces_match_active_set_oracle(
        gaps in prop::collection::vec(0.2f64..2.0, 2..4),
        w in prop::collection::vec(0.2f64..2.0, 4),
        u in prop::collection::vec(-2.0f64..2.0, 4),
    ) {
        let mut pos = vec![0.0];
        for g in &gaps {
            pos.push(pos.last().unwrap() + g);
        }
        let n = pos.len();
        let s = line_space(&pos, w[..n].to_vec());
        let u = &u[..n];
        let mut cons = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let c = (u[i] - u[j]).abs() / (pos[j] - pos[i]);
                if c > 0.0 {
                    cons.push((i, j, c));
                }
            }
        }
        let oracle = brute_force(s.weights(), &cons);
        let res = hajlasz_minimal(&s, &field(u.to_vec()), 2.0, 1.0, f64::INFINITY).unwrap();
        prop_assert!(res.max_violation <= 1e-10);
        prop_assert!(res.objective >= oracle * (1.0 - 1e-9));
        prop_assert!((res.objective - oracle).abs() <= 1e-4 * oracle.max(1e-12), "{} vs {}", res.objective, oracle);
    }
}
