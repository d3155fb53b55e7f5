use std::f64::consts::PI;

use nsl_core::functionals::ScalarField;
use nsl_core::verify::*;
use nsl_core::{build_space, KernelSpec, MetricMeasureSpace, SpaceSpec};

fn circle(n: usize) -> (MetricMeasureSpace, ScalarField) {
    let s = build_space(&SpaceSpec::Circle { n }).unwrap();
    let u = ScalarField::from_coords(&s, "sin(x)", |c| c[0].sin()).unwrap();
    (s, u)
}

fn interval(n: usize) -> (MetricMeasureSpace, ScalarField) {
    let s = build_space(&SpaceSpec::interval(n)).unwrap();
    let u = ScalarField::from_coords(&s, "x", |c| c[0]).unwrap();
    (s, u)
}

#[test]
fn annuli_bound_on_circle() {
    let (s, _) = circle(256);
    let r = check_annuli_bound(&s, &KernelSpec::Rho1, 2.0, &default_r_grid(&s)).unwrap();
    assert!(r.pass, "{r}");
    let c = r.constants.assembled["C"];
    let cd = r.constants.c_d_hat.unwrap();
    assert!((c - cd * cd * 4.0 / 3.0).abs() < 1e-12);
}

#[test]
fn annuli_sup_is_stable_under_refinement() {
    let sup = |n: usize| {
        let (s, _) = interval(n);
        let r = check_annuli_bound(&s, &KernelSpec::Ahlfors(1.0), 1.0, &[0.05, 0.1, 0.2]).unwrap();
        assert!(r.pass, "{r}");
        r.records.iter().map(|rec| rec.lhs).fold(0.0, f64::max)
    };
    let (a, b) = (sup(256), sup(512));
    assert!(a.is_finite() && (b / a - 1.0).abs() < 0.1, "{a} vs {b}");
}

#[test]
fn mean_comparison_on_circle() {
    let (s, u) = circle(64);
    let r = check_mean_comparison(&s, &u, 2.0, &[PI / 8.0]).unwrap();
    assert!(r.pass, "{r}");
    let c = ScalarField::constant(64, 3.0).unwrap();
    let r = check_mean_comparison(&s, &c, 2.0, &[PI / 8.0]).unwrap();
    assert!(r.records.iter().all(|rec| rec.lhs == 0.0 && rec.rhs == 0.0));
}

#[test]
fn mollifier_converges_on_circle() {
    let (s, u) = circle(256);
    let r = check_mollifier(
        &s,
        &[u],
        2.0,
        &[PI / 4.0, PI / 8.0, PI / 16.0, 2.0 * PI / 64.0],
        MOLLIFIER_EPS,
    )
    .unwrap();
    assert!(r.pass, "{r}");
    let last = r.records.last().unwrap();
    assert!(last.lhs < 0.05);
}

#[test]
fn upper_gradient_on_circle_arcs() {
    let (s, u) = circle(256);
    let r = check_upper_gradient_scale(&s, &u, PI / 8.0, 100).unwrap();
    assert!(r.pass, "{r}");
}

#[test]
fn upper_gradient_on_interval() {
    let (s, u) = interval(256);
    let r = check_upper_gradient_scale(&s, &u, 0.1, 100).unwrap();
    assert!(r.pass, "{r}");
    assert!(r.records[0].lhs / r.records[0].rhs <= 1.0);
}

#[test]
fn hks_on_torus() {
    let s = build_space(&SpaceSpec::Torus2d { nx: 16, ny: 16 }).unwrap();
    let u = ScalarField::from_coords(&s, "sin(2 pi x)", |c| (2.0 * PI * c[0]).sin()).unwrap();
    let r = check_hks(&s, &u, 2.0, &default_t_grid(&s)).unwrap();
    assert!(r.pass, "{r}");
}

#[test]
fn hks_two_point_by_hand() {
    let s = MetricMeasureSpace::from_matrix("two", vec![0.0, 1.0, 1.0, 0.0], vec![0.5, 0.5]).unwrap();
    let u = ScalarField::constant(2, 1.0).unwrap();
    // the t grid must lie strictly inside (h_min, D) = (1, 1)
    assert!(check_hks(&s, &u, 2.0, &[2.0]).is_err());
}

#[test]
fn exact_identities_on_circle() {
    let (s, u) = circle(128);
    let step = ScalarField::from_coords(&s, "step", |c| if c[0] < PI { 1.0 } else { 0.0 }).unwrap();
    for f in [&u, &step] {
        assert!(check_fubini_identity(&s, f, 2.0, 0.7, &KernelSpec::Rho1).unwrap().pass);
        assert!(
            check_nguyen_averaging(&s, f, 2.0, 0.5, 0.5, &KernelSpec::Rho1)
                .unwrap()
                .pass
        );
    }
    assert!(check_s_reformulation(&s, &u, 2.0, &[0.1, 0.5]).unwrap().pass);
}

#[test]
fn hajlasz_ratio_on_circle_is_stable() {
    let (s, u) = circle(128);
    let (f, uf) = circle(256);
    let r = check_hajlasz_bound(&s, &u, 2.0, 0.2, HAJLASZ_BUDGET, Some((&f, &uf))).unwrap();
    assert!(r.pass, "{r}");
}

#[test]
fn two_sided_on_interval() {
    let (s, u) = interval(512);
    let (f, uf) = interval(1024);
    let r = two_sided_report(
        &s,
        &u,
        2.0,
        &KernelSpec::Ahlfors(1.0),
        Some((&f, &uf)),
        &TwoSidedOptions::default(),
    )
    .unwrap();
    assert!(r.pass, "{r}");
}

#[test]
fn reports_serialize_and_render() {
    let (s, u) = interval(64);
    let r = check_mean_comparison(&s, &u, 2.0, &[0.1]).unwrap();
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(json["check"], "mean_comparison");
    assert_eq!(json["records"].as_array().unwrap().len(), 2);
    let text = r.to_string();
    assert!(text.starts_with("mean_comparison on interval:64: PASS"));
    assert_eq!(text.lines().count(), 4);
}
