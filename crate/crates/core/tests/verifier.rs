use fractal_steiner::fractal::{
    build_sigma, hausdorff_dimension_formula, terminal_set, LambdaSequence,
};
use fractal_steiner::verifier::{
    build_lemma1, check_lemma0, check_lemma1_decomposition, check_lemma2_shift, check_theorem,
    contact_minimizer, estimate_dimension, verify_all, LemmaReport,
};
use fractal_steiner::Point;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn powers(lambda: f64, range: std::ops::RangeInclusive<i32>) -> Vec<f64> {
    range.map(|k| lambda.powi(k)).collect()
}

#[test]
fn lemma0_margins_on_grid() {
    for l in [1.0 / 3000.0, 1.0 / 1000.0, 1.0 / 500.0, 1.0 / 301.0] {
        let b = check_lemma0(l).unwrap();
        assert!(b.item_i.relaxed_margin > 0.0, "{l}");
        assert!(b.item_ii.relaxed_margin > 0.0, "{l}");
        assert!(b.surgery_pass);
        assert!(b.report().pass);
    }
}

#[test]
fn lemma1_closed_forms_for_random_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let l: f64 = rng.gen_range(1e-6..0.25);
        let c = build_lemma1(l).unwrap();
        assert!(c.z.dist(c.z_closed_form()) < 1e-12, "{l}");
        assert!(c.z_l.dist(c.z_l_closed_form()) < 1e-12, "{l}");
        assert!(c.report().pass, "{l}");
    }
}

#[test]
fn lemma1_decomposition_with_asymmetric_samples() {
    for samples in 1..=3 {
        let r = check_lemma1_decomposition(1.0 / 300.0, samples).unwrap();
        assert!(r.pass, "{samples}: {r:#?}");
    }
}

#[test]
fn lemma2_minimizer_and_shift() {
    let l = 1.0 / 300.0;
    let m = contact_minimizer(l).unwrap();
    assert!(m.h_star.abs() < 1e-8);
    assert!(m.segment_contact.dist(Point::ORIGIN) < 1e-8);
    let s = check_lemma2_shift(l, l / 2.0).unwrap();
    assert!((s.h_s1 + s.h_s2 - 2.0 * s.h_s).abs() < 1e-10);
    assert!(s.h_s1 < s.h_s);
}

#[test]
fn theorem_vertices_match_sigma() {
    for l in [1.0 / 301.0, 1.0 / 400.0, 1.0 / 1000.0] {
        for depth in 2..=3 {
            let t = check_theorem(l, depth).unwrap();
            assert!(t.relative_gap < 1e-9, "{l} {depth}");
            assert!(t.max_vertex_deviation < 1e-7, "{l} {depth}");
        }
    }
}

#[test]
fn dimension_of_terminal_set() {
    let seq = LambdaSequence::constant(0.1).unwrap();
    let tree = build_sigma(&seq, 13).unwrap();
    let leaves: Vec<Point> = tree.leaves().collect();
    assert_eq!(leaves.len(), 1 << 12);
    let d = estimate_dimension(&leaves, &powers(0.1, 1..=6)).unwrap();
    let want = hausdorff_dimension_formula(0.1).unwrap();
    assert!((d - want).abs() < 0.05, "{d} vs {want}");
}

#[test]
fn dimension_of_segment_sample() {
    let pts: Vec<Point> = (0..10_000)
        .map(|i| Point::new(i as f64 / 9_999.0, 0.0))
        .collect();
    let d = estimate_dimension(&pts, &[0.1, 0.03, 0.01, 0.003, 0.001]).unwrap();
    assert!((d - 1.0).abs() < 0.05, "{d}");
}

#[test]
fn dimension_estimate_approaches_formula_with_depth() {
    let l = 0.1;
    let want = hausdorff_dimension_formula(l).unwrap();
    let scales = powers(l, 1..=6);
    let mut last = f64::INFINITY;
    for tol in [1e-3, 1e-5, 1e-7] {
        let t = terminal_set(&LambdaSequence::constant(l).unwrap(), tol, false).unwrap();
        let err = (estimate_dimension(&t.points, &scales).unwrap() - want).abs();
        assert!(err <= last, "{tol}: {err} > {last}");
        last = err;
    }
}

#[test]
fn bundle_passes_inside_regime_and_serialises() {
    let b = verify_all(1.0 / 301.0, 3).unwrap();
    for r in &b.reports {
        assert!(r.pass, "{}: {r:#?}", r.name);
    }
    assert!(b.pass);
    let json = serde_json::to_string(&b.reports[0]).unwrap();
    for key in [
        "name",
        "inputs",
        "computed_values",
        "margins",
        "pass",
        "tolerances",
    ] {
        assert!(json.contains(&format!("\"{key}\"")), "{key}");
    }
    let back: LemmaReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, b.reports[0]);
}

#[test]
fn bundle_fails_on_relaxed_inequality() {
    let b = verify_all(0.02, 0).unwrap();
    assert!(!b.pass);
    let failing: Vec<_> = b
        .reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.name.as_str())
        .collect();
    assert_eq!(failing, vec!["lemma0_bounds"]);
}

proptest! {
    #[test]
    fn averaging_identity(l in 1e-4f64..0.2, t in -1.0f64..=1.0) {
        let s = check_lemma2_shift(l, t * l).unwrap();
        prop_assert!((s.h_s - 0.5 * (s.h_s1 + s.h_s2)).abs() < 1e-10);
        prop_assert!(s.report().pass);
    }

    #[test]
    fn lemma1_mirror_symmetry(l in 1e-6f64..0.2499) {
        prop_assert!(build_lemma1(l).unwrap().report().pass);
    }
}
