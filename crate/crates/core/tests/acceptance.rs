//! One line per acceptance criterion; exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use fractal_steiner::fractal::{
    build_sigma, epsilon_of, hausdorff_dimension_formula, total_length, validate_embedding, Depth,
    LambdaSequence,
};
use fractal_steiner::solver::{
    enumerate_full_topologies, melzak3, mst_length, optimize_topology, solve_steiner, SolveOptions,
};
use fractal_steiner::verifier::{
    build_lemma1, check_lemma0, check_lemma1_decomposition, check_lemma2_shift, check_theorem,
    contact_minimizer, estimate_dimension, lemma0_crossing,
};
use fractal_steiner::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const R3: f64 = 1.732_050_807_568_877_2;
const LAMBDAS: [f64; 3] = [1.0 / 301.0, 1.0 / 400.0, 1.0 / 1000.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn truncation() -> Outcome {
    let mut worst_gap = 0.0f64;
    let mut worst_depth4 = Duration::ZERO;
    let mut pass = true;
    let mut slow = Vec::new();
    for &l in &LAMBDAS {
        for depth in 2..=4 {
            let t0 = Instant::now();
            let r = match check_theorem(l, depth) {
                Ok(r) => r,
                Err(e) => return outcome(false, format!("λ={l} depth {depth}: {e}")),
            };
            let dt = t0.elapsed();
            let budget = if depth == 4 {
                Duration::from_secs(300)
            } else {
                Duration::from_secs(1)
            };
            if dt > budget {
                slow.push(format!("λ={l:.6} depth {depth} took {dt:.2?}"));
            }
            if depth == 4 {
                worst_depth4 = worst_depth4.max(dt);
            }
            let want: f64 = (0..depth as i32).map(|i| (2.0 * l).powi(i)).sum();
            let gap = (r.oracle_length - want).abs() / want;
            worst_gap = worst_gap.max(gap);
            pass &= gap <= 1e-9;
        }
    }
    pass &= slow.is_empty();
    outcome(
        pass,
        format!(
            "max relative gap {worst_gap:.2e} (tol 1e-9), slowest depth-4 solve {worst_depth4:.2?}{}",
            if slow.is_empty() { String::new() } else { format!("; over budget: {}", slow.join(", ")) }
        ),
    )
}

fn vertex_agreement() -> Outcome {
    let mut worst = 0.0f64;
    for &l in &LAMBDAS {
        for depth in 2..=4 {
            match check_theorem(l, depth) {
                Ok(r) => worst = worst.max(r.max_vertex_deviation),
                Err(e) => return outcome(false, format!("λ={l} depth {depth}: {e}")),
            }
        }
    }
    outcome(
        worst <= 1e-7,
        format!("max Steiner point to y_k distance {worst:.2e} (tol 1e-7)"),
    )
}

fn lemma0() -> Outcome {
    let b = match check_lemma0(0.999 / 300.0) {
        Ok(b) => b,
        Err(e) => return outcome(false, e.to_string()),
    };
    let m = b.item_i.relaxed_margin;
    let crossing = lemma0_crossing(1.0 / 300.0, 1.0 / 15.0);
    let pass = m > 0.0
        && b.item_ii.relaxed_margin > 0.0
        && (m - 2.16e-4).abs() <= 0.1 * 2.16e-4
        && matches!(crossing, Ok(x) if x > 1.0 / 300.0 && x < 1.0 / 15.0);
    outcome(
        pass,
        format!(
            "margin (i) {m:.4e}, margin (ii) {:.4e}, zero crossing λ* = {}",
            b.item_ii.relaxed_margin,
            crossing.map_or_else(|e| e.to_string(), |x| format!("{x:.10}"))
        ),
    )
}

fn lemma1_coordinates() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let l: f64 = rng.gen_range(f64::MIN_POSITIVE..0.25);
        match build_lemma1(l) {
            Ok(c) => {
                worst = worst
                    .max(c.z.dist(Point::new(1.0 + 3.0 * l / 8.0, 3.0 * R3 * l / 8.0)))
                    .max(c.z_l.dist(Point::new(
                        1.0 + 3.0 * l / 8.0 - R3 * l / 4.0,
                        3.0 * R3 * l / 8.0 + l / 4.0,
                    )));
            }
            Err(e) => return outcome(false, format!("λ={l}: {e}")),
        }
    }
    outcome(
        worst <= 1e-12,
        format!("100 random λ, max coordinate error {worst:.2e} (tol 1e-12)"),
    )
}

fn lemma1_decomposition() -> Outcome {
    let (mut split, mut mirror) = (0.0f64, 0.0f64);
    for l in LAMBDAS {
        match check_lemma1_decomposition(l, 2) {
            Ok(r) => {
                let v = &r.computed_values;
                let parts = v["mid_length"] + v["up_length"] + v["down_length"];
                split = split.max((v["full_length"] - parts).abs());
                mirror = mirror.max((v["reflected_length"] - v["full_length"]).abs());
            }
            Err(e) => return outcome(false, format!("λ={l}: {e}")),
        }
    }
    outcome(
        split <= 1e-8 && mirror <= 1e-10,
        format!("5 terminals, |full - parts| {split:.2e} (tol 1e-8), reflected gap {mirror:.2e} (tol 1e-10)"),
    )
}

fn lemma2() -> Outcome {
    let l = 1.0 / 300.0;
    let mut worst = 0.0f64;
    for i in -20..=20 {
        match check_lemma2_shift(l, l * i as f64 / 20.0) {
            Ok(s) => worst = worst.max((s.h_s - 0.5 * (s.h_s1 + s.h_s2)).abs()),
            Err(e) => return outcome(false, e.to_string()),
        }
    }
    match contact_minimizer(l) {
        Ok(m) => outcome(
            worst <= 1e-10 && m.h_star.abs() <= 1e-8,
            format!(
                "41 offsets, averaging error {worst:.2e} (tol 1e-10); h* = {:.2e} (tol 1e-8)",
                m.h_star
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn formulas() -> Outcome {
    let seq = LambdaSequence::constant(0.1).unwrap();
    let total = total_length(&seq, Depth::Infinite).unwrap();
    let mut eps_err = 0.0f64;
    for l in [0.1, 1.0 / 301.0, 1.0 / 1000.0, 0.45] {
        let e = epsilon_of(l).unwrap();
        eps_err = eps_err.max((e - l * l / (1.0 - l)).abs());
    }
    let err = (total - 1.25).abs();
    outcome(
        err <= 1e-15 && eps_err <= 1e-15,
        format!("total length {total} (error {err:.1e}), ε error {eps_err:.1e} (tol 1e-15)"),
    )
}

fn dimension() -> Outcome {
    let t0 = Instant::now();
    let tree = build_sigma(&LambdaSequence::constant(0.1).unwrap(), 13).unwrap();
    let leaves: Vec<Point> = tree.leaves().collect();
    let scales: Vec<f64> = (1..=6).map(|k| 0.1f64.powi(k)).collect();
    let d = estimate_dimension(&leaves, &scales);
    let dt = t0.elapsed();
    let want = hausdorff_dimension_formula(0.1).unwrap();
    match d {
        Ok(d) => outcome(
            (d - want).abs() <= 0.05 && dt < Duration::from_secs(30),
            format!(
                "estimate {d:.5} vs {want:.5} (tol 0.05) from {} points in {dt:.2?}",
                leaves.len()
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

fn solver_sanity() -> Outcome {
    let opts = SolveOptions::default();
    let square = [
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(0.0, 1.0),
    ];
    let s = solve_steiner(&square, &opts).unwrap();
    let all = enumerate_full_topologies(4).unwrap();
    let tied: Vec<f64> = s
        .ties
        .iter()
        .map(|&i| optimize_topology(&all[i], &square, &opts).unwrap().length)
        .collect();
    let tie_gap = tied.iter().fold(0.0f64, |m, &x| m.max((x - tied[0]).abs()));
    let square_err = (s.length - (1.0 + R3)).abs();
    let mut min_angle = s.min_angle;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut triple_err = 0.0f64;
    for _ in 0..200 {
        let t: Vec<Point> = (0..3).map(|_| Point::new(rng.gen(), rng.gen())).collect();
        let got = solve_steiner(&t, &opts).unwrap();
        let want = melzak3(t[0], t[1], t[2]).unwrap();
        triple_err = triple_err.max((got.length - want.length).abs());
        min_angle = min_angle.min(got.min_angle);
    }
    for &l in &LAMBDAS {
        for depth in 2..=4 {
            let tree = build_sigma(&LambdaSequence::constant(l).unwrap(), depth).unwrap();
            let mut pts = vec![tree.vertex(0)];
            pts.extend(tree.leaves());
            min_angle = min_angle.min(solve_steiner(&pts, &opts).unwrap().min_angle);
        }
    }
    let pass = square_err <= 1e-9
        && s.ties.len() == 2
        && tie_gap < 1e-12
        && triple_err <= 1e-10
        && min_angle >= 2.0 * PI / 3.0 - 1e-6;
    outcome(
        pass,
        format!(
            "square error {square_err:.1e} with {} ties (gap {tie_gap:.1e}); triples max error {triple_err:.1e}; min angle {:.9} rad",
            s.ties.len(),
            min_angle
        ),
    )
}

fn invariants() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut failures = Vec::new();
    for case in 0..40 {
        let n = 3 + case % 5;
        let pts: Vec<Point> = (0..n).map(|_| Point::new(rng.gen(), rng.gen())).collect();
        let serial = SolveOptions {
            jobs: Some(1),
            ..SolveOptions::default()
        };
        let a = solve_steiner(&pts, &serial).unwrap();
        let b = solve_steiner(&pts, &SolveOptions::default()).unwrap();
        let mst = mst_length(&pts).unwrap();
        if a.length.to_bits() != b.length.to_bits() || a.steiner_points != b.steiner_points {
            failures.push(format!("case {case}: jobs changed the result"));
        }
        if a.length > mst * (1.0 + 1e-12) {
            failures.push(format!("case {case}: longer than the MST"));
        }
        if a.min_angle < 2.0 * PI / 3.0 - 1e-6 || a.max_degree > 3 || !a.converged {
            failures.push(format!("case {case}: angle/degree/convergence"));
        }
        if (a.edge_length_sum() - a.length).abs() > 1e-12 * a.length {
            failures.push(format!("case {case}: length not the edge sum"));
        }
    }
    for l in [1.0 / 301.0, 0.1, 0.45] {
        let tree = build_sigma(&LambdaSequence::constant(l).unwrap(), 8).unwrap();
        if !validate_embedding(&tree).valid {
            failures.push(format!("λ={l}: embedding invalid"));
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "40 random instances and 3 embeddings in {:.2?}; property suites in solver/verifier/cli targets{}",
            t0.elapsed(),
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join("; ")) }
        ),
    )
}

fn main() {
    let start = Instant::now();
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("truncated trees are minimal", truncation),
        ("Steiner points sit on the tree vertices", vertex_agreement),
        ("length bounds near the balls", lemma0),
        ("construction coordinates", lemma1_coordinates),
        ("symmetric decomposition", lemma1_decomposition),
        ("contact shift and averaging", lemma2),
        ("closed-form lengths", formulas),
        ("box-counting dimension", dimension),
        ("solver sanity", solver_sanity),
        ("invariant suite", invariants),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    let total = start.elapsed();
    println!(
        "acceptance finished in {total:.2?}, {failed} of {} failed",
        criteria.len()
    );
    if failed > 0 || total > Duration::from_secs(600) {
        std::process::exit(1);
    }
}
