use std::f64::consts::PI;

use fractal_steiner::fractal::{build_sigma, LambdaSequence};
use fractal_steiner::solver::*;
use fractal_steiner::{Error, Point, Segment};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const R3: f64 = 1.732_050_807_568_877_2;

fn p(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

fn unit_square() -> Vec<Point> {
    vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)]
}

fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point> {
    (0..n).map(|_| p(rng.gen(), rng.gen())).collect()
}

#[test]
fn unit_square_has_two_optimal_topologies() {
    let s = solve_steiner(&unit_square(), &SolveOptions::default()).unwrap();
    assert!((s.length - (1.0 + R3)).abs() < 1e-9);
    assert_eq!(s.ties.len(), 2);
    assert!(s.converged);
    let all = enumerate_full_topologies(4).unwrap();
    let a = optimize_topology(&all[s.ties[0]], &unit_square(), &SolveOptions::default()).unwrap();
    let b = optimize_topology(&all[s.ties[1]], &unit_square(), &SolveOptions::default()).unwrap();
    assert!((a.length - b.length).abs() < 1e-12);
    assert_eq!(s.topology.canonical_id, s.ties[0]);
}

#[test]
fn fixed_topology_examples() {
    let opts = SolveOptions::default();
    let all = enumerate_full_topologies(4).unwrap();
    let best = all
        .iter()
        .map(|t| optimize_topology(t, &unit_square(), &opts).unwrap().length)
        .fold(f64::INFINITY, f64::min);
    assert!((best - (1.0 + R3)).abs() < 1e-9);

    let tri = [p(0.0, 0.0), p(1.0, 0.0), p(0.5, R3 / 2.0)];
    let t3 = enumerate_full_topologies(3).unwrap().remove(0);
    let s = optimize_topology(&t3, &tri, &opts).unwrap();
    assert!((s.length - R3).abs() < 1e-12);
    assert!(s.steiner_points[0].dist(p(0.5, R3 / 6.0)) < 1e-12);

    let line = [p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0)];
    let s = optimize_topology(&t3, &line, &opts).unwrap();
    assert!((s.length - 2.0).abs() < 1e-12);
    assert!(s.converged);
    assert_eq!(s.collapsed_pairs, vec![(1, 3)]);
    assert_eq!(s.max_degree, 2);
}

#[test]
fn regular_tripod_example() {
    let lambda = 0.01;
    let y1 = p(0.0, 0.0);
    let b1 = p(1.0 + lambda / 2.0, R3 * lambda / 2.0);
    let c1 = p(1.0 + lambda / 2.0, -R3 * lambda / 2.0);
    let s = solve_steiner(&[y1, b1, c1], &SolveOptions::default()).unwrap();
    assert!((s.length - (1.0 + 2.0 * lambda)).abs() < 1e-12);
    assert!(s.steiner_points[0].dist(p(1.0, 0.0)) < 1e-12);
}

#[test]
fn depth_three_truncation() {
    let lambda = 1.0 / 300.0;
    let tree = build_sigma(&LambdaSequence::constant(lambda).unwrap(), 3).unwrap();
    let mut pts = vec![tree.vertex(0)];
    pts.extend(tree.leaves());
    let s = solve_steiner(&pts, &SolveOptions::default()).unwrap();
    let want = 1.0 + 2.0 * lambda + 4.0 * lambda * lambda;
    assert!((s.length - want).abs() < 1e-12 * want);
    assert!(s.min_angle >= 2.0 * PI / 3.0 - 1e-6);
}

#[test]
fn random_triples_match_melzak() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let opts = SolveOptions::default();
    for _ in 0..200 {
        let t = random_points(&mut rng, 3);
        let a = solve_steiner(&t, &opts).unwrap();
        let b = melzak3(t[0], t[1], t[2]).unwrap();
        assert!(
            (a.length - b.length).abs() < 1e-10,
            "{t:?}: {} vs {}",
            a.length,
            b.length
        );
    }
}

/// Length of the 4-terminal topology pairing `(a, b)` against `(c, d)` with
/// Steiner points `s`, `t`, every distance smoothed as `sqrt(d² + μ²)`.
fn smoothed(q: &[Point; 4], s: Point, t: Point, mu: f64) -> (f64, Point, Point) {
    let term = |u: Point, v: Point| {
        let d = u - v;
        let r = (d.dot(d) + mu * mu).sqrt();
        (r, d / r)
    };
    let (la, ga) = term(s, q[0]);
    let (lb, gb) = term(s, q[1]);
    let (lc, gc) = term(t, q[2]);
    let (ld, gd) = term(t, q[3]);
    let (lst, gst) = term(s, t);
    (la + lb + lc + ld + lst, ga + gb + gst, gc + gd - gst)
}

fn exact(q: &[Point; 4], s: Point, t: Point) -> f64 {
    q[0].dist(s) + q[1].dist(s) + q[2].dist(t) + q[3].dist(t) + s.dist(t)
}

/// Random-restart gradient descent with backtracking, annealing the
/// smoothing from 1e-2 down to 1e-13.
fn descent_oracle(pts: &[Point], rng: &mut ChaCha8Rng) -> f64 {
    let mut best = f64::INFINITY;
    for pairing in [[0, 1, 2, 3], [0, 2, 1, 3], [0, 3, 1, 2]] {
        let q = pairing.map(|i| pts[i]);
        for _ in 0..8 {
            let mut s = p(rng.gen(), rng.gen());
            let mut t = p(rng.gen(), rng.gen());
            let mut mu = 1e-2;
            while mu > 1e-13 {
                let mut step = 0.1;
                for _ in 0..4000 {
                    let (f, gs, gt) = smoothed(&q, s, t, mu);
                    let g2 = gs.dot(gs) + gt.dot(gt);
                    if g2 < 1e-30 {
                        break;
                    }
                    loop {
                        let (ns, nt) = (s - gs * step, t - gt * step);
                        if smoothed(&q, ns, nt, mu).0 <= f - 0.5 * step * g2 {
                            s = ns;
                            t = nt;
                            step *= 2.0;
                            break;
                        }
                        step *= 0.5;
                        if step < 1e-18 {
                            break;
                        }
                    }
                    if step < 1e-18 {
                        break;
                    }
                }
                mu *= 0.1;
            }
            best = best.min(exact(&q, s, t));
        }
    }
    best
}

#[test]
fn four_terminals_match_descent_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let opts = SolveOptions::default();
    for _ in 0..50 {
        let pts = random_points(&mut rng, 4);
        let s = solve_steiner(&pts, &opts).unwrap();
        let oracle = descent_oracle(&pts, &mut rng);
        assert!(
            (s.length - oracle).abs() < 1e-6,
            "{pts:?}: solver {} oracle {}",
            s.length,
            oracle
        );
    }
}

#[test]
fn solution_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let opts = SolveOptions::default();
    for n in 3..=7 {
        for _ in 0..8 {
            let pts = random_points(&mut rng, n);
            let s = solve_steiner(&pts, &opts).unwrap();
            assert!(s.converged);
            assert!(
                s.min_angle >= 2.0 * PI / 3.0 - 1e-6,
                "angle {}",
                s.min_angle
            );
            assert!(s.max_degree <= 3);
            assert!(s.length <= mst_length(&pts).unwrap() * (1.0 + 1e-12));
            assert!((s.length - s.edge_length_sum()).abs() < 1e-12);
            assert!(s.length >= 0.0);
            assert!(s.topology.is_well_formed());
            assert!(s.ties.contains(&s.topology.canonical_id));
            assert_eq!(s.terminals, pts);
        }
    }
}

#[test]
fn search_agrees_with_exhaustive_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let exhaustive = SolveOptions {
        prune_with_mst: false,
        ..SolveOptions::default()
    };
    for n in 4..=6 {
        for _ in 0..5 {
            let pts = random_points(&mut rng, n);
            let a = solve_steiner(&pts, &SolveOptions::default()).unwrap();
            let b = solve_steiner(&pts, &exhaustive).unwrap();
            assert_eq!(a.topology, b.topology);
            assert_eq!(a.ties, b.ties);
            assert_eq!(a.length, b.length);
        }
    }
}

#[test]
fn deterministic_under_parallelism() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let threads = std::thread::available_parallelism()
        .map_or(4, |n| n.get())
        .max(2);
    for _ in 0..3 {
        let pts = random_points(&mut rng, 7);
        let one = solve_steiner(
            &pts,
            &SolveOptions {
                jobs: Some(1),
                ..SolveOptions::default()
            },
        )
        .unwrap();
        let many = solve_steiner(
            &pts,
            &SolveOptions {
                jobs: Some(threads),
                ..SolveOptions::default()
            },
        )
        .unwrap();
        assert_eq!(one.length.to_bits(), many.length.to_bits());
        assert_eq!(one.topology.canonical_id, many.topology.canonical_id);
        assert_eq!(one.ties, many.ties);
    }
}

#[test]
fn sweeps_never_lengthen_the_tree() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for n in 4..=8 {
        let pts = random_points(&mut rng, n);
        let sites: Vec<Site> = pts.iter().map(|&q| Site::Point(q)).collect();
        let all = enumerate_full_topologies(n).unwrap();
        for t in all.iter().step_by(all.len() / 5 + 1) {
            let mut opt = FixedTopologyOptimizer::new(t, &sites);
            let mut prev = opt.length();
            for _ in 0..200 {
                let cur = opt.sweep();
                assert!(cur <= prev, "{cur} > {prev}");
                prev = cur;
            }
        }
    }
}

#[test]
fn iteration_limit_reports_non_convergence() {
    let t = enumerate_full_topologies(5).unwrap().remove(7);
    let pts = [
        p(0.0, 0.0),
        p(3.0, 0.2),
        p(1.0, 2.0),
        p(2.5, 2.5),
        p(0.3, 1.1),
    ];
    let opts = SolveOptions {
        max_iterations: 1,
        ..SolveOptions::default()
    };
    let s = optimize_topology(&t, &pts, &opts).unwrap();
    assert!(!s.converged);
    assert_eq!(s.iterations, 1);
}

#[test]
fn invalid_inputs() {
    let opts = SolveOptions::default();
    assert!(matches!(
        solve_steiner(&[p(0.0, 0.0), p(1.0, 0.0)], &opts),
        Err(Error::InvalidInput(_))
    ));
    let eleven: Vec<Point> = (0..11).map(|i| p(i as f64, (i * i) as f64)).collect();
    assert!(matches!(
        solve_steiner(&eleven, &opts),
        Err(Error::InvalidInput(_))
    ));
    assert!(matches!(
        solve_steiner(&[p(0.0, 0.0), p(1.0, 0.0), p(0.0, 0.0)], &opts),
        Err(Error::InvalidInput(_))
    ));
    assert!(matches!(
        solve_steiner(&[p(0.0, 0.0), p(1.0, 0.0), p(f64::NAN, 0.0)], &opts),
        Err(Error::InvalidInput(_))
    ));
    let bad = SolveOptions {
        convergence_tol: 0.0,
        ..SolveOptions::default()
    };
    assert!(solve_steiner(&unit_square(), &bad).is_err());
    let t = enumerate_full_topologies(4).unwrap().remove(0);
    assert!(optimize_topology(&t, &unit_square()[..3], &opts).is_err());
}

#[test]
fn segment_terminal_touches_where_it_should() {
    // two points above a long segment: the tree is a symmetric Y whose stem
    // drops perpendicularly onto the segment
    let sites = [
        Site::Point(p(-1.0, 1.0)),
        Site::Point(p(1.0, 1.0)),
        Site::Segment(Segment::new(p(-5.0, 0.0), p(5.0, 0.0)).unwrap()),
    ];
    let s = solve_sites(&sites, &SolveOptions::default()).unwrap();
    assert!((s.length - (1.0 + R3)).abs() < 1e-10);
    assert!(s.terminals[2].dist(p(0.0, 0.0)) < 1e-9);
    assert!(s.steiner_points[0].dist(p(0.0, 1.0 - 1.0 / R3)) < 1e-9);

    let crossing = [
        Site::Point(p(-1.0, 1.0)),
        Site::Point(p(1.0, 1.0)),
        Site::Segment(Segment::new(p(-1.0, 1.0), p(1.0, 0.0)).unwrap()),
    ];
    assert!(solve_sites(&crossing, &SolveOptions::default()).is_err());
}

#[test]
fn solution_json_shape() {
    let s = solve_steiner(&unit_square(), &SolveOptions::default()).unwrap();
    let v = serde_json::to_value(s.to_json()).unwrap();
    for key in [
        "length",
        "terminals",
        "steiner_points",
        "edges",
        "topology_id",
        "min_angle",
        "ties",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["edges"].as_array().unwrap().len(), 5);
    assert_eq!(v["ties"].as_array().unwrap().len(), 2);
}
