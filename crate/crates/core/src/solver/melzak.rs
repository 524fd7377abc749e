use crate::error::{invalid, Result};
use crate::geometry::{angle_at, Line, Point, DEGENERATE_ANGLE};

use super::optimize::{realized_tree, Frame};
use super::{enumerate_full_topologies, Site, SteinerSolution};

/// Apex of the equilateral triangle on `p q` lying on the opposite side from `away`.
fn outer_apex(p: Point, q: Point, away: Point) -> Point {
    let e1 = p + (q - p).rotate(std::f64::consts::FRAC_PI_3);
    let e2 = p + (q - p).rotate(-std::f64::consts::FRAC_PI_3);
    let side = |e: Point| (q - p).cross(e - p) * (q - p).cross(away - p);
    if side(e1) < side(e2) {
        e1
    } else {
        e2
    }
}

/// Exact Steiner tree of three terminals by the equilateral-point construction.
///
/// For a triangle with all angles below 120° the Steiner point is where the
/// Simpson lines `a E_a` and `b E_b` meet (`E_x` the outer equilateral apex
/// on the side opposite `x`), and the tree length equals `|a E_a|`. Otherwise
/// the tree is the two sides meeting at the wide angle.
pub fn melzak3(a: Point, b: Point, c: Point) -> Result<SteinerSolution> {
    let pts = [a, b, c];
    if pts.iter().any(|p| !p.is_finite()) {
        return invalid("non-finite coordinate");
    }
    if a == b || b == c || a == c {
        return invalid("terminals must be distinct");
    }
    let topology = enumerate_full_topologies(3)?.remove(0);
    let mut wide = None;
    for i in 0..3 {
        if angle_at(pts[i], pts[(i + 1) % 3], pts[(i + 2) % 3])? >= DEGENERATE_ANGLE {
            wide = Some(i);
        }
    }
    let (s, length) = match wide {
        Some(i) => {
            let s = pts[i];
            (s, pts.iter().map(|p| p.dist(s)).sum())
        }
        None => {
            let ea = outer_apex(b, c, a);
            let eb = outer_apex(c, a, b);
            let s = Line::through(a, ea)?
                .intersect(&Line::through(b, eb)?)
                .ok_or_else(|| crate::Error::SolverFailure("parallel Simpson lines".into()))?;
            (s, a.dist(ea))
        }
    };
    let mut pos = pts.to_vec();
    pos.push(s);
    let frame = Frame::of(&pts.map(Site::Point));
    let r = realized_tree(&topology, &pos, frame.collapse_distance());
    Ok(SteinerSolution {
        topology,
        terminals: pts.to_vec(),
        steiner_points: vec![s],
        length,
        converged: true,
        collapsed_pairs: r.collapsed_pairs,
        min_angle: r.min_angle,
        max_degree: r.max_degree,
        ties: vec![0],
        iterations: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equilateral() {
        let s = melzak3(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 3f64.sqrt() / 2.0),
        )
        .unwrap();
        assert!((s.length - 3f64.sqrt()).abs() < 1e-14);
        assert!(s.steiner_points[0].dist(Point::new(0.5, 3f64.sqrt() / 6.0)) < 1e-14);
        assert!((s.min_angle - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn simpson_length_equals_tripod_length() {
        let (a, b, c) = (
            Point::new(0.0, 0.0),
            Point::new(4.0, 0.3),
            Point::new(1.2, 2.5),
        );
        let s = melzak3(a, b, c).unwrap();
        let p = s.steiner_points[0];
        let tripod = a.dist(p) + b.dist(p) + c.dist(p);
        assert!((tripod - s.length).abs() < 1e-13);
    }

    #[test]
    fn scaled_second_triangle() {
        let lambda = 0.01;
        let r3 = 3f64.sqrt();
        let s = melzak3(
            Point::new(0.0, 0.0),
            Point::new(0.25 + lambda / 2.0, r3 * lambda / 2.0),
            Point::new(0.25 + lambda / 2.0, -r3 * lambda / 2.0),
        )
        .unwrap();
        assert!((s.length - (0.25 + 2.0 * lambda)).abs() < 1e-15);
        assert!(s.steiner_points[0].dist(Point::new(0.25, 0.0)) < 1e-15);
    }

    #[test]
    fn obtuse_is_path() {
        let s = melzak3(
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(-1.0, 0.2),
        )
        .unwrap();
        assert_eq!(s.steiner_points[0], Point::new(0.0, 0.0));
        assert!((s.length - (1.0 + 1.04f64.sqrt())).abs() < 1e-15);
        assert_eq!(s.collapsed_pairs, vec![(0, 3)]);
        assert_eq!(s.max_degree, 2);
    }

    #[test]
    fn rejects_duplicates() {
        let p = Point::new(1.0, 1.0);
        assert!(melzak3(p, p, Point::ORIGIN).is_err());
    }
}
