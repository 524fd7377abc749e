//! Planar primitives: points, segments, lines, Fermat points, reflections,
//! exact segment intersection and distance sums inside equilateral triangles.

use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Interior angle (radians) at or above which a triangle's Fermat point is
/// the vertex itself.
pub const DEGENERATE_ANGLE: f64 = 2.0 * PI / 3.0 - 1e-12;

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    /// Unit vector at angle `theta` from the positive x-axis.
    pub fn polar(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Point::new(c, s)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Counterclockwise rotation about the origin.
    pub fn rotate(self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn midpoint(self, other: Point) -> Self {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

impl Div<f64> for Point {
    type Output = Point;
    fn div(self, k: f64) -> Point {
        Point::new(self.x / k, self.y / k)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

fn check_finite(points: &[Point]) -> Result<()> {
    if points.iter().all(|p| p.is_finite()) {
        Ok(())
    } else {
        invalid("non-finite coordinate")
    }
}

/// Closed segment with distinct endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        check_finite(&[a, b])?;
        if a == b {
            return invalid("segment endpoints coincide");
        }
        Ok(Segment { a, b })
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn midpoint(&self) -> Point {
        self.a.midpoint(self.b)
    }

    /// Closest point of the segment to `p`.
    pub fn project(&self, p: Point) -> Point {
        let d = self.b - self.a;
        let t = ((p - self.a).dot(d) / d.dot(d)).clamp(0.0, 1.0);
        self.a + d * t
    }

    pub fn distance_to(&self, p: Point) -> f64 {
        p.dist(self.project(p))
    }
}

/// Infinite line through `origin` with unit `direction`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub origin: Point,
    pub direction: Point,
}

impl Line {
    pub fn new(origin: Point, direction: Point) -> Result<Self> {
        check_finite(&[origin, direction])?;
        let n = direction.norm();
        if n == 0.0 || !n.is_finite() {
            return invalid("line direction has zero length");
        }
        Ok(Line {
            origin,
            direction: direction / n,
        })
    }

    pub fn through(a: Point, b: Point) -> Result<Self> {
        if a == b {
            return invalid("line through coincident points");
        }
        Line::new(a, b - a)
    }

    pub fn x_axis() -> Self {
        Line {
            origin: Point::ORIGIN,
            direction: Point::new(1.0, 0.0),
        }
    }

    /// Unsigned distance from `p` to the line.
    pub fn distance_to(&self, p: Point) -> f64 {
        self.direction.cross(p - self.origin).abs()
    }

    pub fn project(&self, p: Point) -> Point {
        self.origin + self.direction * (p - self.origin).dot(self.direction)
    }

    /// Intersection point of two lines, `None` when parallel.
    pub fn intersect(&self, other: &Line) -> Option<Point> {
        let denom = self.direction.cross(other.direction);
        if denom == 0.0 {
            return None;
        }
        let t = (other.origin - self.origin).cross(other.direction) / denom;
        Some(self.origin + self.direction * t)
    }
}

/// Mirror image of `p` across `axis`.
pub fn reflect(p: Point, axis: &Line) -> Point {
    let v = p - axis.origin;
    let along = axis.direction * v.dot(axis.direction);
    axis.origin + along * 2.0 - v
}

/// Unsigned angle in `[0, π]` between the rays `vertex→p` and `vertex→q`.
pub fn angle_at(vertex: Point, p: Point, q: Point) -> Result<f64> {
    check_finite(&[vertex, p, q])?;
    if p == vertex || q == vertex {
        return invalid("zero-length ray in angle computation");
    }
    Ok(angle_between(p - vertex, q - vertex))
}

pub(crate) fn angle_between(u: Point, v: Point) -> f64 {
    u.cross(v).abs().atan2(u.dot(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FermatResult {
    pub point: Point,
    pub degenerate: bool,
    pub tripod_length: f64,
    /// Index (0, 1, 2) of the input vertex the minimum sits on when degenerate.
    pub attained_at_vertex: Option<usize>,
}

/// Fermat–Torricelli point of a triangle: the point minimising the sum of
/// distances to the three vertices.
pub fn fermat_point(a: Point, b: Point, c: Point) -> Result<FermatResult> {
    check_finite(&[a, b, c])?;
    if a == b || b == c || a == c {
        return invalid("coincident triangle vertices");
    }
    let verts = [a, b, c];
    let angles = [
        angle_between(b - a, c - a),
        angle_between(a - b, c - b),
        angle_between(a - c, b - c),
    ];
    let (widest, &max_angle) = angles
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.total_cmp(y.1))
        .expect("three angles");
    let (point, attained) = if max_angle >= DEGENERATE_ANGLE {
        (verts[widest], Some(widest))
    } else {
        (isogonic_center(a, b, c), None)
    };
    Ok(FermatResult {
        point,
        degenerate: attained.is_some(),
        tripod_length: point.dist(a) + point.dist(b) + point.dist(c),
        attained_at_vertex: attained,
    })
}

/// First isogonic center in barycentric form. The weight of vertex `A` is
/// `1 / (|AB×AC| + √3·AB·AC)`, i.e. inversely proportional to
/// `|AB||AC| sin(A + π/3)`.
fn isogonic_center(a: Point, b: Point, c: Point) -> Point {
    let ab = b - a;
    let ac = c - a;
    let cr = ab.cross(ac).abs();
    let wa = 1.0 / (cr + SQRT3 * ab.dot(ac));
    let wb = 1.0 / (cr + SQRT3 * (a - b).dot(c - b));
    let wc = 1.0 / (cr + SQRT3 * (a - c).dot(b - c));
    a + (ab * wb + ac * wc) / (wa + wb + wc)
}

/// Fermat point without input validation, used in the optimizer inner loop.
/// Coincident vertices are allowed: the minimiser then sits on the repeated
/// vertex. A vertex that wins returns that vertex bit-for-bit.
pub(crate) fn fermat_point_fast(a: Point, b: Point, c: Point) -> Point {
    if a == b || a == c {
        return a;
    }
    if b == c {
        return b;
    }
    let ab = b - a;
    let ac = c - a;
    let bc = c - b;
    let cr = ab.cross(ac).abs();
    // den_v = 2|e1||e2| sin(angle_v + π/3); non-positive once angle_v ≥ 2π/3.
    let da = cr + SQRT3 * ab.dot(ac);
    let db = cr - SQRT3 * ab.dot(bc);
    let dc = cr + SQRT3 * ac.dot(bc);
    let (lab, lac, lbc) = (ab.norm(), ac.norm(), bc.norm());
    let tol = 2e-12;
    if da <= tol * lab * lac {
        return a;
    }
    if db <= tol * lab * lbc {
        return b;
    }
    if dc <= tol * lac * lbc {
        return c;
    }
    a + (ab / db + ac / dc) / (1.0 / da + 1.0 / db + 1.0 / dc)
}

fn to_coord(p: Point) -> robust::Coord<f64> {
    robust::Coord { x: p.x, y: p.y }
}

/// Exact sign of the orientation determinant of `(a, b, c)`: positive when
/// counterclockwise.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    robust::orient2d(to_coord(a), to_coord(b), to_coord(c))
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// `p` lies inside the bounding box of `s`; with exact collinearity this
/// means `p` is on the closed segment.
fn in_box(s: &Segment, p: Point) -> bool {
    p.x >= s.a.x.min(s.b.x)
        && p.x <= s.a.x.max(s.b.x)
        && p.y >= s.a.y.min(s.b.y)
        && p.y <= s.a.y.max(s.b.y)
}

/// Whether two closed segments meet.
///
/// When `shared` names an endpoint common to both segments (two adjacent tree
/// edges), touching at that endpoint alone is not an intersection; only a
/// collinear overlap beyond it counts.
pub fn segments_intersect(s1: &Segment, s2: &Segment, shared: Option<Point>) -> bool {
    if let Some(p) = shared {
        let other1 = if s1.a == p {
            Some(s1.b)
        } else if s1.b == p {
            Some(s1.a)
        } else {
            None
        };
        let other2 = if s2.a == p {
            Some(s2.b)
        } else if s2.b == p {
            Some(s2.a)
        } else {
            None
        };
        if let (Some(u), Some(v)) = (other1, other2) {
            if orient(p, u, v) != 0.0 {
                return false;
            }
            // collinear: overlap iff both run to the same side of p
            return sign(u.x - p.x) == sign(v.x - p.x) && sign(u.y - p.y) == sign(v.y - p.y);
        }
    }
    let o1 = sign(orient(s1.a, s1.b, s2.a));
    let o2 = sign(orient(s1.a, s1.b, s2.b));
    let o3 = sign(orient(s2.a, s2.b, s1.a));
    let o4 = sign(orient(s2.a, s2.b, s1.b));
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    (o1 == 0 && in_box(s1, s2.a))
        || (o2 == 0 && in_box(s1, s2.b))
        || (o3 == 0 && in_box(s2, s1.a))
        || (o4 == 0 && in_box(s2, s1.b))
}

/// Sum of the distances from `p` to the three side lines of an equilateral
/// triangle. Constant (the height) for every point of the closed triangle.
pub fn distance_sum_to_sides(p: Point, tri: (Point, Point, Point)) -> Result<f64> {
    let (a, b, c) = tri;
    check_finite(&[p, a, b, c])?;
    let sides = [a.dist(b), b.dist(c), c.dist(a)];
    let mean = sides.iter().sum::<f64>() / 3.0;
    if mean == 0.0 || sides.iter().any(|s| (s - mean).abs() > 1e-9 * mean) {
        return invalid("triangle is not equilateral");
    }
    let ccw = orient(a, b, c) > 0.0;
    let mut total = 0.0;
    for (u, v) in [(a, b), (b, c), (c, a)] {
        let signed = (v - u).cross(p - u) / u.dist(v);
        let inward = if ccw { signed } else { -signed };
        if inward < -1e-12 * mean {
            return invalid("point lies outside the triangle");
        }
        total += inward.abs();
    }
    Ok(total)
}
