use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fractal::epsilon_of;
use crate::geometry::{distance_sum_to_sides, reflect, Line, Point, Segment};
use crate::solver::{solve_sites, solve_steiner, Site, SolveOptions};

use super::LemmaReport;

const R3: f64 = 1.732_050_807_568_877_2;
const TOL: f64 = 1e-12;

/// The equilateral triangle `DEF` around the first isosceles triangle and the
/// two short segments on its sides through which every minimal tree passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaOneConstruction {
    pub lambda: f64,
    pub y1: Point,
    pub t1: Point,
    pub b1: Point,
    pub c1: Point,
    pub d: Point,
    pub e: Point,
    pub f: Point,
    pub z: Point,
    pub z_l: Point,
    pub z_r: Point,
    pub v: Point,
    pub v_l: Point,
    pub v_r: Point,
    pub axis: Line,
}

/// Builds the configuration in the frame `Y₁ = (0,0)`, `T₁ = (1,0)`, with
/// `Z` and `V` obtained by intersecting lines.
pub fn build_lemma1(lambda: f64) -> Result<LemmaOneConstruction> {
    if !(lambda > 0.0 && lambda < 0.25) {
        return invalid(format!("λ = {lambda} outside (0, 1/4)"));
    }
    let y1 = Point::ORIGIN;
    let t1 = Point::new(1.0, 0.0);
    let b1 = Point::new(1.0 + lambda / 2.0, R3 * lambda / 2.0);
    let c1 = Point::new(b1.x, -b1.y);
    let height = 1.0 + 1.5 * lambda;
    let f = Point::new(height, 0.0);
    let d = Point::new(0.0, height / R3);
    let e = Point::new(0.0, -height / R3);
    let meet = |p: Point, q: Point, r: Point, s: Point| -> Result<Point> {
        Line::through(p, q)?
            .intersect(&Line::through(r, s)?)
            .ok_or_else(|| Error::SolverFailure("parallel construction lines".into()))
    };
    let z = meet(d, f, t1, b1)?;
    let v = meet(e, f, t1, c1)?;
    let along_df = (f - d) / f.dist(d);
    let along_ef = (f - e) / f.dist(e);
    let half = lambda / 2.0;
    Ok(LemmaOneConstruction {
        lambda,
        y1,
        t1,
        b1,
        c1,
        d,
        e,
        f,
        z,
        z_l: z - along_df * half,
        z_r: z + along_df * half,
        v,
        v_l: v - along_ef * half,
        v_r: v + along_ef * half,
        axis: Line::x_axis(),
    })
}

impl LemmaOneConstruction {
    /// `Z` in closed form.
    pub fn z_closed_form(&self) -> Point {
        let l = self.lambda;
        Point::new(1.0 + 3.0 * l / 8.0, 3.0 * R3 * l / 8.0)
    }

    /// `Z_l` in closed form.
    pub fn z_l_closed_form(&self) -> Point {
        let l = self.lambda;
        Point::new(
            1.0 + 3.0 * l / 8.0 - R3 * l / 4.0,
            3.0 * R3 * l / 8.0 + l / 4.0,
        )
    }

    /// `Z_r` in closed form.
    pub fn z_r_closed_form(&self) -> Point {
        let l = self.lambda;
        Point::new(
            1.0 + 3.0 * l / 8.0 + R3 * l / 4.0,
            3.0 * R3 * l / 8.0 - l / 4.0,
        )
    }

    pub fn report(&self) -> LemmaReport {
        let l = self.lambda;
        let mut r = LemmaReport::new("lemma1_construction").input("lambda", l);
        let mirror = |p: Point| reflect(p, &self.axis);
        r.within("y1f_length", self.y1.dist(self.f) - (1.0 + 1.5 * l), TOL);
        r.within("y1_midpoint_de", self.y1.dist(self.d.midpoint(self.e)), TOL);
        r.within(
            "def_equilateral_de_ef",
            self.d.dist(self.e) - self.e.dist(self.f),
            TOL,
        );
        r.within(
            "def_equilateral_ef_fd",
            self.e.dist(self.f) - self.f.dist(self.d),
            TOL,
        );
        r.within("zlzr_length", self.z_l.dist(self.z_r) - l, TOL);
        r.within("vlvr_length", self.v_l.dist(self.v_r) - l, TOL);
        r.within("z_midpoint", self.z.dist(self.z_l.midpoint(self.z_r)), TOL);
        r.within("z_closed_form", self.z.dist(self.z_closed_form()), TOL);
        r.within(
            "z_l_closed_form",
            self.z_l.dist(self.z_l_closed_form()),
            TOL,
        );
        r.within(
            "z_r_closed_form",
            self.z_r.dist(self.z_r_closed_form()),
            TOL,
        );
        r.within("mirror_b1_c1", mirror(self.b1).dist(self.c1), TOL);
        r.within("mirror_d_e", mirror(self.d).dist(self.e), TOL);
        r.within("mirror_z_v", mirror(self.z).dist(self.v), TOL);
        r.within("mirror_zl_vl", mirror(self.z_l).dist(self.v_l), TOL);
        r.within("mirror_zr_vr", mirror(self.z_r).dist(self.v_r), TOL);
        // a tripod from Y₁ to both segments is as long as the triangle's height
        if let Ok(s) = distance_sum_to_sides(self.z, (self.d, self.e, self.f)) {
            r.value("side_distance_sum_at_z", s);
            r.within("side_distance_sum", s - (1.0 + 1.5 * l), TOL);
        }
        r.value("z.x", self.z.x);
        r.value("z.y", self.z.y);
        r.value("z_l.x", self.z_l.x);
        r.value("z_l.y", self.z_l.y);
        r
    }
}

/// Length of a minimal network joining `sites`.
fn minimal_length(sites: &[Site]) -> Result<f64> {
    match sites {
        [Site::Point(p), Site::Point(q)] => Ok(p.dist(*q)),
        [Site::Point(p), Site::Segment(s)] | [Site::Segment(s), Site::Point(p)] => {
            Ok(s.distance_to(*p))
        }
        _ => Ok(solve_sites(sites, &SolveOptions::default())?.length),
    }
}

/// Offsets (fraction of `ε`, angle) of the sample points around `B₁`;
/// deliberately without any symmetry of their own.
const BALL_SAMPLES: [(f64, f64); 3] = [(0.35, 0.4), (0.8, 2.5), (0.6, 4.4)];

/// Cuts the minimal tree for `{Y₁} ∪ b₁ ∪ c₁` along the two segments of the
/// construction and compares its length with the three sub-problems, the
/// segments being exact terminals.
pub fn check_lemma1_decomposition(lambda: f64, samples_per_ball: usize) -> Result<LemmaReport> {
    if !(1..=3).contains(&samples_per_ball) {
        return invalid("samples per ball must be 1, 2 or 3");
    }
    let c = build_lemma1(lambda)?;
    let eps = epsilon_of(lambda)?;
    let b: Vec<Point> = if samples_per_ball == 1 {
        vec![c.b1]
    } else {
        BALL_SAMPLES[..samples_per_ball]
            .iter()
            .map(|&(r, a)| c.b1 + Point::polar(a) * (r * eps))
            .collect()
    };
    let mirrored: Vec<Point> = b.iter().map(|&p| reflect(p, &c.axis)).collect();

    let mut terminals = vec![c.y1];
    terminals.extend(&b);
    terminals.extend(&mirrored);
    let full = solve_steiner(&terminals, &SolveOptions::default())?;

    let upper = Segment::new(c.z_l, c.z_r)?;
    let lower = Segment::new(c.v_l, c.v_r)?;
    let mid = minimal_length(&[
        Site::Point(c.y1),
        Site::Segment(upper),
        Site::Segment(lower),
    ])?;
    let with = |seg: Segment, pts: &[Point]| {
        let mut s = vec![Site::Segment(seg)];
        s.extend(pts.iter().map(|&p| Site::Point(p)));
        minimal_length(&s)
    };
    let up = with(upper, &b)?;
    let down = with(lower, &mirrored)?;

    // the optimum's mirror image: same edges, reflected nodes
    let image = |id: usize| reflect(full.node(id), &c.axis);
    let reflected: f64 = full
        .topology
        .edges
        .iter()
        .map(|&(u, v)| image(u as usize).dist(image(v as usize)))
        .sum();
    let asymmetry = full
        .steiner_points
        .iter()
        .map(|&p| {
            let q = reflect(p, &c.axis);
            full.steiner_points
                .iter()
                .map(|s| s.dist(q))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0f64, f64::max);

    let mut r = LemmaReport::new("lemma1_decomposition")
        .input("lambda", lambda)
        .input("samples_per_ball", samples_per_ball as f64)
        .input("epsilon", eps);
    r.value("full_length", full.length);
    r.value("mid_length", mid);
    r.value("up_length", up);
    r.value("down_length", down);
    r.value("reflected_length", reflected);
    r.value("optimum_mirror_asymmetry", asymmetry);
    r.value("ties", full.ties.len() as f64);
    r.within("decomposition", full.length - (mid + up + down), 1e-8);
    r.within(
        "symmetric_competitor",
        full.length - (mid + 2.0 * down),
        1e-8,
    );
    r.within("up_down_mirror", up - down, 1e-10);
    r.within("reflected_optimum", reflected - full.length, 1e-10);
    r.within("mid_is_height", mid - (1.0 + 1.5 * lambda), 1e-10);
    if samples_per_ball == 1 {
        r.within(
            "single_sample_tripod",
            full.length - (1.0 + 2.0 * lambda),
            1e-12,
        );
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_at_one_tenth() {
        let c = build_lemma1(0.1).unwrap();
        assert!(c.z.dist(Point::new(1.0375, 0.064_951_905_283_832_9)) < 1e-12);
        assert!(
            c.z_l.dist(Point::new(
                1.0375 - 0.043_301_270_189_221_9,
                0.089_951_905_283_832_9
            )) < 1e-12
        );
        assert!(reflect(c.z_l, &c.axis).dist(c.v_l) < 1e-12);
        assert!(c.report().pass);
    }

    #[test]
    fn range_checked() {
        assert!(build_lemma1(0.0).is_err());
        assert!(build_lemma1(0.25).is_err());
        assert!(check_lemma1_decomposition(0.003, 4).is_err());
    }

    #[test]
    fn single_sample_is_regular_tripod() {
        let r = check_lemma1_decomposition(1.0 / 300.0, 1).unwrap();
        assert!(r.pass, "{r:?}");
        let l = 1.0 / 300.0;
        assert!((r.computed_values["full_length"] - (1.0 + 2.0 * l)).abs() < 1e-12);
        assert!((r.computed_values["up_length"] - l / 4.0).abs() < 1e-12);
    }
}
