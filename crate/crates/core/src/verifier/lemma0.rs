use std::f64::consts::{FRAC_PI_3, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fractal::epsilon_of;
use crate::geometry::Point;
use crate::solver::melzak3;

use super::LemmaReport;

const R3: f64 = 1.732_050_807_568_877_2;

/// Tripod upper bound against the two lower bounds for one triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ItemBounds {
    /// Length of the stem `|Y T|`.
    pub base: f64,
    pub tripod_upper: f64,
    pub two_seg_lower: f64,
    pub relaxed_lower: f64,
    pub two_seg_margin: f64,
    pub relaxed_margin: f64,
    pub pass: bool,
}

impl ItemBounds {
    fn new(base: f64, lambda: f64, eps: f64) -> Self {
        let tripod_upper = base + 2.0 * lambda + 20.0 * eps;
        let two_seg_lower =
            (base * base + base * lambda + lambda * lambda).sqrt() + R3 * lambda - 30.0 * eps;
        let relaxed_lower = base + (0.5 + R3) * lambda - 30.0 * eps;
        ItemBounds {
            base,
            tripod_upper,
            two_seg_lower,
            relaxed_lower,
            two_seg_margin: two_seg_lower - tripod_upper,
            relaxed_margin: relaxed_lower - tripod_upper,
            pass: relaxed_lower > tripod_upper,
        }
    }
}

/// Worst observed change of the two competing lengths when both ball
/// centres move by `10ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCheck {
    pub samples: usize,
    pub max_tripod_increase: f64,
    pub max_tripod_change: f64,
    pub min_two_seg_change: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaZeroBounds {
    pub lambda: f64,
    pub epsilon: f64,
    pub item_i: ItemBounds,
    pub item_ii: ItemBounds,
    /// `18ε - (2π + 9)ε`: what replacing two circle crossings saves.
    pub surgery_gain: f64,
    pub surgery_pass: bool,
    pub perturbation_i: PerturbationCheck,
    pub perturbation_ii: PerturbationCheck,
    pub pass: bool,
}

fn triangle(base: f64, lambda: f64) -> (Point, Point, Point) {
    let b = Point::new(base + lambda / 2.0, R3 * lambda / 2.0);
    (Point::ORIGIN, b, Point::new(b.x, -b.y))
}

fn two_segments(y: Point, b: Point, c: Point) -> f64 {
    (y.dist(b) + b.dist(c)).min(y.dist(c) + c.dist(b))
}

fn perturb(base: f64, lambda: f64, eps: f64) -> Result<PerturbationCheck> {
    let (y, b, c) = triangle(base, lambda);
    let tripod0 = melzak3(y, b, c)?.length;
    let two0 = two_segments(y, b, c);
    let rho = 10.0 * eps;
    // a 16-point circle plus the outward leg directions, where the tripod
    // grows fastest
    let mut angles: Vec<f64> = (0..16).map(|k| k as f64 * PI / 8.0).collect();
    angles.extend([FRAC_PI_3, -FRAC_PI_3]);
    let (mut up, mut change, mut down) = (f64::NEG_INFINITY, 0.0f64, f64::INFINITY);
    for &a in &angles {
        for &g in &angles {
            let b1 = b + Point::polar(a) * rho;
            let c1 = c + Point::polar(g) * rho;
            let t = melzak3(y, b1, c1)?.length - tripod0;
            up = up.max(t);
            change = change.max(t.abs());
            down = down.min(two_segments(y, b1, c1) - two0);
        }
    }
    let slack = 1e-12;
    Ok(PerturbationCheck {
        samples: angles.len() * angles.len(),
        max_tripod_increase: up,
        max_tripod_change: change,
        min_two_seg_change: down,
        pass: change <= 20.0 * eps + slack && down >= -30.0 * eps - slack,
    })
}

/// Evaluates the length inequalities that force a minimal tree to be a
/// regular tripod away from the two small balls.
pub fn check_lemma0(lambda: f64) -> Result<LemmaZeroBounds> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return invalid(format!("λ = {lambda} outside (0, 1)"));
    }
    let eps = epsilon_of(lambda)?;
    let item_i = ItemBounds::new(1.0, lambda, eps);
    let item_ii = ItemBounds::new(0.25, lambda, eps);
    let surgery_gain = 18.0 * eps - (2.0 * PI + 9.0) * eps;
    let surgery_pass = 2.0 * PI < 9.0;
    let perturbation_i = perturb(1.0, lambda, eps)?;
    let perturbation_ii = perturb(0.25, lambda, eps)?;
    let pass =
        item_i.pass && item_ii.pass && surgery_pass && perturbation_i.pass && perturbation_ii.pass;
    Ok(LemmaZeroBounds {
        lambda,
        epsilon: eps,
        item_i,
        item_ii,
        surgery_gain,
        surgery_pass,
        perturbation_i,
        perturbation_ii,
        pass,
    })
}

/// The `λ` in `(lo, hi)` where the relaxed margin of item (i) changes sign,
/// by bisection to full precision.
pub fn lemma0_crossing(lo: f64, hi: f64) -> Result<f64> {
    let margin =
        |l: f64| -> Result<f64> { Ok(ItemBounds::new(1.0, l, epsilon_of(l)?).relaxed_margin) };
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (margin(a)?, margin(b)?);
    if fa.signum() == fb.signum() {
        return invalid("relaxed margin has the same sign at both ends");
    }
    while b - a > 4.0 * f64::EPSILON * b {
        let m = 0.5 * (a + b);
        if margin(m)?.signum() == fa.signum() {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

impl LemmaZeroBounds {
    pub fn report(&self) -> LemmaReport {
        let mut r = LemmaReport::new("lemma0_bounds").input("lambda", self.lambda);
        r.value("epsilon", self.epsilon);
        for (tag, item) in [("i", &self.item_i), ("ii", &self.item_ii)] {
            r.value(&format!("{tag}.tripod_upper"), item.tripod_upper);
            r.value(&format!("{tag}.two_seg_lower"), item.two_seg_lower);
            r.value(&format!("{tag}.relaxed_lower"), item.relaxed_lower);
            r.margin(&format!("{tag}.two_seg"), item.two_seg_margin);
            r.margin(&format!("{tag}.relaxed"), item.relaxed_margin);
        }
        r.margin("surgery", self.surgery_gain);
        for (tag, p) in [("i", &self.perturbation_i), ("ii", &self.perturbation_ii)] {
            r.value(&format!("{tag}.max_tripod_change"), p.max_tripod_change);
            r.value(&format!("{tag}.min_two_seg_change"), p.min_two_seg_change);
            r.margin(
                &format!("{tag}.tripod_shift"),
                20.0 * self.epsilon - p.max_tripod_change,
            );
            r.margin(
                &format!("{tag}.two_seg_shift"),
                p.min_two_seg_change + 30.0 * self.epsilon,
            );
        }
        r.tolerances.insert("perturbation_slack".into(), 1e-12);
        r.pass = self.pass;
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn margin_at_threshold() {
        let b = check_lemma0(1.0 / 300.0 * 0.999).unwrap();
        assert!(b.pass);
        assert!((b.item_i.relaxed_margin - 2.16e-4).abs() < 0.1 * 2.16e-4);
        assert!(b.item_ii.relaxed_margin > 0.0);
        assert!(b.item_i.two_seg_margin >= b.item_i.relaxed_margin);
    }

    #[test]
    fn sufficient_condition_fails_at_larger_lambda() {
        let b = check_lemma0(0.02).unwrap();
        assert!(!b.pass);
        assert!(b.item_i.relaxed_margin < 0.0);
        assert!(b.surgery_pass && b.surgery_gain > 0.0);
    }

    #[test]
    fn crossing_matches_closed_form() {
        let x = lemma0_crossing(1.0 / 300.0, 1.0 / 15.0).unwrap();
        // (√3 - 3/2)(1 - λ) = 50 λ
        let want = (R3 - 1.5) / (50.0 + R3 - 1.5);
        assert!((x - want).abs() < 1e-15);
        assert!(lemma0_crossing(0.1, 0.2).is_err());
    }

    #[test]
    fn perturbations_respect_bounds() {
        for l in [1.0 / 3000.0, 1.0 / 1000.0, 1.0 / 500.0, 1.0 / 301.0] {
            let b = check_lemma0(l).unwrap();
            assert!(b.pass, "{l}");
            let eps = b.epsilon;
            // the bound is attained when both ends move outward along the legs
            assert!((b.perturbation_i.max_tripod_increase - 20.0 * eps).abs() < 1e-9 * eps);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(check_lemma0(0.0).is_err());
        assert!(check_lemma0(1.0).is_err());
    }
}
