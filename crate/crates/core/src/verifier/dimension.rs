use std::collections::HashSet;

use crate::error::{invalid, Result};
use crate::geometry::Point;

/// Box-counting dimension: the least-squares slope of `ln N(s)` against
/// `ln(1/s)`, `N(s)` being the number of occupied cells of the grid with
/// side `s` anchored at the origin.
pub fn estimate_dimension(points: &[Point], scales: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return invalid("no points");
    }
    if points.iter().any(|p| !p.is_finite()) {
        return invalid("non-finite point");
    }
    let mut s: Vec<f64> = scales.to_vec();
    if s.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return invalid("scales must be positive and finite");
    }
    s.sort_by(f64::total_cmp);
    s.dedup();
    if s.len() < 2 {
        return invalid("need at least two distinct scales");
    }
    let samples: Vec<(f64, f64)> = s
        .iter()
        .map(|&size| {
            let cells: HashSet<(i64, i64)> = points
                .iter()
                .map(|p| ((p.x / size).floor() as i64, (p.y / size).floor() as i64))
                .collect();
            (-size.ln(), (cells.len() as f64).ln())
        })
        .collect();
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_has_dimension_zero() {
        let d = estimate_dimension(&[Point::new(0.3, 0.7)], &[0.1, 0.01, 0.001]).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn degenerate_scales() {
        let p = [Point::ORIGIN];
        assert!(estimate_dimension(&p, &[0.1]).is_err());
        assert!(estimate_dimension(&p, &[0.1, 0.1]).is_err());
        assert!(estimate_dimension(&p, &[0.1, -1.0]).is_err());
        assert!(estimate_dimension(&[], &[0.1, 0.01]).is_err());
    }
}
