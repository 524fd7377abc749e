use crate::error::{invalid, Result};
use crate::geometry::Point;

/// Length of the Euclidean minimum spanning tree (Prim, O(n²)).
pub fn mst_length(points: &[Point]) -> Result<f64> {
    if points.len() < 2 {
        return invalid("minimum spanning tree needs at least two points");
    }
    let n = points.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut total = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&i| !in_tree[i])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .expect("vertex left");
        in_tree[u] = true;
        total += best[u];
        for v in 0..n {
            if !in_tree[v] {
                best[v] = best[v].min(points[u].dist(points[v]));
            }
        }
    }
    Ok(total)
}
