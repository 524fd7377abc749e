use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fractal::{build_sigma, total_length, Depth, LambdaSequence};
use crate::solver::{solve_steiner, SolveOptions};

use super::LemmaReport;

/// The exact Steiner tree of `{y₀} ∪ leaves` against the truncated fractal tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub lambda: f64,
    pub depth: u32,
    pub truncation_length: f64,
    pub oracle_length: f64,
    pub relative_gap: f64,
    /// `Σ_{i<k} (2λ)^i` for `k = 1..=depth`.
    pub per_step_lower_bounds: Vec<f64>,
    /// Largest distance from an internal vertex `y_k` to its matched Steiner point.
    pub max_vertex_deviation: f64,
    pub topology_id: usize,
    pub ties: usize,
    pub pass: bool,
}

pub fn check_theorem(lambda: f64, depth: u32) -> Result<TheoremReport> {
    check_theorem_with(lambda, depth, &SolveOptions::default())
}

/// [`check_theorem`] with explicit solver settings.
pub fn check_theorem_with(lambda: f64, depth: u32, opts: &SolveOptions) -> Result<TheoremReport> {
    if !(lambda > 0.0 && lambda < 0.5) {
        return invalid(format!("λ = {lambda} outside (0, 1/2)"));
    }
    if !(2..=4).contains(&depth) {
        return invalid(format!("depth {depth} outside 2..=4"));
    }
    let seq = LambdaSequence::constant(lambda)?;
    let tree = build_sigma(&seq, depth)?;
    let mut terminals = vec![tree.vertex(0)];
    terminals.extend(tree.leaves());
    let sol = solve_steiner(&terminals, opts)?;
    let truncation_length = total_length(&seq, Depth::Finite(depth))?;

    let internal: Vec<_> = (1..(1usize << (depth - 1)))
        .map(|k| tree.vertex(k))
        .collect();
    let mut used = vec![false; sol.steiner_points.len()];
    let mut max_vertex_deviation = 0.0f64;
    for y in &internal {
        let best = sol
            .steiner_points
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, p)| (i, p.dist(*y)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((i, d)) => {
                used[i] = true;
                max_vertex_deviation = max_vertex_deviation.max(d);
            }
            None => max_vertex_deviation = f64::INFINITY,
        }
    }

    let per_step_lower_bounds = (1..=depth as i32)
        .map(|k| (0..k).map(|i| (2.0 * lambda).powi(i)).sum())
        .collect();
    let relative_gap = (truncation_length - sol.length).abs() / sol.length;
    Ok(TheoremReport {
        lambda,
        depth,
        truncation_length,
        oracle_length: sol.length,
        relative_gap,
        per_step_lower_bounds,
        max_vertex_deviation,
        topology_id: sol.topology.canonical_id,
        ties: sol.ties.len(),
        pass: relative_gap < 1e-9 && max_vertex_deviation < 1e-7,
    })
}

impl TheoremReport {
    pub fn report(&self) -> LemmaReport {
        let mut r = LemmaReport::new("theorem_truncation")
            .input("lambda", self.lambda)
            .input("depth", self.depth as f64);
        r.value("truncation_length", self.truncation_length);
        r.value("oracle_length", self.oracle_length);
        r.value("topology_id", self.topology_id as f64);
        r.value("ties", self.ties as f64);
        for (k, b) in self.per_step_lower_bounds.iter().enumerate() {
            r.value(&format!("lower_bound_step_{}", k + 1), *b);
        }
        r.within("relative_gap", self.relative_gap, 1e-9);
        r.within("vertex_deviation", self.max_vertex_deviation, 1e-7);
        if let Some(last) = self.per_step_lower_bounds.last() {
            r.margin(
                "oracle_above_bound",
                self.oracle_length - last * (1.0 - 1e-9),
            );
        }
        r.pass = self.pass;
        r
    }
}
