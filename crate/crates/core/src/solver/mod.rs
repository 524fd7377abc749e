//! Exact Steiner minimal trees for small terminal sets by exhaustive search
//! over full topologies.

mod melzak;
mod mst;
mod optimize;
mod search;
mod topology;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{segments_intersect, Point, Segment};

pub use melzak::melzak3;
pub use mst::mst_length;
pub use optimize::{FixedTopologyOptimizer, COLLAPSE_TOL};
pub use topology::{
    canonicalize, enumerate_full_topologies, full_topology_count, Topology, MAX_TERMINALS,
    MIN_TERMINALS,
};

use optimize::{Frame, Stop};
use search::{Candidate, Search};

const POLISH_SWEEPS: usize = 10_000;

/// A terminal: a point, or a segment the tree may touch anywhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Site {
    Point(Point),
    Segment(Segment),
}

impl Site {
    fn anchor_points(&self) -> Vec<Point> {
        match self {
            Site::Point(p) => vec![*p],
            Site::Segment(s) => vec![s.a, s.b],
        }
    }

    fn distance_to(&self, p: Point) -> f64 {
        match self {
            Site::Point(q) => q.dist(p),
            Site::Segment(s) => s.distance_to(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// Stop when one sweep shortens the tree by less than this fraction.
    pub convergence_tol: f64,
    pub max_iterations: usize,
    pub prune_with_mst: bool,
    /// Worker threads; `None` uses the global rayon pool.
    pub jobs: Option<usize>,
    /// Relative gap under which two topologies count as tied.
    pub tie_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            convergence_tol: 1e-13,
            max_iterations: 100_000,
            prune_with_mst: true,
            jobs: None,
            tie_tol: 1e-10,
        }
    }
}

impl SolveOptions {
    /// Rejects non-positive tolerances and iteration or job counts.
    pub fn validate(&self) -> Result<()> {
        if !(self.convergence_tol > 0.0) || !self.convergence_tol.is_finite() {
            return invalid("convergence tolerance must be positive");
        }
        if !(self.tie_tol >= 0.0) || !self.tie_tol.is_finite() {
            return invalid("tie tolerance must be non-negative");
        }
        if self.max_iterations == 0 {
            return invalid("max_iterations must be positive");
        }
        if self.jobs == Some(0) {
            return invalid("jobs must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteinerSolution {
    pub topology: Topology,
    /// Terminal positions; for a segment site, the point where the tree touches it.
    pub terminals: Vec<Point>,
    pub steiner_points: Vec<Point>,
    pub length: f64,
    pub converged: bool,
    /// Adjacent node ids whose positions coincide within [`COLLAPSE_TOL`]
    /// (relative to the input diameter, tightened for very close terminals).
    pub collapsed_pairs: Vec<(usize, usize)>,
    /// Smallest angle between edges meeting at a vertex of the realised tree.
    pub min_angle: f64,
    /// Largest vertex degree of the realised tree.
    pub max_degree: usize,
    /// Canonical ids of all topologies within the tie tolerance of the optimum.
    pub ties: Vec<usize>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionJson {
    pub length: f64,
    pub terminals: Vec<Point>,
    pub steiner_points: Vec<Point>,
    pub edges: Vec<[usize; 2]>,
    pub topology_id: usize,
    pub min_angle: f64,
    pub ties: Vec<usize>,
}

impl SteinerSolution {
    /// Position of node `id` (terminals first, then Steiner points).
    pub fn node(&self, id: usize) -> Point {
        if id < self.terminals.len() {
            self.terminals[id]
        } else {
            self.steiner_points[id - self.terminals.len()]
        }
    }

    /// Sum of edge lengths recomputed from the node positions.
    pub fn edge_length_sum(&self) -> f64 {
        self.topology
            .edges
            .iter()
            .map(|&(u, v)| self.node(u as usize).dist(self.node(v as usize)))
            .sum()
    }

    pub fn to_json(&self) -> SolutionJson {
        SolutionJson {
            length: self.length,
            terminals: self.terminals.clone(),
            steiner_points: self.steiner_points.clone(),
            edges: self
                .topology
                .edges
                .iter()
                .map(|&(u, v)| [u as usize, v as usize])
                .collect(),
            topology_id: self.topology.canonical_id,
            min_angle: self.min_angle,
            ties: self.ties.clone(),
        }
    }
}

fn validate_sites(sites: &[Site]) -> Result<()> {
    let n = sites.len();
    if !(MIN_TERMINALS..=MAX_TERMINALS).contains(&n) {
        return invalid(format!(
            "terminal count {n} outside {MIN_TERMINALS}..={MAX_TERMINALS}"
        ));
    }
    for s in sites {
        if s.anchor_points().iter().any(|p| !p.is_finite()) {
            return invalid("non-finite coordinate");
        }
        if let Site::Segment(seg) = s {
            if seg.a == seg.b {
                return invalid("segment endpoints coincide");
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let disjoint = match (&sites[i], &sites[j]) {
                (Site::Segment(a), Site::Segment(b)) => !segments_intersect(a, b, None),
                (Site::Point(p), other) | (other, Site::Point(p)) => other.distance_to(*p) > 0.0,
            };
            if !disjoint {
                return invalid(format!("terminals {i} and {j} coincide"));
            }
        }
    }
    Ok(())
}

fn finish(
    opt: &FixedTopologyOptimizer,
    sites: &[Site],
    stop: Stop,
    ties: Vec<usize>,
) -> SteinerSolution {
    let r = opt.realized();
    let terminals = opt
        .terminal_points()
        .into_iter()
        .zip(sites)
        .map(|(q, site)| match site {
            Site::Point(p) => *p,
            Site::Segment(seg) => seg.project(q),
        })
        .collect();
    SteinerSolution {
        topology: opt.topology().clone(),
        terminals,
        steiner_points: opt.steiner_points(),
        length: opt.length(),
        converged: stop == Stop::Converged,
        collapsed_pairs: r.collapsed_pairs,
        min_angle: r.min_angle,
        max_degree: r.max_degree,
        ties,
        iterations: opt.sweeps(),
    }
}

/// Minimum-length realisation of one fixed topology.
pub fn optimize_topology(
    t: &Topology,
    terminals: &[Point],
    opts: &SolveOptions,
) -> Result<SteinerSolution> {
    let sites: Vec<Site> = terminals.iter().copied().map(Site::Point).collect();
    optimize_topology_sites(t, &sites, opts)
}

pub fn optimize_topology_sites(
    t: &Topology,
    sites: &[Site],
    opts: &SolveOptions,
) -> Result<SteinerSolution> {
    opts.validate()?;
    validate_sites(sites)?;
    if t.n != sites.len() || !t.is_well_formed() {
        return invalid("topology does not match the terminal set");
    }
    let mut opt = FixedTopologyOptimizer::new(t, sites);
    let stop = opt.run(opts.convergence_tol, opts.max_iterations, None);
    opt.polish(POLISH_SWEEPS);
    Ok(finish(&opt, sites, stop, vec![t.canonical_id]))
}

/// Steiner minimal tree of 3 to 10 point terminals.
pub fn solve_steiner(terminals: &[Point], opts: &SolveOptions) -> Result<SteinerSolution> {
    let sites: Vec<Site> = terminals.iter().copied().map(Site::Point).collect();
    solve_sites(&sites, opts)
}

/// Steiner minimal tree where some terminals may be segments.
///
/// With `prune_with_mst` and point terminals the search is a branch and bound
/// over partial topologies, cut off at the minimum spanning tree length or
/// the best tree found so far. Otherwise every full topology is optimised.
pub fn solve_sites(sites: &[Site], opts: &SolveOptions) -> Result<SteinerSolution> {
    opts.validate()?;
    validate_sites(sites)?;
    let frame = Frame::of(sites);
    let points: Option<Vec<Point>> = sites
        .iter()
        .map(|s| match s {
            Site::Point(p) => Some(*p),
            Site::Segment(_) => None,
        })
        .collect();
    let search = || -> Result<Vec<Candidate>> {
        match &points {
            Some(pts) if opts.prune_with_mst => {
                let cutoff = mst_length(pts)? / frame.scale();
                Ok(Search::new(pts, frame, opts, cutoff, opts.jobs != Some(1)).run())
            }
            _ => {
                let evaluate = |t: Topology| {
                    let mut opt = FixedTopologyOptimizer::with_frame(&t, sites, frame);
                    let stop = opt.run(opts.convergence_tol, opts.max_iterations, None);
                    Candidate {
                        length: opt.local_len(),
                        topology: t,
                        converged: stop == Stop::Converged,
                    }
                };
                let all = enumerate_full_topologies(sites.len())?;
                Ok(if opts.jobs == Some(1) {
                    all.into_iter().map(evaluate).collect()
                } else {
                    all.into_par_iter().map(evaluate).collect()
                })
            }
        }
    };
    let results = match opts.jobs {
        Some(j) if j > 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::SolverFailure(e.to_string()))?
            .install(search)?,
        _ => search()?,
    };

    if !results.iter().any(|r| r.converged) {
        return Err(Error::SolverFailure(
            "no topology converged within the iteration limit".into(),
        ));
    }
    let best = results
        .iter()
        .min_by(|a, b| {
            a.length
                .total_cmp(&b.length)
                .then(a.topology.canonical_id.cmp(&b.topology.canonical_id))
        })
        .expect("non-empty");
    let mut ties: Vec<usize> = results
        .iter()
        .filter(|r| r.length <= best.length * (1.0 + opts.tie_tol))
        .map(|r| r.topology.canonical_id)
        .collect();
    ties.sort_unstable();

    let mut opt = FixedTopologyOptimizer::with_frame(&best.topology, sites, frame);
    let stop = opt.run(opts.convergence_tol, opts.max_iterations, None);
    opt.polish(POLISH_SWEEPS);
    Ok(finish(&opt, sites, stop, ties))
}
