//! Branch and bound over partial topologies.
//!
//! Terminals are inserted one at a time into every edge of the current tree.
//! Deleting a terminal from a realised tree and smoothing out its Steiner
//! node never lengthens it, so the minimum of a partial topology bounds all
//! of its completions from below and a partial tree whose convexity bound
//! exceeds the best complete length found so far can be dropped with its
//! whole subtree.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::geometry::{fermat_point_fast, Point};

use super::optimize::{FixedTopologyOptimizer, Frame, Stop};
use super::{canonicalize, Site, SolveOptions, Topology};

const STEINER: u8 = 64;

pub(crate) struct Candidate {
    pub length: f64,
    pub topology: Topology,
    pub converged: bool,
}

struct Partial {
    edges: Vec<(u8, u8)>,
    steiner: Vec<Point>,
    length: f64,
    lower: f64,
    stop: Stop,
}

/// Farthest-first order: a diametral pair, then repeatedly the point
/// farthest from those already chosen. Ties go to the smaller index.
pub(crate) fn insertion_order(points: &[Point]) -> Vec<usize> {
    let n = points.len();
    let (mut a, mut b, mut far) = (0, 1, -1.0);
    for i in 0..n {
        for j in i + 1..n {
            let d = points[i].dist(points[j]);
            if d > far {
                (a, b, far) = (i, j, d);
            }
        }
    }
    let mut order = vec![a, b];
    let mut gap: Vec<f64> = points
        .iter()
        .map(|p| p.dist(points[a]).min(p.dist(points[b])))
        .collect();
    while order.len() < n {
        let next = (0..n)
            .filter(|i| !order.contains(i))
            .fold(None, |best: Option<usize>, i| match best {
                Some(j) if gap[j] >= gap[i] => Some(j),
                _ => Some(i),
            })
            .expect("point left");
        order.push(next);
        for (i, g) in gap.iter_mut().enumerate() {
            *g = g.min(points[i].dist(points[next]));
        }
    }
    order
}

pub(crate) struct Search<'a> {
    sites: Vec<Site>,
    order: Vec<usize>,
    anchors: Vec<Point>,
    frame: Frame,
    opts: &'a SolveOptions,
    incumbent: AtomicU64,
    slack: f64,
    parallel: bool,
}

impl<'a> Search<'a> {
    /// `points` in input order; `cutoff` is an upper bound on the optimum in
    /// unit-diameter units.
    pub(crate) fn new(
        points: &[Point],
        frame: Frame,
        opts: &'a SolveOptions,
        cutoff: f64,
        parallel: bool,
    ) -> Self {
        let order = insertion_order(points);
        let sites: Vec<Site> = order.iter().map(|&i| Site::Point(points[i])).collect();
        let anchors = order.iter().map(|&i| frame.local(points[i])).collect();
        Search {
            sites,
            order,
            anchors,
            frame,
            opts,
            incumbent: AtomicU64::new(cutoff.to_bits()),
            slack: 1.0 + opts.tie_tol,
            parallel,
        }
    }

    fn cutoff(&self) -> f64 {
        f64::from_bits(self.incumbent.load(Ordering::Relaxed)) * self.slack
    }

    fn n(&self) -> usize {
        self.sites.len()
    }

    pub(crate) fn run(&self) -> Vec<Candidate> {
        let root = vec![(0, STEINER), (1, STEINER), (2, STEINER)];
        match self.evaluate(root, 3, None) {
            None => Vec::new(),
            Some(p) if self.n() == 3 => vec![self.candidate(p)],
            Some(p) => self.expand(p, 3),
        }
    }

    fn evaluate(&self, edges: Vec<(u8, u8)>, k: usize, start: Option<&[Point]>) -> Option<Partial> {
        let relabel = |x: u8| {
            if x >= STEINER {
                x - STEINER + k as u8
            } else {
                x
            }
        };
        let t = Topology {
            n: k,
            edges: edges
                .iter()
                .map(|&(u, v)| (relabel(u), relabel(v)))
                .collect(),
            canonical_id: 0,
        };
        let mut opt = FixedTopologyOptimizer::with_start(&t, &self.sites[..k], self.frame, start);
        let cut = || self.cutoff();
        let stop = opt.run(
            self.opts.convergence_tol,
            self.opts.max_iterations,
            Some(&cut),
        );
        if stop == Stop::Pruned {
            return None;
        }
        let lower = opt.lower_bound().unwrap_or(f64::NEG_INFINITY);
        if k == self.n() {
            // any realised network bounds the optimum from above
            self.incumbent
                .fetch_min(opt.local_len().to_bits(), Ordering::Relaxed);
        } else if lower > self.cutoff() {
            return None;
        }
        Some(Partial {
            edges,
            steiner: opt.local_steiner().to_vec(),
            length: opt.local_len(),
            lower,
            stop,
        })
    }

    fn candidate(&self, p: Partial) -> Candidate {
        let n = self.n();
        let edges: Vec<(usize, usize)> = p
            .edges
            .iter()
            .map(|&(u, v)| {
                let f = |x: u8| {
                    if x >= STEINER {
                        x as usize
                    } else {
                        self.order[x as usize]
                    }
                };
                (f(u), f(v))
            })
            .collect();
        Candidate {
            length: p.length,
            topology: canonicalize(n, &edges).expect("insertion yields full topologies"),
            converged: p.stop == Stop::Converged,
        }
    }

    /// Inserts terminal `k` into every edge of `node` (which spans terminals `0..k`).
    fn expand(&self, node: Partial, k: usize) -> Vec<Candidate> {
        let s = STEINER + (k - 2) as u8;
        let at = |x: u8| {
            if x >= STEINER {
                node.steiner[(x - STEINER) as usize]
            } else {
                self.anchors[x as usize]
            }
        };
        let child = |i: usize| -> Option<(usize, Partial)> {
            let (u, v) = node.edges[i];
            let mut edges = node.edges.clone();
            edges[i] = (u, s);
            edges.push((s, v));
            edges.push((k as u8, s));
            let mut start = node.steiner.clone();
            start.push(fermat_point_fast(at(u), at(v), self.anchors[k]));
            self.evaluate(edges, k + 1, Some(&start)).map(|p| (i, p))
        };
        let m = node.edges.len();
        let mut kids: Vec<(usize, Partial)> = if self.parallel {
            (0..m).into_par_iter().filter_map(child).collect()
        } else {
            (0..m).filter_map(child).collect()
        };
        if k + 1 == self.n() {
            return kids.into_iter().map(|(_, p)| self.candidate(p)).collect();
        }
        // most promising first, so the incumbent tightens early
        kids.sort_by(|a, b| a.1.length.total_cmp(&b.1.length).then(a.0.cmp(&b.0)));
        let descend = |(_, p): (usize, Partial)| {
            if p.lower > self.cutoff() {
                Vec::new()
            } else {
                self.expand(p, k + 1)
            }
        };
        if self.parallel {
            kids.into_par_iter().flat_map_iter(descend).collect()
        } else {
            kids.into_iter().flat_map(descend).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn farthest_first() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(0.1, 0.0),
            Point::new(10.0, 0.0),
            Point::new(5.0, 0.0),
            Point::new(9.0, 0.0),
        ];
        assert_eq!(insertion_order(&pts), vec![0, 2, 3, 4, 1]);
    }
}
