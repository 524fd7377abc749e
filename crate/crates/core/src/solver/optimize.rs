//! Length minimisation for one fixed full topology.
//!
//! Each sweep replaces every Steiner node by the Fermat point of its three
//! neighbours, which exactly minimises the length in that node alone, so the
//! total length never increases. Nodes that collapse onto each other are
//! then moved jointly to the geometric median of their outside neighbours,
//! since single-node moves cannot separate a stuck cluster from its position.

use crate::geometry::{angle_between, fermat_point_fast, Point, Segment};

use super::{Site, Topology};

/// Distance (in unit-diameter coordinates) below which two adjacent nodes
/// count as one vertex of the realised tree. Inputs whose terminals are
/// closer than a thousand times this use a thousandth of their smallest
/// separation instead.
pub const COLLAPSE_TOL: f64 = 1e-9;

const LAPLACE_SWEEPS: usize = 24;

/// Translation and scale taking the input to unit diameter.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Frame {
    center: Point,
    scale: f64,
    collapse: f64,
}

impl Frame {
    pub(crate) fn of(sites: &[Site]) -> Frame {
        let pts: Vec<Point> = sites.iter().flat_map(Site::anchor_points).collect();
        let mut lo = pts[0];
        let mut hi = pts[0];
        for p in &pts {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let mut diam = 0.0f64;
        for (i, p) in pts.iter().enumerate() {
            for q in &pts[i + 1..] {
                diam = diam.max(p.dist(*q));
            }
        }
        let scale = if diam > 0.0 { diam } else { 1.0 };
        let mut closest = f64::INFINITY;
        for (i, a) in sites.iter().enumerate() {
            for b in &sites[i + 1..] {
                for p in a.anchor_points() {
                    closest = closest.min(b.distance_to(p));
                }
                for p in b.anchor_points() {
                    closest = closest.min(a.distance_to(p));
                }
            }
        }
        Frame {
            center: lo.midpoint(hi),
            scale,
            collapse: COLLAPSE_TOL.min(1e-3 * closest / scale),
        }
    }

    pub(crate) fn scale(&self) -> f64 {
        self.scale
    }

    /// Collapse distance in input units.
    pub(crate) fn collapse_distance(&self) -> f64 {
        self.collapse * self.scale
    }

    pub(crate) fn local(&self, p: Point) -> Point {
        (p - self.center) / self.scale
    }

    fn world(&self, p: Point) -> Point {
        p * self.scale + self.center
    }

    pub(crate) fn local_site(&self, s: &Site) -> Site {
        match s {
            Site::Point(p) => Site::Point(self.local(*p)),
            Site::Segment(seg) => Site::Segment(Segment {
                a: self.local(seg.a),
                b: self.local(seg.b),
            }),
        }
    }
}

/// Result of running the optimiser to a stop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Stop {
    Converged,
    IterationLimit,
    /// Lower bound exceeded the cutoff; the topology cannot win.
    Pruned,
}

pub struct FixedTopologyOptimizer {
    topology: Topology,
    n: usize,
    frame: Frame,
    pos: Vec<Point>,
    steiner_nbrs: Vec<[usize; 3]>,
    /// Steiner indices in breadth-first order from Steiner node 0.
    order: Vec<usize>,
    /// Parent node id of each Steiner index in that order (`usize::MAX` at the root).
    parent: Vec<usize>,
    terminal_nbr: Vec<usize>,
    segments: Vec<Option<Segment>>,
    length: f64,
    sweeps: usize,
}

impl FixedTopologyOptimizer {
    /// `sites` must already be validated; they are normalised internally.
    pub fn new(topology: &Topology, sites: &[Site]) -> Self {
        Self::with_frame(topology, sites, Frame::of(sites))
    }

    pub(crate) fn with_frame(topology: &Topology, sites: &[Site], frame: Frame) -> Self {
        Self::with_start(topology, sites, frame, None)
    }

    /// As [`with_frame`](Self::with_frame), optionally starting the Steiner
    /// nodes from given unit-diameter positions.
    pub(crate) fn with_start(
        topology: &Topology,
        sites: &[Site],
        frame: Frame,
        start: Option<&[Point]>,
    ) -> Self {
        let n = topology.n;
        let adj = topology.adjacency();
        let steiner_nbrs = (n..2 * n - 2)
            .map(|s| [adj[s][0], adj[s][1], adj[s][2]])
            .collect::<Vec<_>>();
        let terminal_nbr = (0..n).map(|t| adj[t][0]).collect();
        let mut order = vec![0];
        let mut parent = vec![usize::MAX; n - 2];
        let mut head = 0;
        while head < order.len() {
            let j = order[head];
            head += 1;
            for &v in &steiner_nbrs[j] {
                if v >= n && v != parent[j] {
                    parent[v - n] = n + j;
                    order.push(v - n);
                }
            }
        }
        let mut pos = vec![Point::ORIGIN; 2 * n - 2];
        let mut segments = vec![None; n];
        for (i, s) in sites.iter().enumerate() {
            match frame.local_site(s) {
                Site::Point(p) => pos[i] = p,
                Site::Segment(seg) => {
                    pos[i] = seg.midpoint();
                    segments[i] = Some(seg);
                }
            }
        }
        if let Some(start) = start {
            pos[n..].copy_from_slice(start);
        } else {
            let centroid = pos[..n].iter().fold(Point::ORIGIN, |a, &p| a + p) / n as f64;
            for p in &mut pos[n..] {
                *p = centroid;
            }
            // least-squares spread as a starting point
            for _ in 0..LAPLACE_SWEEPS {
                for (j, nb) in steiner_nbrs.iter().enumerate() {
                    pos[n + j] = (pos[nb[0]] + pos[nb[1]] + pos[nb[2]]) / 3.0;
                }
            }
        }
        let mut opt = FixedTopologyOptimizer {
            topology: topology.clone(),
            n,
            frame,
            pos,
            steiner_nbrs,
            order,
            parent,
            terminal_nbr,
            segments,
            length: 0.0,
            sweeps: 0,
        };
        opt.project_segments();
        opt.length = opt.local_length();
        opt
    }

    fn project_segments(&mut self) {
        for t in 0..self.n {
            if let Some(seg) = &self.segments[t] {
                self.pos[t] = seg.project(self.pos[self.terminal_nbr[t]]);
            }
        }
    }

    fn local_length(&self) -> f64 {
        self.topology
            .edges
            .iter()
            .map(|&(u, v)| self.pos[u as usize].dist(self.pos[v as usize]))
            .sum()
    }

    /// Current total length in input units.
    pub fn length(&self) -> f64 {
        self.length * self.frame.scale
    }

    pub(crate) fn local_len(&self) -> f64 {
        self.length
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    /// One Gauss–Seidel pass of Fermat-point replacements followed by a
    /// joint reweighted step. Returns the new length in input units.
    pub fn sweep(&mut self) -> f64 {
        let n = self.n;
        let old = self.pos.clone();
        for j in 0..self.steiner_nbrs.len() {
            let [a, b, c] = self.steiner_nbrs[j];
            self.pos[n + j] = fermat_point_fast(self.pos[a], self.pos[b], self.pos[c]);
        }
        self.project_segments();
        self.sweeps += 1;
        let len = self.local_length();
        // each replacement is a minimiser; only rounding can lengthen the tree
        if len <= self.length {
            self.length = len;
        } else {
            self.pos = old;
        }
        self.reweighted_step();
        self.length()
    }

    /// Minimises `Σ |e|² / |e₀|` over all Steiner nodes at once, `|e₀|` being
    /// the current edge lengths. This majorises the tree length, so the step
    /// is a descent step; nearly coincident nodes get large weights and move
    /// together. The tree Laplacian is eliminated leaf-first as series
    /// conductances. The step is kept only if it shortens the tree.
    fn reweighted_step(&mut self) {
        let n = self.n;
        let m = self.steiner_nbrs.len();
        let weight = |p: Point, q: Point| 1.0 / p.dist(q).max(1e-100);
        let mut cond = vec![0.0; m];
        let mut rhs = vec![Point::ORIGIN; m];
        let mut up = vec![0.0; m];
        for &j in self.order.iter().rev() {
            let s = self.pos[n + j];
            for &v in &self.steiner_nbrs[j] {
                let w = weight(s, self.pos[v]);
                if v < n {
                    cond[j] += w;
                    rhs[j] = rhs[j] + self.pos[v] * w;
                } else if v == self.parent[j] {
                    up[j] = w;
                } else {
                    let c = v - n;
                    let k = w / (w + cond[c]);
                    cond[j] += cond[c] * k;
                    rhs[j] = rhs[j] + rhs[c] * k;
                }
            }
        }
        let old = self.pos.clone();
        for &j in &self.order {
            self.pos[n + j] = if self.parent[j] == usize::MAX {
                rhs[j] / cond[j]
            } else {
                let p = self.pos[self.parent[j]];
                (rhs[j] + p * up[j]) / (cond[j] + up[j])
            };
        }
        self.project_segments();
        let len = self.local_length();
        if len < self.length {
            self.length = len;
        } else {
            self.pos = old;
        }
    }

    /// Lower bound on this topology's minimum length (unit-diameter units).
    pub(crate) fn lower_bound(&self) -> Option<f64> {
        if self.segments.iter().any(Option::is_some) {
            return None;
        }
        Some(self.bound_with(0.0).max(self.bound_with(1e-10)))
    }

    /// Convexity bound `L* ≥ L(s') - Σ |g_i| R_i` at a point `s'` where every
    /// group of nodes joined by edges no longer than `tau` is snapped together
    /// (onto its terminal, if it has one). On the zero-length edges inside a
    /// group the subgradient may be any vector of norm at most one; these are
    /// chosen leaf-first so each node passes as much of its imbalance as
    /// possible towards the group root. `R_i` is the farthest terminal from
    /// node `i`, since optimal Steiner points lie in the terminals' convex hull.
    fn bound_with(&self, tau: f64) -> f64 {
        let n = self.n;
        let nodes = self.pos.len();
        let nbrs = |v: usize| -> &[usize] {
            if v < n {
                std::slice::from_ref(&self.terminal_nbr[v])
            } else {
                &self.steiner_nbrs[v - n]
            }
        };
        let mut group = vec![usize::MAX; nodes];
        let mut parent = vec![usize::MAX; nodes];
        let mut order = Vec::with_capacity(nodes);
        let mut snap = self.pos.clone();
        // seed groups from terminals first so a terminal is its group's root
        for root in 0..nodes {
            if group[root] != usize::MAX {
                continue;
            }
            let start = order.len();
            group[root] = root;
            order.push(root);
            let mut head = start;
            while head < order.len() {
                let v = order[head];
                head += 1;
                for &w in nbrs(v) {
                    if group[w] == usize::MAX && self.pos[v].dist(self.pos[w]) <= tau {
                        if w < n {
                            // two terminals in one group: no valid snap
                            return f64::NEG_INFINITY;
                        }
                        group[w] = root;
                        parent[w] = v;
                        order.push(w);
                    }
                }
            }
            for &v in &order[start..] {
                snap[v] = self.pos[root];
            }
        }
        let mut len = 0.0;
        for &(u, v) in &self.topology.edges {
            len += snap[u as usize].dist(snap[v as usize]);
        }
        let mut imbalance = vec![Point::ORIGIN; nodes];
        for v in n..nodes {
            for &w in nbrs(v) {
                if group[w] != group[v] {
                    let d = snap[v] - snap[w];
                    let l = d.norm();
                    if l > 0.0 {
                        imbalance[v] = imbalance[v] + d / l;
                    }
                }
            }
        }
        let mut lb = len;
        for &v in order.iter().rev() {
            if v < n {
                continue;
            }
            let e = imbalance[v];
            let norm = e.norm();
            let residual = if parent[v] == usize::MAX {
                norm
            } else {
                let pass = if norm > 1.0 { e / norm } else { e };
                if parent[v] >= n {
                    imbalance[parent[v]] = imbalance[parent[v]] + pass;
                }
                (norm - 1.0).max(0.0)
            };
            if residual > 0.0 {
                let reach = self.pos[..n]
                    .iter()
                    .fold(0.0f64, |m, t| m.max(t.dist(snap[v])));
                lb -= residual * reach;
            }
        }
        lb
    }

    /// Moves each cluster of coincident Steiner nodes jointly to the geometric
    /// median of its outside neighbours when that shortens the tree.
    fn cluster_step(&mut self) -> bool {
        let n = self.n;
        let m = self.steiner_nbrs.len();
        let mut parent: Vec<usize> = (0..m).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut any = false;
        for &(u, v) in &self.topology.edges {
            let (u, v) = (u as usize, v as usize);
            if u >= n && v >= n && self.pos[u].dist(self.pos[v]) < self.frame.collapse {
                let (a, b) = (find(&mut parent, u - n), find(&mut parent, v - n));
                if a != b {
                    parent[a] = b;
                    any = true;
                }
            }
        }
        if !any {
            return false;
        }
        let mut improved = false;
        for root in 0..m {
            if find(&mut parent, root) != root {
                continue;
            }
            let members: Vec<usize> = (0..m).filter(|&j| find(&mut parent, j) == root).collect();
            if members.len() < 2 {
                continue;
            }
            let inside = |v: usize| v >= n && members.contains(&(v - n));
            let mut outside = Vec::new();
            let mut current = 0.0;
            for &j in &members {
                for &v in &self.steiner_nbrs[j] {
                    if inside(v) {
                        // internal edges are counted from both ends
                        current += 0.5 * self.pos[n + j].dist(self.pos[v]);
                    } else {
                        outside.push(self.pos[v]);
                        current += self.pos[n + j].dist(self.pos[v]);
                    }
                }
            }
            let start = self.pos[n + members[0]];
            let target = geometric_median(&outside, start);
            let moved: f64 = outside.iter().map(|p| p.dist(target)).sum();
            if moved < current - 1e-15 * current.max(1.0) {
                for &j in &members {
                    self.pos[n + j] = target;
                }
                improved = true;
            }
        }
        if improved {
            self.project_segments();
            self.length = self.local_length();
        }
        improved
    }

    /// Runs sweeps until the relative length change drops below `tol`.
    /// `cutoff` (unit-diameter units) is re-read on every bound check.
    pub(crate) fn run(
        &mut self,
        tol: f64,
        max_iterations: usize,
        cutoff: Option<&dyn Fn() -> f64>,
    ) -> Stop {
        let mut prev = self.length;
        while self.sweeps < max_iterations {
            self.sweep();
            let cur = self.length;
            if let Some(cut) = cutoff {
                if self.sweeps.is_multiple_of(4) {
                    if let Some(lb) = self.lower_bound() {
                        if lb > cut() {
                            return Stop::Pruned;
                        }
                    }
                }
            }
            if prev - cur <= tol * cur {
                if self.cluster_step() {
                    prev = self.length;
                    continue;
                }
                return Stop::Converged;
            }
            prev = cur;
        }
        Stop::IterationLimit
    }

    /// Further Fermat passes after convergence until no Steiner node moves
    /// by more than a few ulps. Short edges carry little length, so the
    /// length test alone leaves their angles loosely resolved.
    pub(crate) fn polish(&mut self, max_sweeps: usize) {
        let n = self.n;
        let before = self.pos.clone();
        let len = self.length;
        for _ in 0..max_sweeps {
            let mut moved = 0.0f64;
            for j in 0..self.steiner_nbrs.len() {
                let [a, b, c] = self.steiner_nbrs[j];
                let p = fermat_point_fast(self.pos[a], self.pos[b], self.pos[c]);
                moved = moved.max(p.dist(self.pos[n + j]));
                self.pos[n + j] = p;
            }
            self.project_segments();
            if moved <= 4.0 * f64::EPSILON {
                break;
            }
        }
        self.length = self.local_length();
        if self.length > len * (1.0 + 4.0 * f64::EPSILON) {
            self.pos = before;
            self.length = len;
        }
    }

    pub(crate) fn local_steiner(&self) -> &[Point] {
        &self.pos[self.n..]
    }

    pub fn steiner_points(&self) -> Vec<Point> {
        self.pos[self.n..]
            .iter()
            .map(|&p| self.frame.world(p))
            .collect()
    }

    /// Terminal positions; a segment site reports its attachment point.
    pub fn terminal_points(&self) -> Vec<Point> {
        self.pos[..self.n]
            .iter()
            .map(|&p| self.frame.world(p))
            .collect()
    }

    pub(crate) fn realized(&self) -> Realized {
        realized_tree(&self.topology, &self.pos, self.frame.collapse)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }
}

/// Properties of the tree obtained by merging collapsed neighbours.
pub(crate) struct Realized {
    pub collapsed_pairs: Vec<(usize, usize)>,
    pub min_angle: f64,
    pub max_degree: usize,
}

pub(crate) fn realized_tree(topology: &Topology, pos: &[Point], collapse: f64) -> Realized {
    let nodes = pos.len();
    let mut cluster: Vec<usize> = (0..nodes).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut collapsed_pairs = Vec::new();
    for &(u, v) in &topology.edges {
        let (u, v) = (u as usize, v as usize);
        if pos[u].dist(pos[v]) < collapse {
            collapsed_pairs.push((u.min(v), u.max(v)));
            let (a, b) = (find(&mut cluster, u), find(&mut cluster, v));
            cluster[a] = b;
        }
    }
    let mut dirs: Vec<Vec<Point>> = vec![Vec::new(); nodes];
    for &(u, v) in &topology.edges {
        let (u, v) = (u as usize, v as usize);
        let (cu, cv) = (find(&mut cluster, u), find(&mut cluster, v));
        if cu != cv {
            dirs[cu].push(pos[v] - pos[u]);
            dirs[cv].push(pos[u] - pos[v]);
        }
    }
    let mut min_angle = std::f64::consts::PI;
    let mut max_degree = 0;
    for d in &dirs {
        max_degree = max_degree.max(d.len());
        for i in 0..d.len() {
            for j in i + 1..d.len() {
                min_angle = min_angle.min(angle_between(d[i], d[j]));
            }
        }
    }
    collapsed_pairs.sort_unstable();
    Realized {
        collapsed_pairs,
        min_angle,
        max_degree,
    }
}

/// Geometric median by Weiszfeld iteration with the Vardi–Zhang correction
/// at data points.
pub(crate) fn geometric_median(points: &[Point], start: Point) -> Point {
    let mut x = start;
    for _ in 0..2000 {
        let mut num = Point::ORIGIN;
        let mut den = 0.0;
        let mut pull = Point::ORIGIN;
        let mut at = 0.0;
        for &p in points {
            let d = x.dist(p);
            if d == 0.0 {
                at += 1.0;
                continue;
            }
            num = num + p / d;
            den += 1.0 / d;
            pull = pull + (p - x) / d;
        }
        if den == 0.0 {
            return x;
        }
        let t = num / den;
        let next = if at == 0.0 {
            t
        } else {
            let r = pull.norm();
            if r <= at {
                return x;
            }
            let g = at / r;
            t * (1.0 - g) + x * g
        };
        if next.dist(x) <= 1e-17 {
            return next;
        }
        x = next;
    }
    x
}
