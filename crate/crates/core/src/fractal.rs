//! The self-similar binary tree: vertex `y0 = (0,0)`, first descendant
//! `y1 = (1,0)`, children of `y_k` at `y_{2k}` (turned `+π/3`) and
//! `y_{2k+1}` (turned `-π/3`), each generation shorter by the ratio `λ_i`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{angle_between, segments_intersect, Point, Segment};

/// Largest depth accepted by [`build_sigma`]; `2^depth` vertices are stored.
pub const MAX_DEPTH: u32 = 22;

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Unit vectors at multiples of π/3, indexed mod 6.
const SEXTANT: [Point; 6] = [
    Point::new(1.0, 0.0),
    Point::new(0.5, SQRT3_2),
    Point::new(-0.5, SQRT3_2),
    Point::new(-1.0, 0.0),
    Point::new(-0.5, -SQRT3_2),
    Point::new(0.5, -SQRT3_2),
];

/// Edge ratios `λ_0, λ_1, ...` between consecutive generations.
///
/// An explicit list is continued with its last value beyond its end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSequence {
    Constant(f64),
    Explicit(Vec<f64>),
}

fn check_ratio(l: f64) -> Result<()> {
    if l.is_finite() && l > 0.0 && l < 1.0 {
        Ok(())
    } else {
        invalid(format!("edge ratio {l} outside (0, 1)"))
    }
}

impl LambdaSequence {
    pub fn constant(lambda: f64) -> Result<Self> {
        check_ratio(lambda)?;
        Ok(LambdaSequence::Constant(lambda))
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return invalid("empty ratio sequence");
        }
        values.iter().try_for_each(|&l| check_ratio(l))?;
        Ok(LambdaSequence::Explicit(values))
    }

    /// `λ_i`.
    pub fn ratio(&self, i: usize) -> f64 {
        match self {
            LambdaSequence::Constant(l) => *l,
            LambdaSequence::Explicit(v) => v[i.min(v.len() - 1)],
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            LambdaSequence::Constant(l) => Some(*l),
            LambdaSequence::Explicit(_) => None,
        }
    }

    /// Length of a level-`level` edge: `∏_{j<level} λ_j` (the root edge has
    /// level 0 and length 1).
    pub fn edge_length(&self, level: usize) -> f64 {
        match self {
            LambdaSequence::Constant(l) => l.powi(level as i32),
            LambdaSequence::Explicit(_) => (0..level).map(|j| self.ratio(j)).product(),
        }
    }

    /// Supremum of `λ_j` over `j ≥ from`.
    fn sup_from(&self, from: usize) -> f64 {
        match self {
            LambdaSequence::Constant(l) => *l,
            LambdaSequence::Explicit(v) => {
                let last = v[v.len() - 1];
                v.iter().skip(from).fold(last, |m, &x| m.max(x))
            }
        }
    }

    /// Every ratio below 1/2, so the tree has finite total length.
    pub fn is_subcritical(&self) -> bool {
        self.sup_from(0) < 0.5
    }

    /// Constant ratio below 1/300: the regime in which the full tree is known
    /// to be a Steiner tree for its leaves.
    pub fn constant_regime(&self) -> bool {
        matches!(self, LambdaSequence::Constant(l) if *l < 1.0 / 300.0)
    }

    /// All listed ratios below 1/5000 with `Σ_{i≥1} λ_i < π/5040`, the
    /// summable regime with uniqueness. Only the listed values are summed.
    pub fn summable_regime(&self) -> bool {
        match self {
            LambdaSequence::Constant(_) => false,
            LambdaSequence::Explicit(v) => {
                v.iter().all(|&l| l < 1.0 / 5000.0)
                    && v.iter().skip(1).sum::<f64>() < std::f64::consts::PI / 5040.0
            }
        }
    }
}

/// Finite-depth realisation of the tree. Vertex `k` is stored at index `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedTree {
    pub lambda: LambdaSequence,
    pub depth: u32,
    pub vertices: Vec<Point>,
    pub edges: Vec<(usize, usize)>,
}

impl EmbeddedTree {
    /// Number of edges on the path from `y0` to `y_k`.
    pub fn level(k: usize) -> u32 {
        if k == 0 {
            0
        } else {
            usize::BITS - k.leading_zeros()
        }
    }

    pub fn vertex(&self, k: usize) -> Point {
        self.vertices[k]
    }

    /// Indices of the deepest generation, `2^{depth-1} .. 2^depth`.
    pub fn leaf_indices(&self) -> std::ops::Range<usize> {
        (1usize << (self.depth - 1))..(1usize << self.depth)
    }

    pub fn leaves(&self) -> impl Iterator<Item = Point> + '_ {
        self.leaf_indices().map(|k| self.vertices[k])
    }

    pub fn length(&self) -> f64 {
        self.edges
            .iter()
            .map(|&(p, c)| self.vertices[p].dist(self.vertices[c]))
            .sum()
    }

    pub fn to_json(&self) -> TreeJson {
        TreeJson {
            lambda: self.lambda.clone(),
            depth: self.depth,
            vertices: self
                .vertices
                .iter()
                .enumerate()
                .map(|(k, p)| VertexJson { k, x: p.x, y: p.y })
                .collect(),
            edges: self.edges.iter().map(|&(p, c)| [p, c]).collect(),
        }
    }

    pub fn from_json(json: TreeJson) -> Result<Self> {
        let mut vertices = vec![None; json.vertices.len()];
        for v in &json.vertices {
            let slot = vertices
                .get_mut(v.k)
                .ok_or_else(|| Error::InvalidInput(format!("vertex index {} out of range", v.k)))?;
            *slot = Some(Point::new(v.x, v.y));
        }
        let vertices = vertices
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidInput("missing vertex index".into()))?;
        if json.depth < 1 || vertices.len() != 1usize << json.depth {
            return invalid("vertex count does not match depth");
        }
        let edges = json.edges.iter().map(|e| (e[0], e[1])).collect::<Vec<_>>();
        if edges
            .iter()
            .any(|&(p, c)| p >= vertices.len() || c >= vertices.len())
        {
            return invalid("edge refers to a missing vertex");
        }
        Ok(EmbeddedTree {
            lambda: json.lambda,
            depth: json.depth,
            vertices,
            edges,
        })
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, &self.to_json())?;
        Ok(())
    }
}

/// Wire format of an [`EmbeddedTree`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeJson {
    pub lambda: LambdaSequence,
    pub depth: u32,
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexJson {
    pub k: usize,
    pub x: f64,
    pub y: f64,
}

/// Builds the tree down to `depth` generations of edges: depth 1 is the root
/// edge `y0 y1`, depth `d` has `2^d - 1` edges and `2^{d-1}` leaves.
pub fn build_sigma(seq: &LambdaSequence, depth: u32) -> Result<EmbeddedTree> {
    if depth < 1 {
        return invalid("depth must be at least 1");
    }
    if depth > MAX_DEPTH {
        return invalid(format!("depth {depth} exceeds {MAX_DEPTH}"));
    }
    let n = 1usize << depth;
    let mut vertices = vec![Point::ORIGIN; n];
    // direction of the edge entering y_k, as a multiple of π/3
    let mut heading = vec![0usize; n];
    vertices[1] = Point::new(1.0, 0.0);
    let mut edges = Vec::with_capacity(n - 1);
    edges.push((0, 1));
    for k in 1..n / 2 {
        let level = EmbeddedTree::level(k) as usize;
        let len = seq.edge_length(level);
        for (child, turn) in [(2 * k, 1), (2 * k + 1, 5)] {
            let h = (heading[k] + turn) % 6;
            heading[child] = h;
            vertices[child] = vertices[k] + SEXTANT[h] * len;
            edges.push((k, child));
        }
    }
    Ok(EmbeddedTree {
        lambda: seq.clone(),
        depth,
        vertices,
        edges,
    })
}

/// Truncated leaf set of the infinite tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TerminalSet {
    /// `y0` first when `includes_root`, then leaves in index order.
    pub points: Vec<Point>,
    pub includes_root: bool,
    /// Certified bound on the distance from each point to its limit leaf.
    pub tolerance: f64,
    /// Binary-string length of the truncation: `2^depth` leaves.
    pub depth: u32,
}

impl TerminalSet {
    pub fn leaves(&self) -> &[Point] {
        if self.includes_root {
            &self.points[1..]
        } else {
            &self.points
        }
    }

    /// One `x,y` row per point, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        for p in &self.points {
            writeln!(w, "{:.16e},{:.16e}", p.x, p.y)?;
        }
        Ok(())
    }
}

/// Sum of all edge lengths strictly below generation `n`, i.e. the largest
/// possible distance from a string-length-`n` vertex to a limit leaf under it.
pub fn tail_bound(seq: &LambdaSequence, n: usize) -> f64 {
    let q = seq.sup_from(n + 1);
    seq.edge_length(n + 1) / (1.0 - q)
}

/// Leaves of the infinite tree, approximated by the vertices of the shallowest
/// generation whose tail bound is below `tol`.
pub fn terminal_set(seq: &LambdaSequence, tol: f64, include_root: bool) -> Result<TerminalSet> {
    if !(tol > 0.0) {
        return invalid("tolerance must be positive");
    }
    let n = (0..MAX_DEPTH)
        .find(|&n| tail_bound(seq, n as usize) < tol)
        .ok_or_else(|| {
            Error::InvalidInput(format!(
                "tolerance {tol} needs more than {MAX_DEPTH} generations"
            ))
        })?;
    let tree = build_sigma(seq, n + 1)?;
    let mut points = Vec::with_capacity((1 << n) + 1);
    if include_root {
        points.push(tree.vertex(0));
    }
    points.extend(tree.leaves());
    Ok(TerminalSet {
        points,
        includes_root: include_root,
        tolerance: tail_bound(seq, n as usize),
        depth: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Depth {
    Finite(u32),
    Infinite,
}

/// Total edge length of the tree truncated at `depth`, or of the whole tree.
pub fn total_length(seq: &LambdaSequence, depth: Depth) -> Result<f64> {
    match depth {
        Depth::Finite(0) => invalid("depth must be at least 1"),
        Depth::Finite(k) => Ok((0..k as usize)
            .map(|i| 2f64.powi(i as i32) * seq.edge_length(i))
            .sum()),
        Depth::Infinite => match seq {
            LambdaSequence::Constant(l) => {
                if 2.0 * l >= 1.0 {
                    Err(Error::Divergence(format!("2λ = {} ≥ 1", 2.0 * l)))
                } else {
                    Ok(1.0 / (1.0 - 2.0 * l))
                }
            }
            LambdaSequence::Explicit(v) => {
                let last = v[v.len() - 1];
                if 2.0 * last >= 1.0 {
                    return Err(Error::Divergence(format!("2λ = {} ≥ 1", 2.0 * last)));
                }
                let m = v.len();
                let head: f64 = (0..m)
                    .map(|i| 2f64.powi(i as i32) * seq.edge_length(i))
                    .sum();
                Ok(head + 2f64.powi(m as i32) * seq.edge_length(m) / (1.0 - 2.0 * last))
            }
        },
    }
}

/// `ε = λ²/(1-λ) = λ² + λ³ + ...`, the radius around a second-generation
/// vertex containing all leaves below it.
pub fn epsilon_of(lambda: f64) -> Result<f64> {
    check_ratio(lambda)?;
    Ok(lambda * lambda / (1.0 - lambda))
}

/// `-ln 2 / ln λ`, the similarity dimension of the leaf set.
pub fn hausdorff_dimension_formula(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 0.5) {
        return invalid(format!("λ = {lambda} outside (0, 1/2)"));
    }
    Ok(-std::f64::consts::LN_2 / lambda.ln())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Pairs of edges (as `(parent, child)` indices) that meet away from a
    /// shared vertex. Capped at [`MAX_REPORTED_CROSSINGS`].
    pub crossings: Vec<((usize, usize), (usize, usize))>,
    /// Largest `|angle - 2π/3|` over all branchings, as measured from the
    /// stored coordinates.
    pub max_angle_deviation: f64,
    /// Largest relative error of a child/parent edge ratio against `λ_i`.
    pub max_ratio_deviation: f64,
    /// Angle deviation left after subtracting what coordinate rounding alone
    /// can produce; deep short edges make the raw value noisy.
    pub max_angle_excess: f64,
    pub max_ratio_excess: f64,
    pub valid: bool,
}

pub const MAX_REPORTED_CROSSINGS: usize = 64;

struct Bbox {
    lo: Point,
    hi: Point,
}

impl Bbox {
    fn of(a: Point, b: Point) -> Self {
        Bbox {
            lo: Point::new(a.x.min(b.x), a.y.min(b.y)),
            hi: Point::new(a.x.max(b.x), a.y.max(b.y)),
        }
    }

    fn overlaps(&self, o: &Bbox) -> bool {
        self.lo.x <= o.hi.x && o.lo.x <= self.hi.x && self.lo.y <= o.hi.y && o.lo.y <= self.hi.y
    }
}

/// Checks that the tree is embedded: no two edges meet except at a common
/// vertex, every branching has pairwise angles 2π/3 and every generation
/// ratio matches the sequence.
pub fn validate_embedding(tree: &EmbeddedTree) -> ValidationReport {
    let v = &tree.vertices;
    let boxes: Vec<Bbox> = tree
        .edges
        .iter()
        .map(|&(p, c)| Bbox::of(v[p], v[c]))
        .collect();
    let mut crossings = Vec::new();
    'outer: for i in 0..tree.edges.len() {
        let (p1, c1) = tree.edges[i];
        for j in i + 1..tree.edges.len() {
            if !boxes[i].overlaps(&boxes[j]) {
                continue;
            }
            let (p2, c2) = tree.edges[j];
            let shared = [p2, c2].into_iter().find(|&k| k == p1 || k == c1);
            let (Ok(s1), Ok(s2)) = (Segment::new(v[p1], v[c1]), Segment::new(v[p2], v[c2])) else {
                continue;
            };
            if segments_intersect(&s1, &s2, shared.map(|k| v[k])) {
                crossings.push(((p1, c1), (p2, c2)));
                if crossings.len() >= MAX_REPORTED_CROSSINGS {
                    break 'outer;
                }
            }
        }
    }

    // absolute position error accumulated over `depth` additions
    let scale = v.iter().fold(1.0f64, |m, p| m.max(p.norm()));
    let delta = 2.0 * f64::from(tree.depth) * f64::EPSILON * scale;

    let third = 2.0 * std::f64::consts::PI / 3.0;
    let mut max_angle_deviation = 0.0f64;
    let mut max_ratio_deviation = 0.0f64;
    let mut max_angle_excess = 0.0f64;
    let mut max_ratio_excess = 0.0f64;
    for k in 1..v.len() / 2 {
        let parent = if k == 1 { 0 } else { k / 2 };
        let dirs = [v[parent] - v[k], v[2 * k] - v[k], v[2 * k + 1] - v[k]];
        let lens = dirs.map(|d| d.norm());
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            let dev = (angle_between(dirs[a], dirs[b]) - third).abs();
            let noise = 2.0 * delta * (1.0 / lens[a] + 1.0 / lens[b]);
            max_angle_deviation = max_angle_deviation.max(dev);
            max_angle_excess = max_angle_excess.max(dev - noise);
        }
        let lambda = tree.lambda.ratio(EmbeddedTree::level(k) as usize - 1);
        for c in 1..3 {
            let dev = (lens[c] / lens[0] / lambda - 1.0).abs();
            let noise = 2.0 * delta * (1.0 / lens[c] + 1.0 / lens[0]);
            max_ratio_deviation = max_ratio_deviation.max(dev);
            max_ratio_excess = max_ratio_excess.max(dev - noise);
        }
    }
    let valid = crossings.is_empty() && max_angle_excess < 1e-9 && max_ratio_excess < 1e-9;
    ValidationReport {
        crossings,
        max_angle_deviation,
        max_ratio_deviation,
        max_angle_excess,
        max_ratio_excess,
        valid,
    }
}
