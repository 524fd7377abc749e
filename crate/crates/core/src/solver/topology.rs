use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const MIN_TERMINALS: usize = 3;
pub const MAX_TERMINALS: usize = 10;

/// A full Steiner topology on `n` terminals.
///
/// Node ids: terminals `0..n`, Steiner nodes `n..2n-2`. Every terminal is a
/// leaf and every Steiner node has degree 3.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub n: usize,
    pub edges: Vec<(u8, u8)>,
    /// Position in the enumeration order of [`enumerate_full_topologies`].
    pub canonical_id: usize,
}

impl Topology {
    pub fn steiner_count(&self) -> usize {
        self.n - 2
    }

    pub fn node_count(&self) -> usize {
        2 * self.n - 2
    }

    /// Neighbour lists indexed by node id.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::with_capacity(3); self.node_count()];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v as usize);
            adj[v as usize].push(u as usize);
        }
        adj
    }

    /// Checks the structural invariants: right node and edge counts, leaf
    /// terminals, degree-3 Steiner nodes, connected and acyclic.
    pub fn is_well_formed(&self) -> bool {
        let nodes = self.node_count();
        if self.edges.len() != nodes - 1 {
            return false;
        }
        if self
            .edges
            .iter()
            .any(|&(u, v)| u as usize >= nodes || v as usize >= nodes || u == v)
        {
            return false;
        }
        let adj = self.adjacency();
        let degrees_ok = adj
            .iter()
            .enumerate()
            .all(|(i, nb)| nb.len() == if i < self.n { 1 } else { 3 });
        if !degrees_ok {
            return false;
        }
        // |E| = |V| - 1 plus connectivity gives a tree
        let mut seen = vec![false; nodes];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Number of full topologies on `n ≥ 2` terminals: `(2n-5)!! = (2n-4)! / (2^{n-2} (n-2)!)`.
pub fn full_topology_count(n: usize) -> usize {
    (3..n).map(|k| 2 * k - 3).product()
}

/// Every full Steiner topology on `n` terminals, in a fixed order.
///
/// Built by inserting terminal `k` (for `k = 3..n`) into every edge of every
/// topology on the first `k` terminals: the edge `(u, v)` becomes `(u, s)`,
/// `(s, v)` and `(k, s)` with a new Steiner node `s`.
pub fn enumerate_full_topologies(n: usize) -> Result<Vec<Topology>> {
    if !(MIN_TERMINALS..=MAX_TERMINALS).contains(&n) {
        return invalid(format!(
            "terminal count {n} outside {MIN_TERMINALS}..={MAX_TERMINALS}"
        ));
    }
    // Steiner node j is labelled STEINER + j until the final relabelling
    const STEINER: u8 = 64;
    let mut layer: Vec<Vec<(u8, u8)>> = vec![vec![(0, STEINER), (1, STEINER), (2, STEINER)]];
    for k in 3..n {
        let s = STEINER + (k - 2) as u8;
        let mut next = Vec::with_capacity(layer.len() * (2 * k - 3));
        for edges in &layer {
            for i in 0..edges.len() {
                let (u, v) = edges[i];
                let mut e = Vec::with_capacity(edges.len() + 2);
                e.extend_from_slice(edges);
                e[i] = (u, s);
                e.push((s, v));
                e.push((k as u8, s));
                next.push(e);
            }
        }
        layer = next;
    }
    let relabel = |x: u8| {
        if x >= STEINER {
            x - STEINER + n as u8
        } else {
            x
        }
    };
    Ok(layer
        .into_iter()
        .enumerate()
        .map(|(canonical_id, edges)| Topology {
            n,
            edges: edges
                .into_iter()
                .map(|(u, v)| (relabel(u), relabel(v)))
                .collect(),
            canonical_id,
        })
        .collect())
}

/// Relabels a full topology given over arbitrary Steiner labels (terminals
/// `0..n`, any other label a Steiner node) into its enumeration form and id.
pub fn canonicalize(n: usize, edges: &[(usize, usize)]) -> Result<Topology> {
    if !(MIN_TERMINALS..=MAX_TERMINALS).contains(&n) || edges.len() != 2 * n - 3 {
        return invalid("not a full topology");
    }
    let mut adj: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for &(u, v) in edges {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    let full = adj.len() == 2 * n - 2
        && adj
            .iter()
            .all(|(&x, nb)| nb.len() == if x < n { 1 } else { 3 })
        && (0..n).all(|t| adj.contains_key(&t));
    if !full {
        return invalid("not a full topology");
    }
    // peel terminals n-1, ..., 3 off, remembering where each was attached
    let mut history = Vec::with_capacity(n - 3);
    for k in (3..n).rev() {
        let s = adj[&k][0];
        let others: Vec<usize> = adj[&s].iter().copied().filter(|&x| x != k).collect();
        let (a, b) = (others[0], others[1]);
        adj.remove(&k);
        adj.remove(&s);
        for (x, y) in [(a, b), (b, a)] {
            let nb = adj.get_mut(&x).expect("neighbour present");
            let slot = nb.iter().position(|&z| z == s).expect("edge present");
            nb[slot] = y;
        }
        history.push((k, s, a, b));
    }
    let root = *adj[&0].first().expect("centre of the last star");
    const STEINER: usize = 64;
    let mut label: std::collections::HashMap<usize, usize> = [(root, STEINER)].into();
    let map = |x: usize, label: &std::collections::HashMap<usize, usize>| {
        if x < n {
            x
        } else {
            label[&x]
        }
    };
    let mut built = vec![(0, STEINER), (1, STEINER), (2, STEINER)];
    let mut id = 0;
    for &(k, s, a, b) in history.iter().rev() {
        let (ma, mb) = (map(a, &label), map(b, &label));
        let i = built
            .iter()
            .position(|&e| e == (ma, mb) || e == (mb, ma))
            .expect("edge exists at this stage");
        let new = STEINER + k - 2;
        let (u, v) = built[i];
        built[i] = (u, new);
        built.push((new, v));
        built.push((k, new));
        label.insert(s, new);
        id = id * (2 * k - 3) + i;
    }
    let relabel = |x: usize| {
        if x >= STEINER {
            (x - STEINER + n) as u8
        } else {
            x as u8
        }
    };
    Ok(Topology {
        n,
        edges: built
            .into_iter()
            .map(|(u, v)| (relabel(u), relabel(v)))
            .collect(),
        canonical_id: id,
    })
}
