//! Per-term light-cone decomposition.
//!
//! The expectation of `Z_i Z_j` (or `Z_k`) after `p` QAOA layers only depends
//! on gates inside the radius-`p` ball around the anchor nodes. Edges whose
//! endpoints both sit exactly at distance `p` cancel against their inverses
//! and are left out, as are biases on those boundary nodes.

mod canon;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::IsingModel;

pub use canon::{
    canonical_form, canonical_key, find_isomorphism, is_isomorphism, CanonicalForm, CanonicalKey,
    DEFAULT_LEAF_BUDGET,
};

/// Observable anchor(s) of a term, as local indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Anchor {
    Node(usize),
    /// Stored with the smaller index first.
    Pair(usize, usize),
}

impl Anchor {
    pub fn pair(a: usize, b: usize) -> Self {
        Anchor::Pair(a.min(b), a.max(b))
    }

    pub fn contains(&self, i: usize) -> bool {
        match *self {
            Anchor::Node(k) => k == i,
            Anchor::Pair(a, b) => a == i || b == i,
        }
    }

    pub fn indices(&self) -> Vec<usize> {
        match *self {
            Anchor::Node(k) => vec![k],
            Anchor::Pair(a, b) => vec![a, b],
        }
    }

    fn map(&self, f: impl Fn(usize) -> usize) -> Self {
        match *self {
            Anchor::Node(k) => Anchor::Node(f(k)),
            Anchor::Pair(a, b) => Anchor::pair(f(a), f(b)),
        }
    }
}

/// Coupling inside a subgraph, by local index with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Light-cone subgraph of one term.
///
/// `nodes[i]` is the global id of local node `i` and `distances[i]` its graph
/// distance to the anchor set. Subgraphs from [`extract_ball`] list nodes in
/// ascending global id; canonical forms use a relabelled order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchoredSubgraph {
    pub nodes: Vec<usize>,
    pub distances: Vec<usize>,
    pub edges: Vec<LocalEdge>,
    /// Nonzero biases by local index, ascending.
    pub biases: Vec<(usize, f64)>,
    pub anchor: Anchor,
    pub depth: usize,
}

impl AnchoredSubgraph {
    pub fn num_qubits(&self) -> usize {
        self.nodes.len()
    }

    /// Dense bias vector by local index.
    pub fn bias_vector(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.nodes.len()];
        for &(i, h) in &self.biases {
            out[i] += h;
        }
        out
    }

    /// Applies `perm[old] = new` to every local index.
    pub(crate) fn relabel(&self, perm: &[usize]) -> AnchoredSubgraph {
        let n = self.nodes.len();
        let mut nodes = vec![0; n];
        let mut distances = vec![0; n];
        for old in 0..n {
            nodes[perm[old]] = self.nodes[old];
            distances[perm[old]] = self.distances[old];
        }
        let mut edges: Vec<LocalEdge> = self
            .edges
            .iter()
            .map(|e| {
                let (x, y) = (perm[e.a], perm[e.b]);
                LocalEdge {
                    a: x.min(y),
                    b: x.max(y),
                    weight: e.weight,
                }
            })
            .collect();
        edges.sort_by_key(|l| (l.a, l.b));
        let mut biases: Vec<(usize, f64)> =
            self.biases.iter().map(|&(i, h)| (perm[i], h)).collect();
        biases.sort_by_key(|&(i, _)| i);
        AnchoredSubgraph {
            nodes,
            distances,
            edges,
            biases,
            anchor: self.anchor.map(|i| perm[i]),
            depth: self.depth,
        }
    }
}

/// Which Hamiltonian term a light cone belongs to, by global node id.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TermKind {
    Edge { i: usize, j: usize },
    Node { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermId {
    pub kind: TermKind,
    pub coefficient: f64,
}

/// A term together with its light cone.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub id: TermId,
    pub subgraph: AnchoredSubgraph,
}

/// Radius-`depth` ball around `anchors` in the nonzero-weight edge graph.
///
/// Keeps every model edge with at least one endpoint within distance
/// `depth - 1` and biases on nodes within distance `depth - 1`.
pub fn extract_ball(
    model: &IsingModel,
    anchors: &[usize],
    depth: usize,
) -> Result<AnchoredSubgraph> {
    if depth == 0 {
        return Err(Error::InvalidParameter("depth p must be at least 1".into()));
    }
    let anchor_global = match *anchors {
        [k] => vec![k],
        [i, j] if i != j => vec![i.min(j), i.max(j)],
        _ => {
            return Err(Error::InvalidParameter(format!(
                "anchors must be one node or two distinct nodes, got {anchors:?}"
            )))
        }
    };
    for &a in &anchor_global {
        if a >= model.num_nodes() {
            return Err(Error::NodeOutOfRange {
                node: a,
                num_nodes: model.num_nodes(),
                context: "anchor".into(),
            });
        }
    }

    // breadth-first search, layer by layer
    let mut dist: HashMap<usize, usize> = anchor_global.iter().map(|&a| (a, 0)).collect();
    let mut frontier = anchor_global.clone();
    for level in 1..=depth {
        let mut next = Vec::new();
        for &u in &frontier {
            for &(v, _) in model.neighbors(u) {
                if let std::collections::hash_map::Entry::Vacant(slot) = dist.entry(v) {
                    slot.insert(level);
                    next.push(v);
                }
            }
        }
        frontier = next;
    }

    let mut nodes: Vec<usize> = dist.keys().copied().collect();
    nodes.sort_unstable();
    let local: HashMap<usize, usize> = nodes.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let distances: Vec<usize> = nodes.iter().map(|g| dist[g]).collect();

    let mut edges = Vec::new();
    let mut biases = Vec::new();
    for (li, &g) in nodes.iter().enumerate() {
        if distances[li] + 1 > depth {
            continue;
        }
        for &(v, w) in model.neighbors(g) {
            let lv = local[&v];
            // interior-interior edges are seen from both ends; keep one copy
            if distances[lv] < depth && lv < li {
                continue;
            }
            edges.push(LocalEdge {
                a: li.min(lv),
                b: li.max(lv),
                weight: w,
            });
        }
        let h = model.bias(g);
        if h != 0.0 {
            biases.push((li, h));
        }
    }
    edges.sort_by_key(|l| (l.a, l.b));

    let anchor = match *anchor_global.as_slice() {
        [k] => Anchor::Node(local[&k]),
        [i, j] => Anchor::pair(local[&i], local[&j]),
        _ => unreachable!(),
    };

    Ok(AnchoredSubgraph {
        nodes,
        distances,
        edges,
        biases,
        anchor,
        depth,
    })
}

/// One light cone per nonzero coefficient: edge terms in canonical edge order,
/// then node terms in ascending node order.
pub fn decompose(model: &IsingModel, depth: usize) -> Result<Vec<Term>> {
    if depth == 0 {
        return Err(Error::InvalidParameter("depth p must be at least 1".into()));
    }
    let mut terms = Vec::with_capacity(model.num_terms());
    for e in model.edges().iter().filter(|e| !e.is_zero()) {
        terms.push(Term {
            id: TermId {
                kind: TermKind::Edge { i: e.u, j: e.v },
                coefficient: e.weight,
            },
            subgraph: extract_ball(model, &[e.u, e.v], depth)?,
        });
    }
    for (k, &h) in model.biases().iter().enumerate() {
        if h != 0.0 {
            terms.push(Term {
                id: TermId {
                    kind: TermKind::Node { k },
                    coefficient: h,
                },
                subgraph: extract_ball(model, &[k], depth)?,
            });
        }
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{gen_erdos_renyi, gen_random_regular, maxcut_model, PlainGraph};

    fn c4() -> IsingModel {
        maxcut_model(&PlainGraph::cycle(4).unwrap())
    }

    fn edge_set(sub: &AnchoredSubgraph) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = sub
            .edges
            .iter()
            .map(|e| {
                let (x, y) = (sub.nodes[e.a], sub.nodes[e.b]);
                (x.min(y), x.max(y))
            })
            .collect();
        v.sort_unstable();
        v
    }

    #[test]
    fn c4_edge_anchor_depth_one() {
        let sub = extract_ball(&c4(), &[0, 1], 1).unwrap();
        assert_eq!(sub.nodes, vec![0, 1, 2, 3]);
        assert_eq!(edge_set(&sub), vec![(0, 1), (0, 3), (1, 2)]);
        assert_eq!(sub.anchor, Anchor::Pair(0, 1));
        assert_eq!(sub.distances, vec![0, 0, 1, 1]);
    }

    #[test]
    fn triangle_free_cubic_cone_has_six_nodes() {
        let g = gen_random_regular(200, 3, 3).unwrap();
        let m = maxcut_model(&g);
        let mut checked = 0;
        for &(i, j) in g.edges() {
            let ni: Vec<_> = m.neighbors(i).iter().map(|x| x.0).collect();
            let nj: Vec<_> = m.neighbors(j).iter().map(|x| x.0).collect();
            if ni.iter().any(|x| nj.contains(x)) {
                continue;
            }
            let sub = extract_ball(&m, &[i, j], 1).unwrap();
            assert_eq!(sub.num_qubits(), 6);
            assert_eq!(sub.edges.len(), 5);
            checked += 1;
        }
        assert!(checked > 0);
    }

    #[test]
    fn complete_graph_cone_is_whole_graph() {
        let m = maxcut_model(&PlainGraph::complete(6));
        for p in 1..=3 {
            let sub = extract_ball(&m, &[2, 4], p).unwrap();
            assert_eq!(sub.num_qubits(), 6);
            // p = 1 leaves out the 6 edges between non-anchor nodes
            assert_eq!(sub.edges.len(), if p == 1 { 9 } else { 15 });
            let node = extract_ball(&m, &[5], p).unwrap();
            assert_eq!(node.num_qubits(), 6);
            // p = 1 single-node cone: only edges touching the anchor
            if p == 1 {
                assert_eq!(node.edges.len(), 5);
            } else {
                assert_eq!(node.edges.len(), 15);
            }
        }
    }

    #[test]
    fn depth_zero_rejected() {
        assert!(extract_ball(&c4(), &[0], 0).is_err());
        assert!(decompose(&c4(), 0).is_err());
        assert!(extract_ball(&c4(), &[0, 0], 1).is_err());
        assert!(extract_ball(&c4(), &[9], 1).is_err());
    }

    #[test]
    fn boundary_biases_dropped() {
        let m =
            IsingModel::new(3, &[(0, 1, 1.0), (1, 2, 1.0)], &[(1, 0.5), (2, 2.0)], 0.0).unwrap();
        let sub = extract_ball(&m, &[0], 1).unwrap();
        assert_eq!(sub.nodes, vec![0, 1]);
        assert!(sub.biases.is_empty());
        let sub = extract_ball(&m, &[0], 2).unwrap();
        assert_eq!(sub.nodes, vec![0, 1, 2]);
        assert_eq!(sub.biases, vec![(1, 0.5)]);
    }

    #[test]
    fn decompose_term_counts_and_order() {
        let terms = decompose(&c4(), 1).unwrap();
        assert_eq!(terms.len(), 4);
        assert!(terms
            .iter()
            .all(|t| matches!(t.id.kind, TermKind::Edge { .. })));

        let lone = IsingModel::new(1, &[], &[(0, 1.0)], 0.0).unwrap();
        let terms = decompose(&lone, 1).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(terms[0].subgraph.nodes, vec![0]);
        assert_eq!(terms[0].subgraph.anchor, Anchor::Node(0));

        let g = gen_random_regular(40, 3, 1).unwrap();
        assert_eq!(decompose(&maxcut_model(&g), 2).unwrap().len(), 60);

        let mixed = IsingModel::new(
            3,
            &[(1, 2, 1.0), (0, 1, -1.0), (0, 2, 0.0)],
            &[(2, 1.0), (0, 0.5)],
            0.0,
        )
        .unwrap();
        let kinds: Vec<_> = decompose(&mixed, 1)
            .unwrap()
            .iter()
            .map(|t| t.id.kind)
            .collect();
        assert_eq!(
            kinds,
            vec![
                TermKind::Edge { i: 0, j: 1 },
                TermKind::Edge { i: 1, j: 2 },
                TermKind::Node { k: 0 },
                TermKind::Node { k: 2 },
            ]
        );
    }

    fn bfs(model: &IsingModel, anchors: &[usize]) -> Vec<Option<usize>> {
        let mut dist = vec![None; model.num_nodes()];
        let mut queue = std::collections::VecDeque::new();
        for &a in anchors {
            dist[a] = Some(0);
            queue.push_back(a);
        }
        while let Some(u) = queue.pop_front() {
            for &(v, _) in model.neighbors(u) {
                if dist[v].is_none() {
                    dist[v] = Some(dist[u].unwrap() + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    #[test]
    fn ball_invariants_on_random_graphs() {
        for seed in 0..20 {
            let g = gen_erdos_renyi(14, 0.25, seed).unwrap();
            let m = maxcut_model(&g);
            for &(i, j) in g.edges() {
                let dist = bfs(&m, &[i, j]);
                let mut previous: Option<Vec<usize>> = None;
                for p in 1..=4 {
                    let sub = extract_ball(&m, &[i, j], p).unwrap();
                    let expect: Vec<usize> = (0..14)
                        .filter(|&v| dist[v].is_some_and(|d| d <= p))
                        .collect();
                    assert_eq!(sub.nodes, expect);
                    for (li, &gid) in sub.nodes.iter().enumerate() {
                        assert_eq!(Some(sub.distances[li]), dist[gid]);
                    }
                    for e in &sub.edges {
                        assert!(sub.distances[e.a].min(sub.distances[e.b]) < p);
                    }
                    let all_edges = m
                        .edges()
                        .iter()
                        .filter(|e| {
                            let d = |v: usize| dist[v].unwrap_or(usize::MAX);
                            d(e.u).min(d(e.v)) < p
                        })
                        .count();
                    assert_eq!(sub.edges.len(), all_edges);
                    if let Some(prev) = &previous {
                        assert!(prev.iter().all(|v| sub.nodes.contains(v)));
                    }
                    previous = Some(sub.nodes.clone());
                }
            }
        }
    }
}
