//! Benchmark instance families: random regular Max-Cut, Sherrington–Kirkpatrick
//! spin glasses, and graph colouring through a one-hot QUBO.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{IsingModel, SpinAssignment};

const MAX_PAIRING_ATTEMPTS: usize = 10_000;

/// Simple undirected graph without weights.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlainGraph {
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
}

impl PlainGraph {
    /// Validates simplicity; edges are normalised and sorted.
    pub fn new(num_nodes: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            let context = format!("edge ({u}, {v})");
            for node in [u, v] {
                if node >= num_nodes {
                    return Err(Error::NodeOutOfRange {
                        node,
                        num_nodes,
                        context,
                    });
                }
            }
            if u == v {
                return Err(Error::SelfLoop { node: u, context });
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate edge ({}, {})",
                    key.0, key.1
                )));
            }
            out.push(key);
        }
        out.sort_unstable();
        Ok(Self {
            num_nodes,
            edges: out,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Cycle graph `C_n`.
    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!(
                "cycle needs n >= 3, got {n}"
            )));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::new(n, &edges)
    }

    /// Complete graph `K_n`.
    pub fn complete(n: usize) -> Self {
        let edges: Vec<_> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        Self::new(n, &edges).expect("complete graph is simple")
    }
}

/// Uniform-ish random `d`-regular graph from the pairing model. Pairings that
/// produce a self-loop or a repeated edge are discarded whole and redrawn.
pub fn gen_random_regular(n: usize, d: usize, seed: u64) -> Result<PlainGraph> {
    if !(n * d).is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "n*d must be even for a {d}-regular graph on {n} nodes"
        )));
    }
    if d >= n {
        return Err(Error::InvalidParameter(format!(
            "degree {d} must be smaller than the node count {n}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let mut seen = HashSet::with_capacity(n * d / 2);

    'attempt: for _ in 0..MAX_PAIRING_ATTEMPTS {
        points.shuffle(&mut rng);
        seen.clear();
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || !seen.insert((u.min(v), u.max(v))) {
                continue 'attempt;
            }
        }
        let edges: Vec<_> = seen.iter().copied().collect();
        return PlainGraph::new(n, &edges);
    }
    Err(Error::InvalidParameter(format!(
        "no simple {d}-regular pairing on {n} nodes after {MAX_PAIRING_ATTEMPTS} attempts"
    )))
}

/// Erdős–Rényi `G(n, p)` graph.
pub fn gen_erdos_renyi(n: usize, edge_prob: f64, seed: u64) -> Result<PlainGraph> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::InvalidParameter(format!(
            "edge probability {edge_prob} outside [0, 1]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(edge_prob) {
                edges.push((i, j));
            }
        }
    }
    PlainGraph::new(n, &edges)
}

/// Max-Cut cost: unit weight on every edge, no biases.
pub fn maxcut_model(g: &PlainGraph) -> IsingModel {
    let edges: Vec<_> = g.edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
    IsingModel::new(g.num_nodes, &edges, &[], 0.0).expect("plain graph is valid")
}

/// Sherrington–Kirkpatrick instance: complete graph with i.i.d. ±1 couplings.
pub fn sk_model(n: usize, seed: u64) -> Result<IsingModel> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "S-K model needs n >= 2, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            edges.push((i, j, w));
        }
    }
    IsingModel::new(n, &edges, &[], 0.0)
}

/// Quadratic pseudo-boolean function over `{0,1}` variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Qubo {
    num_vars: usize,
    linear: BTreeMap<usize, f64>,
    quadratic: BTreeMap<(usize, usize), f64>,
    constant: f64,
}

impl Qubo {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            ..Self::default()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn add_linear(&mut self, i: usize, c: f64) {
        *self.linear.entry(i).or_insert(0.0) += c;
    }

    /// `c · x_i · x_j`; `i == j` folds into the linear term since `x² = x`.
    pub fn add_quadratic(&mut self, i: usize, j: usize, c: f64) {
        if i == j {
            self.add_linear(i, c);
        } else {
            *self.quadratic.entry((i.min(j), i.max(j))).or_insert(0.0) += c;
        }
    }

    pub fn evaluate(&self, x: &[bool]) -> f64 {
        let bit = |i: usize| if x[i] { 1.0 } else { 0.0 };
        let mut acc = self.constant;
        for (&i, &c) in &self.linear {
            acc += c * bit(i);
        }
        for (&(i, j), &c) in &self.quadratic {
            acc += c * bit(i) * bit(j);
        }
        acc
    }

    /// Substitutes `x = (1 - z) / 2`. Every constant lands in the offset, so
    /// the Ising cost of `spin_image(x)` equals this QUBO on `x`.
    pub fn to_ising(&self) -> IsingModel {
        let mut offset = self.constant;
        let mut biases: BTreeMap<usize, f64> = BTreeMap::new();
        let mut couplings = Vec::with_capacity(self.quadratic.len());

        for (&i, &c) in &self.linear {
            offset += c / 2.0;
            *biases.entry(i).or_insert(0.0) -= c / 2.0;
        }
        for (&(i, j), &c) in &self.quadratic {
            offset += c / 4.0;
            *biases.entry(i).or_insert(0.0) -= c / 4.0;
            *biases.entry(j).or_insert(0.0) -= c / 4.0;
            couplings.push((i, j, c / 4.0));
        }
        let biases: Vec<_> = biases.into_iter().filter(|&(_, h)| h != 0.0).collect();
        IsingModel::new(self.num_vars, &couplings, &biases, offset)
            .expect("qubo indices are in range")
    }
}

/// Spin image of a binary assignment: `x = 0 → z = +1`, `x = 1 → z = -1`.
pub fn spin_image(x: &[bool]) -> SpinAssignment {
    SpinAssignment::new(x.iter().map(|&b| if b { -1 } else { 1 }).collect()).expect("spins are ±1")
}

/// Index of the binary variable "node `v` has colour `c`".
pub fn color_var(v: usize, c: usize, k: usize) -> usize {
    v * k + c
}

/// One-hot colouring QUBO
/// `A·Σ_v (1 − Σ_c x_vc)² + A·Σ_(u,v)∈E Σ_c x_uc x_vc`.
pub fn coloring_qubo(g: &PlainGraph, k: usize, penalty: f64) -> Result<Qubo> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 colours, got {k}"
        )));
    }
    if !(penalty > 0.0 && penalty.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "penalty must be positive, got {penalty}"
        )));
    }
    let mut q = Qubo::new(g.num_nodes * k);
    for v in 0..g.num_nodes {
        // (1 - Σx)² = 1 - Σx + 2 Σ_{c<c'} x x'   using x² = x
        q.add_constant(penalty);
        for c in 0..k {
            q.add_linear(color_var(v, c, k), -penalty);
            for c2 in (c + 1)..k {
                q.add_quadratic(color_var(v, c, k), color_var(v, c2, k), 2.0 * penalty);
            }
        }
    }
    for &(u, v) in &g.edges {
        for c in 0..k {
            q.add_quadratic(color_var(u, c, k), color_var(v, c, k), penalty);
        }
    }
    Ok(q)
}

/// Graph colouring as an Ising model on `n·k` spins.
pub fn coloring_model(g: &PlainGraph, k: usize, penalty: f64) -> Result<IsingModel> {
    Ok(coloring_qubo(g, k, penalty)?.to_ising())
}
