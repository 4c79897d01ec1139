//! Weighted-graph form of a quadratic Ising cost operator.
//!
//! A model stores couplings `w_uv` on unordered node pairs, per-node biases
//! `h_k` and a constant offset. The classical cost of a spin assignment is
//!
//! ```text
//! C(z) = Σ_(u<v) w_uv z_u z_v + Σ_k h_k z_k + offset
//! ```
//!
//! Every unordered pair is counted once.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A stored coupling. Endpoints are normalised so that `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
}

impl Edge {
    /// Zero-weight edges stay in the model but never become terms.
    pub fn is_zero(&self) -> bool {
        self.weight == 0.0
    }
}

/// Immutable Ising model. Build with [`IsingModel::new`] or parse from the
/// instance file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct IsingModel {
    num_nodes: usize,
    edges: Vec<Edge>,
    biases: Vec<f64>,
    offset: f64,
    // neighbours over nonzero-weight edges: (node, weight)
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl IsingModel {
    /// Builds a model, merging duplicate unordered edges and duplicate biases
    /// by summation. Edges are kept in canonical `(min, max)` order.
    pub fn new(
        num_nodes: usize,
        edges: &[(usize, usize, f64)],
        biases: &[(usize, f64)],
        offset: f64,
    ) -> Result<Self> {
        check_finite(offset, "offset")?;

        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (idx, &(u, v, w)) in edges.iter().enumerate() {
            let context = format!("edge #{idx} ({u}, {v}, {w})");
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
            check_finite(w, &context)?;
            *merged.entry((u.min(v), u.max(v))).or_insert(0.0) += w;
        }

        let mut bias_vec = vec![0.0; num_nodes];
        for (idx, &(k, h)) in biases.iter().enumerate() {
            let context = format!("bias #{idx} ({k}, {h})");
            if k >= num_nodes {
                return Err(Error::NodeOutOfRange {
                    node: k,
                    num_nodes,
                    context,
                });
            }
            check_finite(h, &context)?;
            bias_vec[k] += h;
        }

        let edges: Vec<Edge> = merged
            .into_iter()
            .map(|((u, v), weight)| Edge { u, v, weight })
            .collect();

        let mut adjacency = vec![Vec::new(); num_nodes];
        for e in edges.iter().filter(|e| !e.is_zero()) {
            adjacency[e.u].push((e.v, e.weight));
            adjacency[e.v].push((e.u, e.weight));
        }

        Ok(Self {
            num_nodes,
            edges,
            biases: bias_vec,
            offset,
            adjacency,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// All stored edges, including zero-weight ones, in canonical order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Dense bias vector indexed by node id; absent biases are `0.0`.
    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn bias(&self, node: usize) -> f64 {
        self.biases[node]
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Neighbours of `node` over nonzero-weight edges.
    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adjacency[node]
    }

    /// Weight of the stored edge between `a` and `b`, if any.
    pub fn edge_weight(&self, a: usize, b: usize) -> Option<f64> {
        let key = (a.min(b), a.max(b));
        self.edges
            .binary_search_by(|e| (e.u, e.v).cmp(&key))
            .ok()
            .map(|i| self.edges[i].weight)
    }

    /// Number of Hamiltonian terms with a nonzero coefficient.
    pub fn num_terms(&self) -> usize {
        self.edges.iter().filter(|e| !e.is_zero()).count()
            + self.biases.iter().filter(|&&h| h != 0.0).count()
    }

    /// `Σ w z_u z_v + Σ h z + offset`, accumulated in canonical edge order
    /// followed by ascending node order.
    pub fn evaluate_cost(&self, z: &SpinAssignment) -> Result<f64> {
        if z.len() != self.num_nodes {
            return Err(Error::LengthMismatch {
                expected: self.num_nodes,
                got: z.len(),
            });
        }
        let s = z.values();
        Ok(self.cost_by(|i| f64::from(s[i])))
    }

    /// Cost of the spins encoded by a basis index (bit `i` set means
    /// `z_i = -1`). Same accumulation order as [`Self::evaluate_cost`].
    pub fn cost_of_basis_index(&self, index: u64) -> f64 {
        self.cost_by(|i| if (index >> i) & 1 == 0 { 1.0 } else { -1.0 })
    }

    fn cost_by(&self, spin: impl Fn(usize) -> f64) -> f64 {
        let mut acc = 0.0;
        for e in &self.edges {
            acc += e.weight * (spin(e.u) * spin(e.v));
        }
        for (k, &h) in self.biases.iter().enumerate() {
            acc += h * spin(k);
        }
        acc + self.offset
    }

    /// `(max_degree, avg_degree)` over nonzero-weight edges, with
    /// `avg_degree = edges / nodes`.
    pub fn degree_stats(&self) -> (usize, f64) {
        if self.num_nodes == 0 {
            return (0, 0.0);
        }
        let max = self.adjacency.iter().map(Vec::len).max().unwrap_or(0);
        let nonzero = self.edges.iter().filter(|e| !e.is_zero()).count();
        (max, nonzero as f64 / self.num_nodes as f64)
    }

    /// Canonical instance-file text.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serialisation cannot fail")
    }

    /// Parses the instance-file format. Errors carry serde's line/column
    /// context or name the offending entry.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn check_finite(value: f64, context: &str) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite {
            value,
            context: context.to_string(),
        })
    }
}

/// On-disk shape of an instance.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    num_nodes: usize,
    edges: Vec<(usize, usize, f64)>,
    #[serde(default)]
    biases: Vec<(usize, f64)>,
    #[serde(default)]
    offset: f64,
}

impl TryFrom<InstanceFile> for IsingModel {
    type Error = Error;

    fn try_from(f: InstanceFile) -> Result<Self> {
        IsingModel::new(f.num_nodes, &f.edges, &f.biases, f.offset)
    }
}

impl From<IsingModel> for InstanceFile {
    fn from(m: IsingModel) -> Self {
        InstanceFile {
            num_nodes: m.num_nodes,
            edges: m.edges.iter().map(|e| (e.u, e.v, e.weight)).collect(),
            biases: m
                .biases
                .iter()
                .enumerate()
                .filter(|(_, &h)| h != 0.0)
                .map(|(k, &h)| (k, h))
                .collect(),
            offset: m.offset,
        }
    }
}

/// A classical spin configuration, each entry `+1` or `-1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinAssignment(Vec<i8>);

impl SpinAssignment {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some((index, &v)) = values.iter().enumerate().find(|(_, &v)| v != 1 && v != -1) {
            return Err(Error::InvalidSpin {
                index,
                value: i64::from(v),
            });
        }
        Ok(Self(values))
    }

    /// Spins read from a computational basis index: bit `i` clear means
    /// `z_i = +1`, set means `z_i = -1`.
    pub fn from_basis_index(num_nodes: usize, index: u64) -> Self {
        Self(
            (0..num_nodes)
                .map(|i| if (index >> i) & 1 == 0 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Global spin flip.
    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|&s| -s).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spins(v: &[i8]) -> SpinAssignment {
        SpinAssignment::new(v.to_vec()).unwrap()
    }

    #[test]
    fn minimal_instance() {
        let m = IsingModel::new(2, &[(0, 1, 1.0)], &[], 0.0).unwrap();
        assert_eq!(
            m.edges(),
            &[Edge {
                u: 0,
                v: 1,
                weight: 1.0
            }]
        );
        assert_eq!(m.num_terms(), 1);
    }

    #[test]
    fn duplicate_edges_merge() {
        let m = IsingModel::new(2, &[(0, 1, 0.5), (1, 0, 0.5)], &[], 0.0).unwrap();
        assert_eq!(m.edges().len(), 1);
        assert_eq!(m.edge_weight(1, 0), Some(1.0));
    }

    #[test]
    fn duplicate_biases_merge() {
        let m = IsingModel::new(2, &[], &[(1, 0.25), (1, 0.5)], 0.0).unwrap();
        assert_eq!(m.biases(), &[0.0, 0.75]);
    }

    #[test]
    fn zero_weight_edge_is_kept_but_not_a_term() {
        let m = IsingModel::new(3, &[(0, 1, 1.0), (1, 2, -1.0), (2, 1, 1.0)], &[], 0.0).unwrap();
        assert_eq!(m.edges().len(), 2);
        assert!(m.edges()[1].is_zero());
        assert_eq!(m.num_terms(), 1);
        assert!(m.neighbors(2).is_empty());
    }

    #[test]
    fn rejects_out_of_range_node() {
        let err = IsingModel::new(3, &[(0, 3, 1.0)], &[], 0.0).unwrap_err();
        match err {
            Error::NodeOutOfRange { node, .. } => assert_eq!(node, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(err_string(IsingModel::new(3, &[], &[(5, 1.0)], 0.0)).contains("bias #0"));
    }

    #[test]
    fn rejects_self_loop() {
        assert!(matches!(
            IsingModel::new(3, &[(1, 1, 1.0)], &[], 0.0),
            Err(Error::SelfLoop { node: 1, .. })
        ));
    }

    fn err_string<T: std::fmt::Debug>(r: Result<T>) -> String {
        r.unwrap_err().to_string()
    }

    #[test]
    fn cost_of_single_edge() {
        let m = IsingModel::new(2, &[(0, 1, 1.0)], &[], 0.0).unwrap();
        assert_eq!(m.evaluate_cost(&spins(&[1, 1])).unwrap(), 1.0);
        assert_eq!(m.evaluate_cost(&spins(&[1, -1])).unwrap(), -1.0);
    }

    #[test]
    fn frustrated_triangle_minimum_is_minus_one() {
        let m = IsingModel::new(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], &[], 0.0).unwrap();
        let min = (0..8u64)
            .map(|b| {
                m.evaluate_cost(&SpinAssignment::from_basis_index(3, b))
                    .unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        assert_eq!(min, -1.0);
    }

    #[test]
    fn cost_length_mismatch() {
        let m = IsingModel::new(2, &[(0, 1, 1.0)], &[], 0.0).unwrap();
        assert!(matches!(
            m.evaluate_cost(&spins(&[1])),
            Err(Error::LengthMismatch {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn spin_assignment_validates() {
        assert!(SpinAssignment::new(vec![1, 0]).is_err());
        assert_eq!(
            SpinAssignment::from_basis_index(3, 0b101).values(),
            &[-1, 1, -1]
        );
    }

    #[test]
    fn degree_stats_examples() {
        let c4 = IsingModel::new(
            4,
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)],
            &[],
            0.0,
        )
        .unwrap();
        assert_eq!(c4.degree_stats(), (2, 1.0));
        let k4_edges: Vec<_> = (0..4)
            .flat_map(|i| ((i + 1)..4).map(move |j| (i, j, 1.0)))
            .collect();
        let k4 = IsingModel::new(4, &k4_edges, &[], 0.0).unwrap();
        assert_eq!(k4.degree_stats(), (3, 1.5));
        let single = IsingModel::new(1, &[], &[], 0.0).unwrap();
        assert_eq!(single.degree_stats(), (0, 0.0));
    }

    #[test]
    fn parse_errors() {
        let missing = r#"{"edges": [[0, 1, 1.0]], "biases": [], "offset": 0}"#;
        assert!(err_string(IsingModel::from_json(missing)).contains("num_nodes"));

        let textual = r#"{"num_nodes": 2, "edges": [[0, 1, "1.0"]]}"#;
        let msg = err_string(IsingModel::from_json(textual));
        assert!(msg.contains("line"), "{msg}");

        let bad_node = r#"{"num_nodes": 2, "edges": [[0, 2, 1.0]]}"#;
        assert!(err_string(IsingModel::from_json(bad_node)).contains("edge #0"));
    }

    #[test]
    fn canonical_serialisation() {
        let m = IsingModel::new(
            3,
            &[(2, 1, -0.5), (1, 0, 1.0)],
            &[(2, 1.0), (0, -1.0)],
            0.25,
        )
        .unwrap();
        assert_eq!(
            m.to_json(),
            r#"{"num_nodes":3,"edges":[[0,1,1.0],[1,2,-0.5]],"biases":[[0,-1.0],[2,1.0]],"offset":0.25}"#
        );
    }

    fn arb_model() -> impl Strategy<Value = IsingModel> {
        (1usize..8).prop_flat_map(|n| {
            let edge = (0..n, 0..n, -4.0f64..4.0);
            let bias = (0..n, -2.0f64..2.0);
            (
                Just(n),
                prop::collection::vec(edge, 0..12),
                prop::collection::vec(bias, 0..6),
                -3.0f64..3.0,
            )
                .prop_map(|(n, edges, biases, offset)| {
                    let edges: Vec<_> = edges.into_iter().filter(|(u, v, _)| u != v).collect();
                    IsingModel::new(n, &edges, &biases, offset).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn json_round_trip(m in arb_model()) {
            let text = m.to_json();
            let back = IsingModel::from_json(&text).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(back.to_json(), text);
        }

        #[test]
        fn cost_bounded_and_flip_symmetric(m in arb_model(), bits in any::<u64>()) {
            let z = SpinAssignment::from_basis_index(m.num_nodes(), bits);
            let c = m.evaluate_cost(&z).unwrap();
            let bound: f64 = m.edges().iter().map(|e| e.weight.abs()).sum::<f64>()
                + m.biases().iter().map(|h| h.abs()).sum::<f64>();
            prop_assert!((c - m.offset()).abs() <= bound + 1e-12);

            let unbiased = IsingModel::new(
                m.num_nodes(),
                &m.edges().iter().map(|e| (e.u, e.v, e.weight)).collect::<Vec<_>>(),
                &[],
                m.offset(),
            ).unwrap();
            prop_assert_eq!(
                unbiased.evaluate_cost(&z).unwrap(),
                unbiased.evaluate_cost(&z.flipped()).unwrap()
            );
        }
    }
}
