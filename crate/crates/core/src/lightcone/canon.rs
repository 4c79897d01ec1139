//! Colour refinement, canonical relabelling and isomorphism checks for
//! anchored weighted subgraphs.
//!
//! Colours are 64-bit hashes of label-independent data (anchor flag, exact
//! bias bits, neighbour colours and exact weight bits), so two isomorphic
//! subgraphs refine to the same colour multiset regardless of how their nodes
//! are numbered.

use super::{Anchor, AnchoredSubgraph};

/// Maximum number of search-tree leaves explored by [`canonical_form`].
pub const DEFAULT_LEAF_BUDGET: usize = 4096;

const SALT_REFINE: u64 = 0x9e37_79b9_7f4a_7c15;
const SALT_INDIVIDUAL: u64 = 0xd1b5_4a32_d192_ed03;
const SALT_ANCHOR: u64 = 0x94d0_49bb_1331_11eb;

fn mix(h: u64, x: u64) -> u64 {
    // splitmix64 finaliser over the combined word
    let mut z = h ^ x
        .wrapping_add(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(h << 6)
        .wrapping_add(h >> 2);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49eb_1331_11eb);
    z ^ (z >> 31)
}

/// Exact bit pattern of a weight, with `-0.0` folded into `0.0`.
fn bits(w: f64) -> u64 {
    if w == 0.0 {
        0
    } else {
        w.to_bits()
    }
}

/// Opaque key shared by every subgraph in an anchored-isomorphism class.
/// Equal keys do not prove isomorphism.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(Vec<u8>);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

struct View {
    // sorted by neighbour
    adj: Vec<Vec<(usize, u64)>>,
    // (anchor flag, bias bits) per node
    labels: Vec<(bool, u64)>,
}

impl View {
    fn new(sub: &AnchoredSubgraph) -> Self {
        let mut adj = vec![Vec::new(); sub.num_qubits()];
        for e in &sub.edges {
            adj[e.a].push((e.b, bits(e.weight)));
            adj[e.b].push((e.a, bits(e.weight)));
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let labels = sub
            .bias_vector()
            .iter()
            .enumerate()
            .map(|(v, &h)| (sub.anchor.contains(v), bits(h)))
            .collect();
        Self { adj, labels }
    }

    /// True when swapping `u` and `v` is an automorphism: equal labels and
    /// equal weighted neighbourhoods apart from each other.
    fn twins(&self, u: usize, v: usize) -> bool {
        if self.labels[u] != self.labels[v] {
            return false;
        }
        let nu = self.adj[u].iter().filter(|&&(x, _)| x != v);
        let nv = self.adj[v].iter().filter(|&&(x, _)| x != u);
        nu.eq(nv)
    }

    fn initial_colors(&self, sub: &AnchoredSubgraph) -> Vec<u64> {
        let bias = sub.bias_vector();
        (0..sub.num_qubits())
            .map(|v| {
                let mut h = mix(u64::from(sub.anchor.contains(v)), SALT_ANCHOR);
                h = mix(h, bits(bias[v]));
                let mut incident: Vec<u64> = self.adj[v].iter().map(|&(_, w)| w).collect();
                incident.sort_unstable();
                incident
                    .iter()
                    .fold(mix(h, incident.len() as u64), |h, &w| mix(h, w))
            })
            .collect()
    }

    /// Iterates neighbourhood hashing until the number of colour classes
    /// stops growing.
    fn refine(&self, colors: &mut Vec<u64>) {
        let mut classes = count_classes(colors);
        let mut scratch = Vec::new();
        loop {
            let next: Vec<u64> = (0..colors.len())
                .map(|v| {
                    scratch.clear();
                    scratch.extend(self.adj[v].iter().map(|&(u, w)| mix(colors[u], w)));
                    scratch.sort_unstable();
                    scratch
                        .iter()
                        .fold(mix(colors[v], SALT_REFINE), |h, &x| mix(h, x))
                })
                .collect();
            let count = count_classes(&next);
            *colors = next;
            if count == classes {
                return;
            }
            classes = count;
        }
    }

    fn stable_colors(&self, sub: &AnchoredSubgraph) -> Vec<u64> {
        let mut colors = self.initial_colors(sub);
        self.refine(&mut colors);
        colors
    }
}

fn count_classes(colors: &[u64]) -> usize {
    let mut sorted = colors.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    sorted.len()
}

/// Key from the stable colouring: sorted colour multiset plus the edge list
/// rewritten in colours.
pub fn canonical_key(sub: &AnchoredSubgraph) -> CanonicalKey {
    let view = View::new(sub);
    let colors = view.stable_colors(sub);

    let mut sorted = colors.clone();
    sorted.sort_unstable();
    let mut edges: Vec<(u64, u64, u64)> = sub
        .edges
        .iter()
        .map(|e| {
            let (x, y) = (colors[e.a], colors[e.b]);
            (x.min(y), x.max(y), bits(e.weight))
        })
        .collect();
    edges.sort_unstable();

    let mut out = Vec::with_capacity(8 * (3 + sorted.len() + 3 * edges.len()));
    for word in [sub.depth as u64, sorted.len() as u64, edges.len() as u64] {
        out.extend_from_slice(&word.to_le_bytes());
    }
    for c in sorted {
        out.extend_from_slice(&c.to_le_bytes());
    }
    for (x, y, w) in edges {
        for word in [x, y, w] {
            out.extend_from_slice(&word.to_le_bytes());
        }
    }
    CanonicalKey(out)
}

/// A subgraph relabelled into canonical order.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    /// The relabelled subgraph; simulating it gives the same term value as the
    /// original.
    pub subgraph: AnchoredSubgraph,
    /// `permutation[original_local] = canonical_local`.
    pub permutation: Vec<usize>,
    /// False when the leaf budget cut the search short. The relabelling is
    /// still a deterministic function of the input, but isomorphic inputs
    /// may then land on different forms.
    pub exact: bool,
    certificate: Vec<u64>,
}

impl CanonicalForm {
    /// Identical relabelled structure (anchors, exact weights and biases).
    pub fn same_structure(&self, other: &CanonicalForm) -> bool {
        self.subgraph.depth == other.subgraph.depth && self.certificate == other.certificate
    }
}

struct Search<'a> {
    sub: &'a AnchoredSubgraph,
    view: View,
    budget: usize,
    leaves: usize,
    truncated: bool,
    best: Option<(Vec<u64>, Vec<usize>)>,
}

impl Search<'_> {
    fn run(&mut self, colors: Vec<u64>) {
        if self.leaves >= self.budget {
            self.truncated = true;
            return;
        }
        let Some(target) = first_nontrivial_cell(&colors) else {
            self.leaves += 1;
            let perm = ranks(&colors);
            let cert = certificate(self.sub, &perm);
            if self.best.as_ref().is_none_or(|(b, _)| cert < *b) {
                self.best = Some((cert, perm));
            }
            return;
        };
        // Swapping twins maps one subtree onto the other with the same
        // certificates, so one representative per twin set suffices.
        let mut explored: Vec<usize> = Vec::new();
        for v in 0..colors.len() {
            if colors[v] != target || explored.iter().any(|&r| self.view.twins(r, v)) {
                continue;
            }
            explored.push(v);
            let mut next = colors.clone();
            next[v] = mix(next[v], SALT_INDIVIDUAL);
            self.view.refine(&mut next);
            self.run(next);
            if self.truncated {
                return;
            }
        }
    }
}

/// Smallest colour hash shared by more than one node.
fn first_nontrivial_cell(colors: &[u64]) -> Option<u64> {
    let mut sorted = colors.to_vec();
    sorted.sort_unstable();
    sorted.windows(2).find(|w| w[0] == w[1]).map(|w| w[0])
}

/// Rank of each node's colour; colours are assumed distinct.
fn ranks(colors: &[u64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..colors.len()).collect();
    order.sort_unstable_by_key(|&v| colors[v]);
    let mut perm = vec![0; colors.len()];
    for (rank, &v) in order.iter().enumerate() {
        perm[v] = rank;
    }
    perm
}

fn certificate(sub: &AnchoredSubgraph, perm: &[usize]) -> Vec<u64> {
    let mut cert = vec![sub.num_qubits() as u64];
    let mut anchors: Vec<u64> = sub
        .anchor
        .indices()
        .iter()
        .map(|&a| perm[a] as u64)
        .collect();
    anchors.sort_unstable();
    cert.push(anchors.len() as u64);
    cert.extend(anchors);

    let mut edges: Vec<(u64, u64, u64)> = sub
        .edges
        .iter()
        .map(|e| {
            let (x, y) = (perm[e.a] as u64, perm[e.b] as u64);
            (x.min(y), x.max(y), bits(e.weight))
        })
        .collect();
    edges.sort_unstable();
    cert.push(edges.len() as u64);
    for (x, y, w) in edges {
        cert.extend([x, y, w]);
    }

    let mut biases: Vec<(u64, u64)> = sub
        .biases
        .iter()
        .map(|&(i, h)| (perm[i] as u64, bits(h)))
        .collect();
    biases.sort_unstable();
    cert.push(biases.len() as u64);
    for (i, h) in biases {
        cert.extend([i, h]);
    }
    cert
}

/// Canonical relabelling by individualisation–refinement: every branch of
/// the search tree is explored (up to `leaf_budget` leaves) and the leaf with
/// the lexicographically smallest certificate wins.
pub fn canonical_form(sub: &AnchoredSubgraph, leaf_budget: usize) -> CanonicalForm {
    let view = View::new(sub);
    let colors = view.stable_colors(sub);
    let mut search = Search {
        sub,
        view,
        budget: leaf_budget.max(1),
        leaves: 0,
        truncated: false,
        best: None,
    };
    search.run(colors);
    let (certificate, permutation) = search.best.expect("search visits at least one leaf");
    CanonicalForm {
        subgraph: sub.relabel(&permutation),
        permutation,
        exact: !search.truncated,
        certificate,
    }
}

/// Checks that `mapping[a_local] = b_local` is an anchored isomorphism with
/// exactly matching weights and biases.
pub fn is_isomorphism(a: &AnchoredSubgraph, b: &AnchoredSubgraph, mapping: &[usize]) -> bool {
    let n = a.num_qubits();
    if b.num_qubits() != n || mapping.len() != n || a.edges.len() != b.edges.len() {
        return false;
    }
    let mut seen = vec![false; n];
    for &m in mapping {
        if m >= n || std::mem::replace(&mut seen[m], true) {
            return false;
        }
    }
    let mapped_anchor = a.anchor.map(|i| mapping[i]);
    if mapped_anchor != b.anchor {
        return false;
    }
    let (ba, bb) = (a.bias_vector(), b.bias_vector());
    if (0..n).any(|i| bits(ba[i]) != bits(bb[mapping[i]])) {
        return false;
    }
    let weight_b = weight_lookup(b);
    a.edges.iter().all(|e| {
        let (x, y) = (mapping[e.a], mapping[e.b]);
        weight_b.get(&(x.min(y), x.max(y))) == Some(&bits(e.weight))
    })
}

fn weight_lookup(sub: &AnchoredSubgraph) -> WeightMap {
    sub.edges
        .iter()
        .map(|e| ((e.a.min(e.b), e.a.max(e.b)), bits(e.weight)))
        .collect()
}

/// Backtracking search for an anchored isomorphism `a → b`, restricted to
/// nodes with matching stable colours.
pub fn find_isomorphism(a: &AnchoredSubgraph, b: &AnchoredSubgraph) -> Option<Vec<usize>> {
    let n = a.num_qubits();
    if b.num_qubits() != n
        || a.edges.len() != b.edges.len()
        || a.biases.len() != b.biases.len()
        || matches!(a.anchor, Anchor::Node(_)) != matches!(b.anchor, Anchor::Node(_))
    {
        return None;
    }
    let (va, vb) = (View::new(a), View::new(b));
    let (ca, cb) = (va.stable_colors(a), vb.stable_colors(b));
    let (mut sa, mut sb) = (ca.clone(), cb.clone());
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return None;
    }

    // assign nodes of `a` rarest colour first
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (sa.iter().filter(|&&c| c == ca[v]).count(), ca[v], v));

    let mut matcher = Matcher {
        order,
        wa: weight_lookup(a),
        wb: weight_lookup(b),
        ca,
        cb,
        mapping: vec![usize::MAX; n],
        used: vec![false; n],
    };
    if matcher.extend(0) && is_isomorphism(a, b, &matcher.mapping) {
        Some(matcher.mapping)
    } else {
        None
    }
}

type WeightMap = std::collections::HashMap<(usize, usize), u64>;

struct Matcher {
    order: Vec<usize>,
    ca: Vec<u64>,
    cb: Vec<u64>,
    wa: WeightMap,
    wb: WeightMap,
    mapping: Vec<usize>,
    used: Vec<bool>,
}

impl Matcher {
    fn extend(&mut self, depth: usize) -> bool {
        if depth == self.order.len() {
            return true;
        }
        let key = |i: usize, j: usize| (i.min(j), i.max(j));
        let x = self.order[depth];
        for y in 0..self.cb.len() {
            if self.used[y] || self.cb[y] != self.ca[x] {
                continue;
            }
            let consistent = self.order[..depth]
                .iter()
                .all(|&u| self.wa.get(&key(x, u)) == self.wb.get(&key(y, self.mapping[u])));
            if !consistent {
                continue;
            }
            self.mapping[x] = y;
            self.used[y] = true;
            if self.extend(depth + 1) {
                return true;
            }
            self.used[y] = false;
            self.mapping[x] = usize::MAX;
        }
        false
    }
}
