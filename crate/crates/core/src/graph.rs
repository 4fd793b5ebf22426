//! Graph and weight-vector data model.
//!
//! Adjacency is stored as sorted neighbour lists so that the dual graphs of
//! large assignment problems and dense random graphs share one representation.
//! Node indices are 0-based.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest node count accepted by [`enumerate_connected_graphs`].
pub const MAX_ENUMERATION_NODES: usize = 7;

/// Default floor below which an iterated weight counts as zero.
pub const SUPPORT_TOLERANCE: f64 = 1e-12;

/// Symmetric binary adjacency with an empty diagonal.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "EdgeList", into = "EdgeList")]
pub struct AdjacencyMatrix {
    neighbors: Vec<Vec<usize>>,
}

/// Serialized form of [`AdjacencyMatrix`].
#[derive(Serialize, Deserialize)]
struct EdgeList {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<EdgeList> for AdjacencyMatrix {
    type Error = Error;
    fn try_from(e: EdgeList) -> Result<Self> {
        Self::from_edges(e.n, &e.edges)
    }
}

impl From<AdjacencyMatrix> for EdgeList {
    fn from(a: AdjacencyMatrix) -> Self {
        Self {
            n: a.n(),
            edges: a.edges().collect(),
        }
    }
}

impl AdjacencyMatrix {
    pub fn empty(n: usize) -> Self {
        Self {
            neighbors: vec![Vec::new(); n],
        }
    }

    /// Builds an undirected graph from an edge list. Duplicate edges collapse,
    /// self-loops and out-of-range endpoints are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut neighbors = vec![Vec::new(); n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(invalid(format!("edge ({i}, {j}) out of range for {n} nodes")));
            }
            if i == j {
                return Err(invalid(format!("self-loop at node {i}")));
            }
            neighbors[i].push(j);
            neighbors[j].push(i);
        }
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { neighbors })
    }

    /// Builds from dense rows, checking the binary, symmetric and zero-diagonal invariants.
    pub fn from_dense<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut neighbors = vec![Vec::new(); n];
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 if i == j => return Err(invalid(format!("nonzero diagonal at node {i}"))),
                    1 => neighbors[i].push(j),
                    _ => return Err(invalid(format!("entry ({i}, {j}) = {v} is not binary"))),
                }
            }
        }
        for i in 0..n {
            for &j in &neighbors[i] {
                if neighbors[j].binary_search(&i).is_err() {
                    return Err(invalid(format!("asymmetric entry ({i}, {j})")));
                }
            }
        }
        Ok(Self { neighbors })
    }

    pub fn complete(n: usize) -> Self {
        let neighbors = (0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect();
        Self { neighbors }
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges).expect("path edges are valid")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a simple cycle needs at least 3 nodes");
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_edges(n, &edges).expect("cycle edges are valid")
    }

    /// Star with centre 0 and `n - 1` leaves.
    pub fn star(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (0, i)).collect();
        Self::from_edges(n, &edges).expect("star edges are valid")
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.neighbors.len()
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&j).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, list)| list.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let n = self.n();
        let mut rows = vec![vec![0u8; n]; n];
        for (i, j) in self.edges() {
            rows[i][j] = 1;
            rows[j][i] = 1;
        }
        rows
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for &j in &self.neighbors[i] {
                if !seen[j] {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == n
    }

    pub fn is_tree(&self) -> bool {
        self.n() >= 1 && self.edge_count() == self.n() - 1 && self.is_connected()
    }

    /// Common degree if every node has the same degree.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.neighbors.first().map_or(0, Vec::len);
        self.neighbors.iter().all(|l| l.len() == d).then_some(d)
    }

    pub fn min_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Relabels node `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n());
        let edges: Vec<_> = self.edges().map(|(i, j)| (perm[i], perm[j])).collect();
        Self::from_edges(self.n(), &edges).expect("permutation keeps edges valid")
    }

    /// Upper-triangle adjacency bits in row-major order, as a `0`/`1` string.
    pub fn bit_string(&self) -> String {
        let n = self.n();
        let mut s = String::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                s.push(if self.has_edge(i, j) { '1' } else { '0' });
            }
        }
        s
    }

    /// `((A + I) x)_i`.
    #[inline]
    pub fn closed_sum(&self, x: &[f64], i: usize) -> f64 {
        x[i] + self.neighbor_sum(x, i)
    }

    /// `(A x)_i`.
    #[inline]
    pub fn neighbor_sum(&self, x: &[f64], i: usize) -> f64 {
        self.neighbors[i].iter().map(|&j| x[j]).sum()
    }
}

impl fmt::Debug for AdjacencyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdjacencyMatrix")
            .field("n", &self.n())
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}

/// Nonnegative, finite node weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid(format!(
                "weight {i} = {} is not a finite nonnegative number",
                values[i]
            )));
        }
        Ok(Self(values))
    }

    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    /// Indicator vector of `set` in dimension `n`.
    pub fn indicator(n: usize, set: &NodeSet) -> Self {
        let mut v = vec![0.0; n];
        for &i in set.members() {
            v[i] = 1.0;
        }
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn l1(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Nodes with weight above `tol`. Use `0.0` for exact analytic inputs.
    pub fn support(&self, tol: f64) -> NodeSet {
        NodeSet(
            self.0
                .iter()
                .enumerate()
                .filter(|(_, &v)| v > tol)
                .map(|(i, _)| i)
                .collect(),
        )
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

impl std::ops::Deref for WeightVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedGraph {
    pub adjacency: AdjacencyMatrix,
    pub weights: WeightVector,
}

impl WeightedGraph {
    pub fn new(adjacency: AdjacencyMatrix, weights: WeightVector) -> Result<Self> {
        if adjacency.n() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: adjacency.n(),
                got: weights.len(),
            });
        }
        Ok(Self { adjacency, weights })
    }

    pub fn n(&self) -> usize {
        self.adjacency.n()
    }
}

/// Sorted, duplicate-free set of node indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeSet(Vec<usize>);

impl NodeSet {
    /// Collects `members` into a set, rejecting indices `>= n`.
    pub fn new(n: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v: Vec<usize> = members.into_iter().collect();
        if let Some(&bad) = v.iter().find(|&&i| i >= n) {
            return Err(invalid(format!("node {bad} out of range for {n} nodes")));
        }
        v.sort_unstable();
        v.dedup();
        Ok(Self(v))
    }

    /// Nodes `i` with `x[i] >= threshold`.
    pub fn from_threshold(x: &[f64], threshold: f64) -> Self {
        Self(
            x.iter()
                .enumerate()
                .filter(|(_, &v)| v >= threshold)
                .map(|(i, _)| i)
                .collect(),
        )
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_weight(&self, weights: &[f64]) -> f64 {
        self.0.iter().map(|&i| weights[i]).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetClassification {
    NotIndependent,
    IndependentNonMaximal,
    MaximalIndependent,
}

impl SetClassification {
    pub fn is_independent(self) -> bool {
        self != SetClassification::NotIndependent
    }
}

/// Density of a node set: the minimum number of set neighbours over nodes outside
/// the set. The minimum over an empty range is reported as `AllNodes`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Density {
    Finite(usize),
    AllNodes,
}

impl Density {
    /// `true` when the density is at least `k`.
    pub fn at_least(self, k: usize) -> bool {
        match self {
            Density::Finite(d) => d >= k,
            Density::AllNodes => true,
        }
    }
}

fn membership(n: usize, set: &NodeSet) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &i in set.members() {
        mask[i] = true;
    }
    mask
}

pub fn density(a: &AdjacencyMatrix, set: &NodeSet) -> Density {
    let mask = membership(a.n(), set);
    (0..a.n())
        .filter(|&i| !mask[i])
        .map(|i| a.neighbors(i).iter().filter(|&&j| mask[j]).count())
        .min()
        .map_or(Density::AllNodes, Density::Finite)
}

pub fn classify_set(a: &AdjacencyMatrix, set: &NodeSet) -> SetClassification {
    let mask = membership(a.n(), set);
    let independent = set.members().iter().all(|&i| a.neighbors(i).iter().all(|&j| !mask[j]));
    if !independent {
        SetClassification::NotIndependent
    } else if density(a, set).at_least(1) {
        SetClassification::MaximalIndependent
    } else {
        SetClassification::IndependentNonMaximal
    }
}

/// Every component of `(A + I) x` is strictly positive.
pub fn is_normalizable(a: &AdjacencyMatrix, x: &[f64]) -> bool {
    x.len() == a.n() && (0..a.n()).all(|i| a.closed_sum(x, i) > 0.0)
}

/// Subgraph on `set`, keeping the relative order of node indices.
pub fn induced_subgraph(g: &WeightedGraph, set: &NodeSet) -> Result<WeightedGraph> {
    if set.is_empty() {
        return Err(invalid("induced subgraph of an empty node set"));
    }
    if let Some(&bad) = set.members().iter().find(|&&i| i >= g.n()) {
        return Err(invalid(format!("node {bad} out of range")));
    }
    let mut position = vec![usize::MAX; g.n()];
    for (k, &i) in set.members().iter().enumerate() {
        position[i] = k;
    }
    let edges: Vec<_> = set
        .members()
        .iter()
        .flat_map(|&i| {
            let position = &position;
            g.adjacency
                .neighbors(i)
                .iter()
                .filter(move |&&j| j > i && position[j] != usize::MAX)
                .map(move |&j| (position[i], position[j]))
        })
        .collect();
    let adjacency = AdjacencyMatrix::from_edges(set.len(), &edges)?;
    let weights = WeightVector(set.members().iter().map(|&i| g.weights[i]).collect());
    Ok(WeightedGraph { adjacency, weights })
}

/// Seeded generator for the instance at `index` of a run started from `base_seed`.
pub fn instance_rng(base_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(index))
}

/// Uniform draw on `(0, 1]`.
pub fn uniform_open_closed<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

fn gnp_adjacency<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> AdjacencyMatrix {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    AdjacencyMatrix::from_edges(n, &edges).expect("generated edges are valid")
}

/// Binomial random graph `G(n, p)` with i.i.d. uniform `(0, 1]` weights.
pub fn gen_gnp(n: usize, p: f64, seed: u64) -> Result<WeightedGraph> {
    if n == 0 {
        return Err(invalid("G(n, p) needs at least one node"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(gnp_with_rng(n, p, &mut rng))
}

/// `G(n, p)` with uniform `(0, 1]` weights drawn from `rng`.
pub fn gnp_with_rng<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> WeightedGraph {
    let adjacency = gnp_adjacency(n, p, rng);
    let weights = WeightVector((0..n).map(|_| uniform_open_closed(rng)).collect());
    WeightedGraph { adjacency, weights }
}

/// Connected random graph: a uniformly attached random tree overlaid with
/// `G(n, p)` edges, then randomly relabelled. Weights are uniform on `(0, 1]`.
pub fn random_connected<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> WeightedGraph {
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((rng.random_range(0..i), i));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let edges: Vec<_> = edges.into_iter().map(|(i, j)| (perm[i], perm[j])).collect();
    let adjacency = AdjacencyMatrix::from_edges(n, &edges).expect("generated edges are valid");
    let weights = WeightVector((0..n).map(|_| uniform_open_closed(rng)).collect());
    WeightedGraph { adjacency, weights }
}

/// Adjacency bits packed so that lexicographic order of the bit string is
/// numeric order of the code: pair `(0, 1)` is the most significant bit.
fn pair_bit(n: usize, i: usize, j: usize) -> u32 {
    debug_assert!(i < j);
    let index = i * (2 * n - i - 1) / 2 + (j - i - 1);
    let total = n * (n - 1) / 2;
    1 << (total - 1 - index)
}

fn encode(a: &AdjacencyMatrix, label: &[usize]) -> u32 {
    let n = a.n();
    a.edges()
        .map(|(i, j)| {
            let (p, q) = (label[i].min(label[j]), label[i].max(label[j]));
            pair_bit(n, p, q)
        })
        .fold(0, |acc, b| acc | b)
}

fn decode(n: usize, code: u32) -> AdjacencyMatrix {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if code & pair_bit(n, i, j) != 0 {
                edges.push((i, j));
            }
        }
    }
    AdjacencyMatrix::from_edges(n, &edges).expect("decoded edges are valid")
}

/// Canonical code: the lexicographically minimal upper-triangle bit string over
/// relabellings that list nodes by nondecreasing degree. Degree is an
/// isomorphism invariant, so isomorphic graphs share the same code.
pub fn canonical_code(a: &AdjacencyMatrix) -> u32 {
    let n = a.n();
    assert!(
        n <= MAX_ENUMERATION_NODES,
        "canonical codes are limited to small graphs"
    );
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| a.degree(i));
    // blocks of equal degree, as ranges into `order`
    let mut blocks = Vec::new();
    let mut start = 0;
    for k in 1..=n {
        if k == n || a.degree(order[k]) != a.degree(order[start]) {
            blocks.push(start..k);
            start = k;
        }
    }
    let mut best = u32::MAX;
    let mut label = vec![0usize; n];
    permute_blocks(a, &mut order, &blocks, 0, &mut label, &mut best);
    if n < 2 {
        0
    } else {
        best
    }
}

fn permute_blocks(
    a: &AdjacencyMatrix,
    order: &mut [usize],
    blocks: &[std::ops::Range<usize>],
    block: usize,
    label: &mut [usize],
    best: &mut u32,
) {
    if block == blocks.len() {
        for (pos, &v) in order.iter().enumerate() {
            label[v] = pos;
        }
        *best = (*best).min(encode(a, label));
        return;
    }
    let range = blocks[block].clone();
    // Heap's algorithm over the block, recursing into later blocks at each leaf.
    let len = range.len();
    let mut c = vec![0usize; len];
    permute_blocks(a, order, blocks, block + 1, label, best);
    let mut i = 1;
    while i < len {
        if c[i] < i {
            let x = if i % 2 == 0 { 0 } else { c[i] };
            order.swap(range.start + x, range.start + i);
            permute_blocks(a, order, blocks, block + 1, label, best);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// One representative per isomorphism class of simple graphs on `n` nodes,
/// built by adding a vertex with every possible neighbourhood to each class on
/// `n - 1` nodes. Representatives are canonically labelled and sorted by code.
fn all_graph_classes(n: usize) -> Vec<(u32, AdjacencyMatrix)> {
    let mut level: BTreeMap<u32, AdjacencyMatrix> = BTreeMap::new();
    if n == 0 {
        return Vec::new();
    }
    level.insert(0, AdjacencyMatrix::empty(1));
    for m in 2..=n {
        let mut next = BTreeMap::new();
        for g in level.values() {
            let base: Vec<_> = g.edges().collect();
            for subset in 0u32..(1 << (m - 1)) {
                let mut edges = base.clone();
                edges.extend((0..m - 1).filter(|&i| subset >> i & 1 == 1).map(|i| (i, m - 1)));
                let h = AdjacencyMatrix::from_edges(m, &edges).expect("valid augmentation");
                next.entry(canonical_code(&h)).or_insert(h);
            }
        }
        level = next.into_keys().map(|code| (code, decode(m, code))).collect();
    }
    level.into_iter().collect()
}

/// One representative per isomorphism class of connected simple graphs on `n`
/// nodes, for `1 <= n <= 7`.
pub fn enumerate_connected_graphs(n: usize) -> Result<Vec<AdjacencyMatrix>> {
    if n == 0 {
        return Err(invalid("graph enumeration needs at least one node"));
    }
    if n > MAX_ENUMERATION_NODES {
        return Err(Error::SizeGuard {
            what: "graph enumeration",
            limit: MAX_ENUMERATION_NODES,
            got: n,
        });
    }
    Ok(all_graph_classes(n)
        .into_iter()
        .map(|(_, g)| g)
        .filter(AdjacencyMatrix::is_connected)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(members: &[usize]) -> NodeSet {
        NodeSet::new(usize::MAX, members.iter().copied()).unwrap()
    }

    #[test]
    fn density_on_p3() {
        let p3 = AdjacencyMatrix::path(3);
        assert_eq!(density(&p3, &set(&[0, 2])), Density::Finite(2));
        assert_eq!(density(&p3, &set(&[1])), Density::Finite(1));
        assert_eq!(density(&p3, &set(&[0])), Density::Finite(0));
        assert_eq!(density(&p3, &set(&[0, 1, 2])), Density::AllNodes);
    }

    #[test]
    fn classification_on_p3() {
        let p3 = AdjacencyMatrix::path(3);
        assert_eq!(classify_set(&p3, &set(&[0, 2])), SetClassification::MaximalIndependent);
        assert_eq!(classify_set(&p3, &set(&[0, 1])), SetClassification::NotIndependent);
        assert_eq!(classify_set(&p3, &set(&[0])), SetClassification::IndependentNonMaximal);
        assert_eq!(classify_set(&p3, &set(&[])), SetClassification::IndependentNonMaximal);
    }

    #[test]
    fn normalizability_on_p3() {
        let p3 = AdjacencyMatrix::path(3);
        assert!(is_normalizable(&p3, &[1.0, 1.0, 1.0]));
        assert!(!is_normalizable(&p3, &[1.0, 0.0, 0.0]));
        assert!(is_normalizable(&p3, &[0.0, 1.0, 0.0]));
        assert!(!is_normalizable(&p3, &[1.0, 1.0]));
    }

    #[test]
    fn induced_subgraphs() {
        let g = WeightedGraph::new(
            AdjacencyMatrix::path(3),
            WeightVector::new(vec![0.1, 0.2, 0.3]).unwrap(),
        )
        .unwrap();
        let edge = induced_subgraph(&g, &set(&[0, 1])).unwrap();
        assert_eq!(edge.adjacency, AdjacencyMatrix::complete(2));
        assert_eq!(edge.weights.as_slice(), &[0.1, 0.2]);
        let ends = induced_subgraph(&g, &set(&[0, 2])).unwrap();
        assert_eq!(ends.adjacency, AdjacencyMatrix::empty(2));
        assert_eq!(ends.weights.as_slice(), &[0.1, 0.3]);
        assert!(induced_subgraph(&g, &set(&[])).is_err());

        let k4 = WeightedGraph::new(
            AdjacencyMatrix::complete(4),
            WeightVector::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap(),
        )
        .unwrap();
        let k3 = induced_subgraph(&k4, &set(&[0, 1, 2])).unwrap();
        assert_eq!(k3.adjacency, AdjacencyMatrix::complete(3));
        assert_eq!(k3.weights.as_slice(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn dense_validation() {
        assert!(AdjacencyMatrix::from_dense(&[[0u8, 1], [0, 0]]).is_err());
        assert!(AdjacencyMatrix::from_dense(&[[1u8, 0], [0, 0]]).is_err());
        assert!(AdjacencyMatrix::from_dense(&[[0u8, 2], [2, 0]]).is_err());
        let k2 = AdjacencyMatrix::from_dense(&[[0u8, 1], [1, 0]]).unwrap();
        assert_eq!(k2, AdjacencyMatrix::complete(2));
        assert_eq!(k2.to_dense(), vec![vec![0, 1], vec![1, 0]]);
        assert!(AdjacencyMatrix::from_edges(3, &[(1, 1)]).is_err());
        assert!(AdjacencyMatrix::from_edges(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn weight_vector_rejects_bad_values() {
        assert!(WeightVector::new(vec![1.0, -0.5]).is_err());
        assert!(WeightVector::new(vec![f64::NAN]).is_err());
        assert!(WeightVector::new(vec![f64::INFINITY]).is_err());
        assert!(WeightVector::new(vec![0.0, 2.0]).is_ok());
    }

    #[test]
    fn gnp_extremes() {
        let empty = gen_gnp(5, 0.0, 1).unwrap();
        assert_eq!(empty.adjacency.edge_count(), 0);
        assert!(empty.weights.iter().all(|&w| w > 0.0 && w <= 1.0));
        let full = gen_gnp(5, 1.0, 1).unwrap();
        assert_eq!(full.adjacency, AdjacencyMatrix::complete(5));
        assert!(gen_gnp(5, 1.5, 1).is_err());
        assert!(gen_gnp(0, 0.5, 1).is_err());
    }

    #[test]
    fn gnp_edge_density_concentrates() {
        let pairs = 100.0 * 99.0 / 2.0;
        for seed in [3, 4] {
            let g = gen_gnp(100, 0.5, seed).unwrap();
            let dens = g.adjacency.edge_count() as f64 / pairs;
            assert!((dens - 0.5).abs() <= 0.15, "density {dens}");
        }
        assert_eq!(gen_gnp(30, 0.5, 9).unwrap(), gen_gnp(30, 0.5, 9).unwrap());
        assert_ne!(gen_gnp(30, 0.5, 9).unwrap(), gen_gnp(30, 0.5, 10).unwrap());
    }

    #[test]
    fn random_connected_is_connected() {
        for seed in 0..50 {
            let mut rng = instance_rng(seed, 0);
            let g = random_connected(1 + seed as usize % 12, 0.1, &mut rng);
            assert!(g.adjacency.is_connected());
        }
    }

    #[test]
    fn canonical_code_is_invariant() {
        let g = AdjacencyMatrix::from_edges(5, &[(0, 1), (1, 2), (2, 3), (1, 4)]).unwrap();
        let code = canonical_code(&g);
        for perm in [[4, 3, 2, 1, 0], [1, 0, 3, 4, 2], [2, 4, 0, 1, 3]] {
            assert_eq!(canonical_code(&g.permuted(&perm)), code);
        }
        let other = AdjacencyMatrix::path(5);
        assert_ne!(canonical_code(&other), code);
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate_connected_graphs(1).unwrap().len(), 1);
        let three = enumerate_connected_graphs(3).unwrap();
        assert_eq!(three.len(), 2);
        assert!(three.iter().any(|g| g.edge_count() == 2));
        assert!(three.iter().any(|g| g.edge_count() == 3));
        assert!(enumerate_connected_graphs(8).is_err());
        assert!(enumerate_connected_graphs(0).is_err());
    }
}
