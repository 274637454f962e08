//! Communication graph, attack/defense-induced effective graph, the discrete
//! consensus update and the disagreement functional.
//!
//! Agents are indexed from 0 internally. Edges print and serialize with
//! 1-based agent labels (`"1-2"`), matching scenario files and traces.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use crate::error::{GameError, Result};

/// Largest edge count a graph may carry; actions are bitmasks over edge indices.
pub const MAX_EDGES: usize = 64;

/// Undirected edge between two distinct agents, stored with the smaller index first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    lo: usize,
    hi: usize,
}

impl Edge {
    /// Builds an edge from 0-based agent indices in either order.
    pub fn new(i: usize, j: usize) -> Self {
        Edge {
            lo: i.min(j),
            hi: i.max(j),
        }
    }

    /// Builds an edge from 1-based agent labels. Returns `None` for label 0.
    pub fn from_labels(i: usize, j: usize) -> Option<Self> {
        if i == 0 || j == 0 {
            return None;
        }
        Some(Edge::new(i - 1, j - 1))
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    /// 1-based endpoint labels.
    pub fn labels(&self) -> (usize, usize) {
        (self.lo + 1, self.hi + 1)
    }

    fn is_loop(&self) -> bool {
        self.lo == self.hi
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.lo + 1, self.hi + 1)
    }
}

/// A set of edges, ordered lexicographically by endpoints.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct EdgeSet(BTreeSet<Edge>);

impl EdgeSet {
    pub fn new() -> Self {
        EdgeSet(BTreeSet::new())
    }

    /// Convenience constructor from 0-based pairs.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Self {
        pairs.iter().map(|&(i, j)| Edge::new(i, j)).collect()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.0.contains(e)
    }

    pub fn insert(&mut self, e: Edge) -> bool {
        self.0.insert(e)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn difference(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet(self.0.difference(&other.0).copied().collect())
    }

    pub fn union(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet(self.0.union(&other.0).copied().collect())
    }
}

impl FromIterator<Edge> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = Edge>>(iter: I) -> Self {
        EdgeSet(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a EdgeSet {
    type Item = &'a Edge;
    type IntoIter = std::collections::btree_set::Iter<'a, Edge>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Semicolon-joined 1-based labels, e.g. `1-2;3-4`. Empty sets print as nothing.
impl fmt::Display for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (idx, e) in self.0.iter().enumerate() {
            if idx > 0 {
                f.write_str(";")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Undirected simple graph. Edges are kept sorted, so an edge's position is
/// its bit in action masks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        if n == 0 {
            return Err(GameError::EmptyGraph);
        }
        let mut sorted: Vec<Edge> = Vec::new();
        for e in edges {
            if e.hi >= n {
                return Err(GameError::AgentOutOfRange { edge: e, n });
            }
            if e.is_loop() {
                return Err(GameError::SelfLoop(e.lo));
            }
            sorted.push(e);
        }
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(GameError::DuplicateEdge(w[0]));
        }
        if sorted.len() > MAX_EDGES {
            return Err(GameError::TooManyEdges {
                count: sorted.len(),
                max: MAX_EDGES,
            });
        }
        Ok(Graph { n, edges: sorted })
    }

    /// Like [`Graph::new`] but also rejects disconnected graphs.
    pub fn new_connected(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self> {
        let g = Graph::new(n, edges)?;
        if !g.is_connected() {
            return Err(GameError::Disconnected);
        }
        Ok(g)
    }

    /// Path graph 1-2-...-n.
    pub fn path(n: usize) -> Result<Self> {
        Graph::new(n, (1..n).map(|i| Edge::new(i - 1, i)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge_index(&self, e: &Edge) -> Option<usize> {
        self.edges.binary_search(e).ok()
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.edge_index(e).is_some()
    }

    pub fn edge_set(&self) -> EdgeSet {
        self.edges.iter().copied().collect()
    }

    /// Mask with one bit per base edge; fails on edges outside the graph.
    pub fn mask_of(&self, set: &EdgeSet) -> Result<u64> {
        set.iter().try_fold(0u64, |acc, e| {
            self.edge_index(e)
                .map(|idx| acc | (1u64 << idx))
                .ok_or(GameError::EdgeNotInBase(*e))
        })
    }

    pub fn edges_of(&self, mask: u64) -> EdgeSet {
        self.edges
            .iter()
            .enumerate()
            .filter(|(idx, _)| mask >> idx & 1 == 1)
            .map(|(_, e)| *e)
            .collect()
    }

    /// Mask selecting every base edge.
    pub fn full_mask(&self) -> u64 {
        if self.edges.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.edges.len()) - 1
        }
    }

    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.lo].push(e.hi);
            adj[e.hi].push(e.lo);
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        count == self.n
    }
}

/// Agent states, one finite scalar per agent.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(GameError::NonFiniteState(i));
        }
        Ok(StateVector(x))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if self.0.len() != n {
            return Err(GameError::ShapeMismatch {
                expected: n,
                got: self.0.len(),
            });
        }
        Ok(())
    }
}

/// Symmetric consensus weights `a_ij = a_ji`, one per edge.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    weights: BTreeMap<Edge, f64>,
}

impl WeightMatrix {
    /// Same weight on every edge of `g`.
    pub fn uniform(g: &Graph, a: f64) -> Result<Self> {
        WeightMatrix::from_map(g, g.edges().iter().map(|&e| (e, a)).collect())
    }

    /// Default weights `1/n` on every edge.
    pub fn default_for(g: &Graph) -> Self {
        // 1/n keeps every row sum at most (n-1)/n.
        let a = 1.0 / g.n() as f64;
        WeightMatrix {
            weights: g.edges().iter().map(|&e| (e, a)).collect(),
        }
    }

    /// Builds and validates a weight map covering every edge of `g`.
    pub fn from_map(g: &Graph, weights: BTreeMap<Edge, f64>) -> Result<Self> {
        let w = WeightMatrix { weights };
        w.validate(g)?;
        Ok(w)
    }

    pub fn get(&self, e: &Edge) -> Option<f64> {
        self.weights.get(e).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Edge, &f64)> + '_ {
        self.weights.iter()
    }

    /// Checks positivity, coverage of `g` and row sums below one.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let mut row = vec![0.0; g.n()];
        for e in g.edges() {
            let a = self.get(e).ok_or(GameError::MissingWeight(*e))?;
            if !(a > 0.0 && a.is_finite()) {
                return Err(GameError::NonPositiveWeight(*e));
            }
            row[e.lo] += a;
            row[e.hi] += a;
        }
        for (agent, &sum) in row.iter().enumerate() {
            if sum >= 1.0 {
                return Err(GameError::RowSumTooLarge { agent, sum });
            }
        }
        Ok(())
    }

    /// Weights listed in base-edge index order.
    pub(crate) fn by_index(&self, g: &Graph) -> Result<Vec<f64>> {
        g.edges()
            .iter()
            .map(|e| self.get(e).ok_or(GameError::MissingWeight(*e)))
            .collect()
    }
}

/// Graph after one step of jamming and strong-signal defense:
/// `(base \ attacked) ∪ defended`.
pub fn effective_graph(base: &Graph, attacked: &EdgeSet, defended: &EdgeSet) -> Result<Graph> {
    for e in attacked.iter().chain(defended.iter()) {
        if !base.contains(e) {
            return Err(GameError::EdgeNotInBase(*e));
        }
    }
    let kept = base
        .edges()
        .iter()
        .filter(|e| !attacked.contains(e) || defended.contains(e))
        .copied();
    Graph::new(base.n(), kept)
}

/// One synchronous consensus update over the edges of `g_eff`.
pub fn consensus_step(x: &StateVector, g_eff: &Graph, w: &WeightMatrix) -> Result<StateVector> {
    x.check_len(g_eff.n())?;
    let prev = x.as_slice();
    let mut next = prev.to_vec();
    for e in g_eff.edges() {
        let a = w.get(e).ok_or(GameError::MissingWeight(*e))?;
        let flow = a * (prev[e.hi] - prev[e.lo]);
        next[e.lo] += flow;
        next[e.hi] -= flow;
    }
    Ok(StateVector(next))
}

/// Sum of squared pairwise differences `Σ_{i<j} (x_i − x_j)²`.
///
/// Evaluated as `n·Σ(y_i − ȳ)²` on states shifted by `x_1`, which equals
/// `n·Σx² − (Σx)²` and returns exactly zero on a consensus vector.
pub fn disagreement(x: &[f64]) -> f64 {
    let Some(&origin) = x.first() else {
        return 0.0;
    };
    let n = x.len() as f64;
    let mean = x.iter().map(|v| v - origin).sum::<f64>() / n;
    n * x
        .iter()
        .map(|v| {
            let d = (v - origin) - mean;
            d * d
        })
        .sum::<f64>()
}

/// Disagreement after one consensus step under the given attack and defense.
pub fn next_disagreement(
    x: &StateVector,
    base: &Graph,
    attacked: &EdgeSet,
    defended: &EdgeSet,
    w: &WeightMatrix,
) -> Result<f64> {
    let g_eff = effective_graph(base, attacked, defended)?;
    Ok(disagreement(consensus_step(x, &g_eff, w)?.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn e(i: usize, j: usize) -> Edge {
        Edge::from_labels(i, j).unwrap()
    }

    fn set(labels: &[(usize, usize)]) -> EdgeSet {
        labels.iter().map(|&(i, j)| e(i, j)).collect()
    }

    fn fig1_graph() -> Graph {
        Graph::new(5, [e(1, 2), e(1, 3), e(2, 3), e(3, 4), e(3, 5)]).unwrap()
    }

    #[test]
    fn effective_graph_removes_attacked_edges() {
        let base = Graph::path(3).unwrap();
        let g = effective_graph(&base, &set(&[(1, 2)]), &EdgeSet::new()).unwrap();
        assert_eq!(g.edge_set(), set(&[(2, 3)]));
        assert_eq!(g.n(), 3);
    }

    #[test]
    fn defended_edge_survives_attack() {
        let base = Graph::path(3).unwrap();
        let g = effective_graph(&base, &set(&[(1, 2)]), &set(&[(1, 2)])).unwrap();
        assert_eq!(g.edge_set(), set(&[(1, 2), (2, 3)]));
    }

    #[test]
    fn figure_one_example() {
        let g = effective_graph(
            &fig1_graph(),
            &set(&[(1, 2), (1, 3), (2, 3)]),
            &set(&[(2, 3), (3, 4)]),
        )
        .unwrap();
        assert_eq!(g.edge_set(), set(&[(2, 3), (3, 4), (3, 5)]));
    }

    #[test]
    fn effective_graph_rejects_foreign_edges() {
        let base = Graph::path(3).unwrap();
        let err = effective_graph(&base, &set(&[(1, 3)]), &EdgeSet::new()).unwrap_err();
        assert_eq!(err, GameError::EdgeNotInBase(e(1, 3)));
        let err = effective_graph(&base, &EdgeSet::new(), &set(&[(1, 3)])).unwrap_err();
        assert_eq!(err, GameError::EdgeNotInBase(e(1, 3)));
    }

    #[test]
    fn graph_validation() {
        assert_eq!(Graph::new(0, []).unwrap_err(), GameError::EmptyGraph);
        assert_eq!(
            Graph::new(3, [e(1, 2), e(2, 1)]).unwrap_err(),
            GameError::DuplicateEdge(e(1, 2))
        );
        assert_eq!(
            Graph::new(3, [Edge::new(1, 1)]).unwrap_err(),
            GameError::SelfLoop(1)
        );
        assert!(matches!(
            Graph::new(2, [e(1, 3)]).unwrap_err(),
            GameError::AgentOutOfRange { .. }
        ));
        assert_eq!(
            Graph::new_connected(3, [e(1, 2)]).unwrap_err(),
            GameError::Disconnected
        );
        assert!(Graph::new_connected(5, fig1_graph().edges().to_vec()).is_ok());
    }

    #[test]
    fn weight_validation() {
        let g = Graph::path(3).unwrap();
        assert!(WeightMatrix::uniform(&g, 0.4).is_ok());
        assert!(matches!(
            WeightMatrix::uniform(&g, 0.5).unwrap_err(),
            GameError::RowSumTooLarge { agent: 1, .. }
        ));
        assert_eq!(
            WeightMatrix::uniform(&g, 0.0).unwrap_err(),
            GameError::NonPositiveWeight(e(1, 2))
        );
        let partial = BTreeMap::from([(e(1, 2), 0.2)]);
        assert_eq!(
            WeightMatrix::from_map(&g, partial).unwrap_err(),
            GameError::MissingWeight(e(2, 3))
        );
        WeightMatrix::default_for(&Graph::new(4, [e(1, 2), e(1, 3), e(1, 4)]).unwrap())
            .validate(&Graph::new(4, [e(1, 2), e(1, 3), e(1, 4)]).unwrap())
            .unwrap();
    }

    #[test]
    fn consensus_fixed_point() {
        let g = fig1_graph();
        let w = WeightMatrix::default_for(&g);
        let x = StateVector::new(vec![0.3; 5]).unwrap();
        assert_eq!(consensus_step(&x, &g, &w).unwrap(), x);
    }

    #[test]
    fn consensus_step_two_agents() {
        let g = Graph::path(2).unwrap();
        let w = WeightMatrix::uniform(&g, 0.25).unwrap();
        let x = StateVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(
            consensus_step(&x, &g, &w).unwrap().as_slice(),
            &[0.75, 0.25]
        );
    }

    #[test]
    fn consensus_step_three_agent_path() {
        let g = Graph::path(3).unwrap();
        let w = WeightMatrix::uniform(&g, 1.0 / 3.0).unwrap();
        let x = StateVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        let next = consensus_step(&x, &g, &w).unwrap();
        assert_abs_diff_eq!(next.as_slice()[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(next.as_slice()[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(next.as_slice()[2], 0.0);
    }

    #[test]
    fn consensus_step_shape_mismatch() {
        let g = Graph::path(3).unwrap();
        let w = WeightMatrix::default_for(&g);
        let x = StateVector::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(
            consensus_step(&x, &g, &w).unwrap_err(),
            GameError::ShapeMismatch {
                expected: 3,
                got: 2
            }
        );
        assert_eq!(
            StateVector::new(vec![0.0, f64::NAN]).unwrap_err(),
            GameError::NonFiniteState(1)
        );
    }

    #[test]
    fn disagreement_values() {
        assert_eq!(disagreement(&[0.7, 0.7, 0.7]), 0.0);
        assert_eq!(disagreement(&[1.0, 0.0]), 1.0);
        assert_abs_diff_eq!(disagreement(&[1.0, 0.0, 0.0]), 2.0, epsilon = 1e-14);
        assert_eq!(disagreement(&[]), 0.0);
    }

    #[test]
    fn next_disagreement_two_agents() {
        let g = Graph::path(2).unwrap();
        let w = WeightMatrix::uniform(&g, 0.25).unwrap();
        let x = StateVector::new(vec![1.0, 0.0]).unwrap();
        let cut = next_disagreement(&x, &g, &set(&[(1, 2)]), &EdgeSet::new(), &w).unwrap();
        assert_eq!(cut, 1.0);
        let intact = next_disagreement(&x, &g, &EdgeSet::new(), &EdgeSet::new(), &w).unwrap();
        assert_eq!(intact, 0.25);
        let flat = StateVector::new(vec![2.0, 2.0]).unwrap();
        assert_eq!(
            next_disagreement(&flat, &g, &EdgeSet::new(), &EdgeSet::new(), &w).unwrap(),
            0.0
        );
    }

    #[test]
    fn masks_round_trip_through_edge_sets() {
        let g = fig1_graph();
        let s = set(&[(1, 3), (3, 5)]);
        let m = g.mask_of(&s).unwrap();
        assert_eq!(m, 0b10010);
        assert_eq!(g.edges_of(m), s);
        assert_eq!(g.full_mask(), 0b11111);
        assert_eq!(s.to_string(), "1-3;3-5");
    }

    fn pairwise(x: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                s += (x[i] - x[j]).powi(2);
            }
        }
        s
    }

    fn random_case() -> impl Strategy<Value = (Graph, Vec<f64>, u64, u64)> {
        (2usize..=6).prop_flat_map(|n| {
            let all: Vec<Edge> = (0..n)
                .flat_map(|i| (i + 1..n).map(move |j| Edge::new(i, j)))
                .collect();
            let m = all.len();
            (
                proptest::sample::subsequence(all, 0..=m),
                proptest::collection::vec(-5.0f64..5.0, n),
                any::<u64>(),
                any::<u64>(),
            )
                .prop_map(move |(edges, x, a, d)| (Graph::new(n, edges).unwrap(), x, a, d))
        })
    }

    proptest! {
        #[test]
        fn disagreement_matches_pairwise_sum(x in proptest::collection::vec(-10.0f64..10.0, 1..8)) {
            let z = disagreement(&x);
            prop_assert!((z - pairwise(&x)).abs() <= 1e-10 * (1.0 + z));
            prop_assert!(z >= 0.0);
        }

        #[test]
        fn step_preserves_mean_and_never_raises_disagreement((g, x, am, dm) in random_case()) {
            let w = WeightMatrix::default_for(&g);
            let full = g.full_mask();
            let attacked = g.edges_of(am & full);
            let defended = g.edges_of(dm & full);
            let x = StateVector::new(x).unwrap();
            let eff = effective_graph(&g, &attacked, &defended).unwrap();
            let next = consensus_step(&x, &eff, &w).unwrap();
            let before: f64 = x.as_slice().iter().sum();
            let after: f64 = next.as_slice().iter().sum();
            prop_assert!((before - after).abs() <= 1e-12);
            prop_assert!(disagreement(next.as_slice()) <= disagreement(x.as_slice()) + 1e-12);
        }

        #[test]
        fn defending_unattacked_edges_is_a_no_op((g, _x, am, dm) in random_case()) {
            let full = g.full_mask();
            let attacked = g.edges_of(am & full);
            let defended = g.edges_of(dm & full & !am);
            let plain = effective_graph(&g, &attacked, &EdgeSet::new()).unwrap();
            let with_def = effective_graph(&g, &attacked, &defended).unwrap();
            prop_assert_eq!(plain.edge_set(), with_def.edge_set());
        }

        #[test]
        fn two_agent_gap_identity(d in -3.0f64..3.0, a in 0.01f64..0.49) {
            let g = Graph::path(2).unwrap();
            let w = WeightMatrix::uniform(&g, a).unwrap();
            let x = StateVector::new(vec![d, 0.0]).unwrap();
            let cut = next_disagreement(&x, &g, &g.edge_set(), &EdgeSet::new(), &w).unwrap();
            let kept = next_disagreement(&x, &g, &EdgeSet::new(), &EdgeSet::new(), &w).unwrap();
            let expected = 4.0 * a * (1.0 - a) * d * d;
            prop_assert!((cut - kept - expected).abs() <= 1e-12 * (1.0 + expected));
        }
    }
}
