//! Immutable simple undirected graphs and component analysis.
//!
//! Graphs on at most 64 vertices additionally carry one `u64` neighbor mask
//! per vertex; every exhaustive routine in the crate runs on those masks.

use std::collections::BTreeMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Serialize, Serializer};
use thiserror::Error;

/// Largest order for which the bitset fast path is available.
pub const MASK_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge ({u}, {v}) has an endpoint outside 0..{n}")]
    VertexOutOfRange { u: usize, v: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex set over {got} vertices used with a graph of order {expected}")]
    UniverseMismatch { expected: usize, got: usize },
}

#[inline]
pub(crate) fn bit(v: usize) -> u64 {
    1u64 << v
}

/// Mask with the lowest `n` bits set.
#[inline]
pub(crate) fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Iterates over the set bits of a mask in increasing order.
pub(crate) fn mask_iter(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let v = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(v)
        }
    })
}

/// Calls `f` with the vertex mask of every component of the subgraph induced
/// by `alive`, in order of the components' minimum vertex.
#[inline]
pub(crate) fn for_each_component(adj: &[u64], alive: u64, mut f: impl FnMut(u64)) {
    let mut rest = alive;
    while rest != 0 {
        let seed = rest & rest.wrapping_neg();
        let mut comp = seed;
        let mut frontier = seed;
        while frontier != 0 {
            let mut next = 0u64;
            let mut fr = frontier;
            while fr != 0 {
                let v = fr.trailing_zeros() as usize;
                fr &= fr - 1;
                next |= adj[v];
            }
            next &= alive & !comp;
            comp |= next;
            frontier = next;
        }
        rest &= !comp;
        f(comp);
    }
}

/// A set of vertices drawn from `0..universe`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    bits: FixedBitSet,
}

impl VertexSet {
    pub fn new(universe: usize) -> Self {
        Self { bits: FixedBitSet::with_capacity(universe) }
    }

    /// Builds a set from vertices; panics if one lies outside the universe.
    pub fn from_vertices(universe: usize, vertices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::new(universe);
        for v in vertices {
            set.insert(v);
        }
        set
    }

    pub fn from_mask(universe: usize, mask: u64) -> Self {
        assert!(universe <= MASK_LIMIT, "mask sets need a universe of at most 64");
        assert_eq!(mask & !low_mask(universe), 0, "mask has bits outside the universe");
        Self::from_vertices(universe, mask_iter(mask))
    }

    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn insert(&mut self, v: usize) {
        assert!(v < self.universe(), "vertex {v} outside universe {}", self.universe());
        self.bits.insert(v);
    }

    pub fn contains(&self, v: usize) -> bool {
        self.bits.contains(v)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn min(&self) -> Option<usize> {
        self.bits.minimum()
    }

    /// The set as a 64-bit mask, when the universe allows it.
    pub fn mask(&self) -> Option<u64> {
        (self.universe() <= MASK_LIMIT).then(|| self.iter().fold(0, |m, v| m | bit(v)))
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for VertexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

/// Components of `G - X` together with their order histogram.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentProfile {
    /// Sorted by minimum vertex.
    pub components: Vec<VertexSet>,
    /// Component order -> number of components of that order.
    pub counts: BTreeMap<usize, usize>,
}

impl ComponentProfile {
    /// Number of components of order exactly `order`.
    pub fn count(&self, order: usize) -> usize {
        self.counts.get(&order).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Finite simple undirected graph on vertices `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<usize>>,
    masks: Option<Vec<u64>>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self::from_adjacency(vec![Vec::new(); n])
    }

    /// Builds a graph from an edge list; duplicate edges collapse.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(GraphError::VertexOutOfRange { u, v, n });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        Ok(Self::from_adjacency(adj))
    }

    fn from_adjacency(mut adj: Vec<Vec<usize>>) -> Self {
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        let n = adj.len();
        let masks = (n <= MASK_LIMIT)
            .then(|| adj.iter().map(|list| list.iter().fold(0, |m, &v| m | bit(v))).collect());
        Self { n, adj, masks }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        match &self.masks {
            Some(m) => m[u] & bit(v) != 0,
            None => self.adj[u].binary_search(&v).is_ok(),
        }
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Neighbor masks, present when the order is at most 64.
    pub fn masks(&self) -> Option<&[u64]> {
        self.masks.as_deref()
    }

    /// Mask of all vertices; only meaningful on the bitset path.
    pub(crate) fn full_mask(&self) -> u64 {
        low_mask(self.n)
    }

    pub fn without_edge(&self, u: usize, v: usize) -> Self {
        let mut adj = self.adj.clone();
        adj[u].retain(|&w| w != v);
        adj[v].retain(|&w| w != u);
        Self::from_adjacency(adj)
    }

    /// Subgraph induced by `vertices` (relabelled `0..k` in the given order).
    pub fn induced(&self, vertices: &[usize]) -> Self {
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        let adj = vertices
            .iter()
            .map(|&v| {
                self.adj[v].iter().filter(|&&w| index[w] != usize::MAX).map(|&w| index[w]).collect()
            })
            .collect();
        Self::from_adjacency(adj)
    }

    /// Disjoint union; vertices of `other` are shifted by `self.order()`.
    pub fn disjoint_union(&self, other: &Graph) -> Self {
        let shift = self.n;
        let mut adj = self.adj.clone();
        adj.extend(other.adj.iter().map(|list| list.iter().map(|&v| v + shift).collect()));
        Self::from_adjacency(adj)
    }

    /// Join: the disjoint union plus every edge between the two vertex sets.
    pub fn join(&self, other: &Graph) -> Self {
        let shift = self.n;
        let total = self.n + other.n;
        let mut adj = self.disjoint_union(other).adj;
        for (v, list) in adj.iter_mut().enumerate() {
            if v < shift {
                list.extend(shift..total);
            } else {
                list.extend(0..shift);
            }
        }
        Self::from_adjacency(adj)
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.components().len() == 1
    }

    /// Connected components sorted by minimum vertex.
    pub fn components(&self) -> Vec<VertexSet> {
        self.components_after_removal(&VertexSet::new(self.n))
            .expect("empty removal set matches the universe")
            .components
    }

    /// Component profile of `G - X`.
    pub fn components_after_removal(&self, removed: &VertexSet) -> Result<ComponentProfile, GraphError> {
        if removed.universe() != self.n {
            return Err(GraphError::UniverseMismatch { expected: self.n, got: removed.universe() });
        }
        let components = match (&self.masks, removed.mask()) {
            (Some(adj), Some(x)) => {
                let mut out = Vec::new();
                for_each_component(adj, self.full_mask() & !x, |c| {
                    out.push(VertexSet::from_mask(self.n, c));
                });
                out
            }
            _ => self.components_by_search(removed),
        };
        let mut counts = BTreeMap::new();
        for c in &components {
            *counts.entry(c.len()).or_insert(0) += 1;
        }
        let profile = ComponentProfile { components, counts };
        debug_assert!(self.is_component_partition(removed, &profile));
        Ok(profile)
    }

    fn components_by_search(&self, removed: &VertexSet) -> Vec<VertexSet> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if seen[start] || removed.contains(start) {
                continue;
            }
            let mut comp = VertexSet::new(self.n);
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(v) = stack.pop() {
                comp.insert(v);
                for &w in &self.adj[v] {
                    if !seen[w] && !removed.contains(w) {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            out.push(comp);
        }
        out
    }

    fn is_component_partition(&self, removed: &VertexSet, profile: &ComponentProfile) -> bool {
        let mut owner = vec![usize::MAX; self.n];
        for (i, comp) in profile.components.iter().enumerate() {
            for v in comp.iter() {
                if owner[v] != usize::MAX || removed.contains(v) {
                    return false;
                }
                owner[v] = i;
            }
        }
        let covered = (0..self.n).all(|v| removed.contains(v) != (owner[v] != usize::MAX));
        let closed = self.edges().all(|(u, v)| {
            removed.contains(u) || removed.contains(v) || owner[u] == owner[v]
        });
        let sorted = profile.components.windows(2).all(|w| w[0].min() < w[1].min());
        covered && closed && sorted
    }
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("n", &self.n)
            .field("edges", &self.edges().collect::<Vec<_>>())
            .finish()
    }
}
