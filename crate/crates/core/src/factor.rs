//! Path factors: verification, order decomposition and an exact
//! exponential-time solver used as the oracle layer for everything else.

use std::collections::BTreeSet;
use std::fmt;
use std::num::NonZeroUsize;
use std::str::FromStr;

use lru::LruCache;
use serde::Serialize;
use thiserror::Error;

use crate::deficiency::{self, SweepError};
use crate::graph::{bit, for_each_component, Graph};

/// Ordered vertex sequence of a path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct VertexPath(pub Vec<usize>);

impl VertexPath {
    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    /// The same path written so that its first endpoint is the smaller one.
    pub fn normalized(mut self) -> Self {
        if self.0.first() > self.0.last() {
            self.0.reverse();
        }
        self
    }
}

impl From<Vec<usize>> for VertexPath {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

/// A spanning collection of vertex-disjoint paths.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct PathFactor {
    pub paths: Vec<VertexPath>,
}

impl PathFactor {
    pub fn new(paths: Vec<VertexPath>) -> Self {
        Self { paths }
    }

    /// Normalizes every path and sorts paths by their minimum vertex.
    pub fn canonical(mut self) -> Self {
        self.paths = self.paths.into_iter().map(VertexPath::normalized).collect();
        self.paths.sort_by_key(|p| p.0.iter().copied().min());
        self
    }

    pub fn orders(&self) -> Vec<usize> {
        self.paths.iter().map(VertexPath::order).collect()
    }

    /// Rewrites vertex ids through `map` (used when lifting factors of
    /// induced subgraphs back to the host graph).
    pub fn relabel(&self, map: &[usize]) -> Self {
        Self::new(self.paths.iter().map(|p| VertexPath(p.0.iter().map(|&v| map[v]).collect())).collect())
    }

    /// Splits every path into pieces of order 2 and 5.
    pub fn into_p2_p5(self) -> Result<Self, Indecomposable> {
        let mut paths = Vec::new();
        for p in self.paths {
            let mut start = 0;
            for len in decompose_path_orders(p.order())? {
                paths.push(VertexPath(p.0[start..start + len].to_vec()));
                start += len;
            }
        }
        Ok(Self::new(paths))
    }
}

/// Set of admissible component orders, e.g. `{2, 5}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Orders(BTreeSet<usize>);

impl Orders {
    pub fn new(orders: impl IntoIterator<Item = usize>) -> Result<Self, SolveError> {
        let set: BTreeSet<usize> = orders.into_iter().collect();
        if set.is_empty() || set.iter().any(|&o| o < 2) {
            return Err(SolveError::InvalidOrders(set.into_iter().collect()));
        }
        Ok(Self(set))
    }

    /// `{2, 2k+1}`.
    pub fn two_and_odd(k: usize) -> Self {
        Self::new([2, 2 * k + 1]).expect("2 and 2k+1 are valid orders")
    }

    pub fn contains(&self, order: usize) -> bool {
        self.0.contains(&order)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn max(&self) -> usize {
        *self.0.last().expect("orders are nonempty")
    }

    /// `representable[s]` iff `s` is a sum of allowed orders.
    fn representable(&self, limit: usize) -> Vec<bool> {
        let mut table = vec![false; limit + 1];
        table[0] = true;
        for s in 1..=limit {
            table[s] = self.iter().any(|o| o <= s && table[s - o]);
        }
        table
    }
}

impl fmt::Display for Orders {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|o| o.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for Orders {
    type Err = SolveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parsed: Result<Vec<usize>, _> = s.split(',').map(|p| p.trim().parse::<usize>()).collect();
        let values = parsed.map_err(|_| SolveError::UnparsableOrders(s.to_owned()))?;
        Self::new(values)
    }
}

impl Serialize for Orders {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

/// First violated condition found by [`verify_factor`].
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "violation", rename_all = "kebab-case")]
pub enum FactorViolation {
    #[error("vertex {vertex} is not a vertex of the graph")]
    VertexOutOfRange { vertex: usize },
    #[error("path {path} has order {order} < 2")]
    TooShort { path: usize, order: usize },
    #[error("vertex {vertex} appears more than once")]
    RepeatedVertex { vertex: usize },
    #[error("consecutive vertices {u} and {v} are not adjacent")]
    NotAdjacent { u: usize, v: usize },
    #[error("vertex {vertex} is not covered")]
    Uncovered { vertex: usize },
    #[error("path {path} has order {order}, which is not allowed")]
    DisallowedOrder { path: usize, order: usize },
}

/// Checks that `factor` is a spanning path factor of `g` whose component
/// orders all lie in `orders`.
pub fn verify_factor(g: &Graph, factor: &PathFactor, orders: &Orders) -> Result<(), FactorViolation> {
    let n = g.order();
    let mut seen = vec![false; n];
    for (i, path) in factor.paths.iter().enumerate() {
        if path.order() < 2 {
            return Err(FactorViolation::TooShort { path: i, order: path.order() });
        }
        for &v in path.vertices() {
            if v >= n {
                return Err(FactorViolation::VertexOutOfRange { vertex: v });
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(FactorViolation::RepeatedVertex { vertex: v });
            }
        }
        for w in path.vertices().windows(2) {
            if !g.has_edge(w[0], w[1]) {
                return Err(FactorViolation::NotAdjacent { u: w[0], v: w[1] });
            }
        }
    }
    if let Some(vertex) = seen.iter().position(|&s| !s) {
        return Err(FactorViolation::Uncovered { vertex });
    }
    for (i, path) in factor.paths.iter().enumerate() {
        if !orders.contains(path.order()) {
            return Err(FactorViolation::DisallowedOrder { path: i, order: path.order() });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("a path of order {0} cannot be split into paths of orders 2 and 5")]
pub struct Indecomposable(pub usize);

/// Orders of the pieces a path of order `n` is cut into: a single 5 first
/// when `n` is odd, then 2s.
pub fn decompose_path_orders(n: usize) -> Result<Vec<usize>, Indecomposable> {
    if n < 2 || n == 3 {
        return Err(Indecomposable(n));
    }
    let mut parts = Vec::with_capacity(n / 2);
    let mut rest = n;
    if n % 2 == 1 {
        parts.push(5);
        rest -= 5;
    }
    parts.extend(std::iter::repeat_n(2, rest / 2));
    Ok(parts)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("invalid order set {0:?}: need at least one order, all >= 2")]
    InvalidOrders(Vec<usize>),
    #[error("cannot parse order list {0:?}")]
    UnparsableOrders(String),
    #[error("graph of order {0} exceeds the 64-vertex solver limit")]
    TooLarge(usize),
    #[error("search budget of {0} nodes exhausted")]
    BudgetExhausted(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    /// Maximum number of search nodes before giving up.
    pub max_nodes: u64,
    /// Capacity of the table of uncovered-vertex masks known to be unsolvable.
    pub memo_capacity: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { max_nodes: 50_000_000, memo_capacity: 1 << 20 }
    }
}

/// Exhaustive branch-and-bound search for a path factor with prescribed
/// component orders.
///
/// Branches on the smallest uncovered vertex, trying every allowed-order path
/// through it; a state is pruned when some component of the uncovered part
/// has an order that is not a sum of allowed orders.
pub struct ExactSolver {
    config: SolverConfig,
    memo: LruCache<u64, ()>,
    nodes: u64,
}

impl ExactSolver {
    pub fn new(config: SolverConfig) -> Self {
        Self { config, memo: LruCache::new(NonZeroUsize::MIN), nodes: 0 }
    }

    /// Search nodes expanded by the last call.
    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    pub fn find(&mut self, g: &Graph, orders: &Orders) -> Result<Option<PathFactor>, SolveError> {
        let adj = g.masks().ok_or(SolveError::TooLarge(g.order()))?;
        // Never more uncovered masks than subsets of the vertex set.
        let bound = if g.order() >= 40 { usize::MAX } else { 1usize << g.order() };
        let cap = NonZeroUsize::new(self.config.memo_capacity.min(bound).max(1)).expect("nonzero");
        if self.memo.cap() == cap {
            self.memo.clear();
        } else {
            self.memo = LruCache::new(cap);
        }
        self.nodes = 0;
        let mut search = Search {
            adj,
            orders,
            max_order: orders.max(),
            representable: orders.representable(g.order()),
            solver: self,
        };
        let mut paths = Vec::new();
        let found = search.solve(g.full_mask(), &mut paths)?;
        Ok(found.then(|| PathFactor::new(paths.into_iter().map(VertexPath).collect())))
    }
}

struct Search<'a> {
    adj: &'a [u64],
    orders: &'a Orders,
    max_order: usize,
    representable: Vec<bool>,
    solver: &'a mut ExactSolver,
}

impl Search<'_> {
    fn solve(&mut self, uncovered: u64, out: &mut Vec<Vec<usize>>) -> Result<bool, SolveError> {
        if uncovered == 0 {
            return Ok(true);
        }
        if self.solver.memo.get(&uncovered).is_some() {
            return Ok(false);
        }
        self.solver.nodes += 1;
        if self.solver.nodes > self.solver.config.max_nodes {
            return Err(SolveError::BudgetExhausted(self.solver.config.max_nodes));
        }
        let mut feasible = true;
        for_each_component(self.adj, uncovered, |c| {
            feasible &= self.representable[c.count_ones() as usize];
        });
        if feasible {
            let v = uncovered.trailing_zeros() as usize;
            for path in self.paths_through(v, uncovered) {
                let used = path.iter().fold(0, |m, &w| m | bit(w));
                out.push(path);
                if self.solve(uncovered & !used, out)? {
                    return Ok(true);
                }
                out.pop();
            }
        }
        self.solver.memo.put(uncovered, ());
        Ok(false)
    }

    /// Every path of allowed order inside `avail` that contains `v`, each
    /// listed once (first endpoint smaller than last endpoint).
    fn paths_through(&self, v: usize, avail: u64) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut left = Vec::new();
        self.extend_left(v, avail & !bit(v), &mut left, &mut out);
        out
    }

    fn extend_left(&self, v: usize, avail: u64, left: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let mut right = Vec::new();
        self.extend_right(v, avail, left, &mut right, out);
        if left.len() + 1 >= self.max_order {
            return;
        }
        let tip = left.last().copied().unwrap_or(v);
        let mut cand = self.adj[tip] & avail;
        while cand != 0 {
            let w = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            left.push(w);
            self.extend_left(v, avail & !bit(w), left, out);
            left.pop();
        }
    }

    fn extend_right(
        &self,
        v: usize,
        avail: u64,
        left: &[usize],
        right: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let order = left.len() + right.len() + 1;
        if self.orders.contains(order) {
            let first = left.last().copied().unwrap_or(v);
            let last = right.last().copied().unwrap_or(v);
            if first < last {
                let mut path: Vec<usize> = left.iter().rev().copied().collect();
                path.push(v);
                path.extend_from_slice(right);
                out.push(path);
            }
        }
        if order >= self.max_order {
            return;
        }
        let tip = right.last().copied().unwrap_or(v);
        let mut cand = self.adj[tip] & avail;
        while cand != 0 {
            let w = cand.trailing_zeros() as usize;
            cand &= cand - 1;
            right.push(w);
            self.extend_right(v, avail & !bit(w), left, right, out);
            right.pop();
        }
    }
}

/// Exact search with the default configuration.
pub fn find_factor_exact(g: &Graph, orders: &Orders) -> Result<Option<PathFactor>, SolveError> {
    ExactSolver::new(SolverConfig::default()).find(g, orders)
}

/// Whether `g` has a path factor, decided by the isolated-vertex condition
/// `i(G - X) <= 2|X|` over all `X`.
pub fn has_path_factor(g: &Graph) -> Result<bool, SweepError> {
    Ok(deficiency::check_theorem_a(g)?.is_ok())
}
