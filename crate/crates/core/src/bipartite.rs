//! Central path factors of weighted bipartite instances.
//!
//! An instance has an `S` side and a `T` side split into `T1` (weight 3) and
//! `T2` (weight 2). A factor is *central* when every path has at least as
//! many `T` vertices as `S` vertices. The engine first grows a spanning
//! central factor from a matching, then repeatedly rewires chains of
//! components until every order-3 path touches `T2`.
//!
//! Component vocabulary used below: a *bare P3* is an order-3 component
//! without `T2` vertices; *middle* components are order-3 paths with a `T2`
//! vertex and order-5 paths without one; *opening* components are those that
//! are neither order 3 nor bare order 5.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::deficiency::DEFAULT_MAX_SUBSETS;
use crate::factor::{PathFactor, VertexPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Role {
    S,
    T1,
    T2,
}

impl Role {
    pub fn is_t(self) -> bool {
        self != Role::S
    }

    fn weight(self) -> i64 {
        match self {
            Role::S => 0,
            Role::T1 => 3,
            Role::T2 => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("vertex {v} out of range for {n} vertices")]
    VertexOutOfRange { v: usize, n: usize },
    #[error("edge {u}-{v} does not join S to T")]
    SameSide { u: usize, v: usize },
}

/// Bipartite graph with sides `S` and `T = T1 ∪ T2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteInstance {
    roles: Vec<Role>,
    adj: Vec<Vec<usize>>,
}

impl BipartiteInstance {
    pub fn new(roles: Vec<Role>, edges: &[(usize, usize)]) -> Result<Self, InstanceError> {
        let n = roles.len();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(InstanceError::VertexOutOfRange { v: w, n });
                }
            }
            if roles[u].is_t() == roles[v].is_t() {
                return Err(InstanceError::SameSide { u, v });
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self { roles, adj })
    }

    /// Numbers `S` as `0..s`, then `T1`, then `T2`.
    pub fn from_parts(s: usize, t1: usize, t2: usize, edges: &[(usize, usize)]) -> Result<Self, InstanceError> {
        let roles = [(Role::S, s), (Role::T1, t1), (Role::T2, t2)]
            .into_iter()
            .flat_map(|(r, k)| std::iter::repeat_n(r, k))
            .collect();
        Self::new(roles, edges)
    }

    pub fn order(&self) -> usize {
        self.roles.len()
    }

    pub fn role(&self, v: usize) -> Role {
        self.roles[v]
    }

    pub fn is_s(&self, v: usize) -> bool {
        self.roles[v] == Role::S
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.order() && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, ns)| ns.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn vertices_with(&self, role: Role) -> Vec<usize> {
        (0..self.order()).filter(|&v| self.roles[v] == role).collect()
    }

    pub fn count(&self, role: Role) -> usize {
        self.roles.iter().filter(|&&r| r == role).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HypothesisError {
    #[error("S is empty")]
    EmptyS,
    #[error("|S| = {s} exceeds |T| = {t}")]
    SLargerThanT { s: usize, t: usize },
    #[error("3|T1| + 2|T2| = {weight} exceeds 4|S| + 1 = {limit}")]
    TWeightTooLarge { weight: i64, limit: i64 },
    #[error("X = {set:?}: neighborhood weight {weight} < {need} without covering T")]
    Neighborhood { set: Vec<usize>, weight: i64, need: i64 },
    #[error("instance too large for an exhaustive hypothesis check (|S| = {s}, |T| = {t})")]
    TooLarge { s: usize, t: usize },
}

/// Checks the size conditions and, for every `X ⊆ S`, that
/// `3|N(X) ∩ T1| + 2|N(X) ∩ T2| >= 4|X|` or `N(X) = T`.
///
/// The reported subset is the first violating one by size, then mask.
pub fn check_t2_hypothesis(inst: &BipartiteInstance) -> Result<(), HypothesisError> {
    let s_side = inst.vertices_with(Role::S);
    let t_side: Vec<usize> = (0..inst.order()).filter(|&v| inst.role(v).is_t()).collect();
    let (s, t) = (s_side.len(), t_side.len());
    if s == 0 {
        return Err(HypothesisError::EmptyS);
    }
    if s > t {
        return Err(HypothesisError::SLargerThanT { s, t });
    }
    let weight: i64 = t_side.iter().map(|&v| inst.role(v).weight()).sum();
    let limit = 4 * s as i64 + 1;
    if weight > limit {
        return Err(HypothesisError::TWeightTooLarge { weight, limit });
    }
    check_neighborhood_condition(inst)
}

/// The neighborhood part of [`check_t2_hypothesis`] on its own.
pub fn check_neighborhood_condition(inst: &BipartiteInstance) -> Result<(), HypothesisError> {
    let s_side = inst.vertices_with(Role::S);
    let t_side: Vec<usize> = (0..inst.order()).filter(|&v| inst.role(v).is_t()).collect();
    let (s, t) = (s_side.len(), t_side.len());
    if s >= 64 || (1u64 << s) > DEFAULT_MAX_SUBSETS || t > 128 {
        return Err(HypothesisError::TooLarge { s, t });
    }

    let mut t_bit = vec![0u128; inst.order()];
    let (mut t1_mask, mut t2_mask) = (0u128, 0u128);
    for (i, &v) in t_side.iter().enumerate() {
        t_bit[v] = 1 << i;
        match inst.role(v) {
            Role::T1 => t1_mask |= 1 << i,
            _ => t2_mask |= 1 << i,
        }
    }
    let all_t = t1_mask | t2_mask;
    let rows: Vec<u128> =
        s_side.iter().map(|&v| inst.neighbors(v).iter().fold(0, |m, &w| m | t_bit[w])).collect();

    let mut first: Option<(u32, u64, i64)> = None;
    for x in 1u64..(1 << s) {
        let mut nb = 0u128;
        let mut rest = x;
        while rest != 0 {
            nb |= rows[rest.trailing_zeros() as usize];
            rest &= rest - 1;
        }
        if nb == all_t {
            continue;
        }
        let w = 3 * (nb & t1_mask).count_ones() as i64 + 2 * (nb & t2_mask).count_ones() as i64;
        let key = (x.count_ones(), x);
        if w < 4 * x.count_ones() as i64 && first.is_none_or(|(k, m, _)| key < (k, m)) {
            first = Some((key.0, key.1, w));
        }
    }
    match first {
        None => Ok(()),
        Some((size, x, w)) => Err(HypothesisError::Neighborhood {
            set: (0..s).filter(|i| x >> i & 1 == 1).map(|i| s_side[i]).collect(),
            weight: w,
            need: 4 * size as i64,
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CentralViolation {
    #[error("vertex {0} is not in the instance")]
    UnknownVertex(usize),
    #[error("vertex {0} is used twice")]
    Repeated(usize),
    #[error("vertex {0} is not covered")]
    Uncovered(usize),
    #[error("path {path} has fewer than two vertices")]
    Short { path: usize },
    #[error("consecutive vertices {u} and {v} are not adjacent")]
    MissingEdge { u: usize, v: usize },
    #[error("path {path} has more S than T vertices")]
    SHeavy { path: usize },
    #[error("order-3 path {path} has no T2 vertex")]
    BareP3 { path: usize },
}

/// Checks that `factor` spans the instance with central paths of order at
/// least two; with `require_t2`, every order-3 path must also touch `T2`.
pub fn validate_central(
    inst: &BipartiteInstance,
    factor: &PathFactor,
    require_t2: bool,
) -> Result<(), CentralViolation> {
    let mut seen = vec![false; inst.order()];
    for (i, p) in factor.paths.iter().enumerate() {
        let vs = p.vertices();
        if vs.len() < 2 {
            return Err(CentralViolation::Short { path: i });
        }
        for &v in vs {
            if v >= inst.order() {
                return Err(CentralViolation::UnknownVertex(v));
            }
            if std::mem::replace(&mut seen[v], true) {
                return Err(CentralViolation::Repeated(v));
            }
        }
        if let Some(w) = vs.windows(2).find(|w| !inst.has_edge(w[0], w[1])) {
            return Err(CentralViolation::MissingEdge { u: w[0], v: w[1] });
        }
        let class = classify_component(p, inst);
        if class.s_count * 2 > vs.len() {
            return Err(CentralViolation::SHeavy { path: i });
        }
        if require_t2 && class.order == 3 && !class.has_t2 {
            return Err(CentralViolation::BareP3 { path: i });
        }
    }
    match seen.iter().position(|&c| !c) {
        Some(v) => Err(CentralViolation::Uncovered(v)),
        None => Ok(()),
    }
}

/// A validated central factor in canonical form (paths normalized and
/// sorted by minimum vertex); component indices refer to this order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct CentralFactor(PathFactor);

impl CentralFactor {
    pub fn new(inst: &BipartiteInstance, paths: Vec<VertexPath>) -> Result<Self, CentralViolation> {
        let factor = PathFactor::new(paths).canonical();
        validate_central(inst, &factor, false)?;
        Ok(Self(factor))
    }

    pub fn paths(&self) -> &[VertexPath] {
        &self.0.paths
    }

    pub fn factor(&self) -> &PathFactor {
        &self.0
    }

    pub fn into_factor(self) -> PathFactor {
        self.0
    }

    pub fn bare_p3_count(&self, inst: &BipartiteInstance) -> usize {
        self.paths().iter().filter(|p| classify_component(p, inst).is_bare_p3()).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ComponentClass {
    pub order: usize,
    pub has_t2: bool,
    pub s_count: usize,
    pub t2_count: usize,
}

impl ComponentClass {
    /// 1 without `T2` vertices, 2 with.
    pub fn tier(&self) -> u8 {
        if self.has_t2 {
            2
        } else {
            1
        }
    }

    pub fn is_bare_p3(&self) -> bool {
        self.order == 3 && !self.has_t2
    }

    pub fn is_middle(&self) -> bool {
        (self.order == 3 && self.has_t2) || (self.order == 5 && !self.has_t2)
    }

    pub fn is_opening(&self) -> bool {
        self.order != 3 && !(self.order == 5 && !self.has_t2)
    }

    fn weights(&self, inst_path: &[usize], inst: &BipartiteInstance) -> (i64, i64) {
        let t: i64 = inst_path.iter().map(|&v| inst.role(v).weight()).sum();
        (t, 4 * self.s_count as i64)
    }
}

pub fn classify_component(path: &VertexPath, inst: &BipartiteInstance) -> ComponentClass {
    let vs = path.vertices();
    let t2_count = vs.iter().filter(|&&v| inst.role(v) == Role::T2).count();
    ComponentClass {
        order: vs.len(),
        has_t2: t2_count > 0,
        s_count: vs.iter().filter(|&&v| inst.is_s(v)).count(),
        t2_count,
    }
}

/// Edge chosen for an arc: the lexicographically least `(s, t)` with `s` on
/// the tail's `S` side and `t` on the head's `T` side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ArcEdge {
    pub from_s: usize,
    pub to_t: usize,
}

/// Digraph on the components of a factor.
#[derive(Debug, Clone)]
pub struct FactorDigraph {
    succ: Vec<Vec<(usize, ArcEdge)>>,
    pred: Vec<Vec<usize>>,
}

impl FactorDigraph {
    pub fn build(inst: &BipartiteInstance, paths: &[VertexPath]) -> Self {
        let comp = component_index(inst.order(), paths);
        let k = paths.len();
        let mut best: Vec<Vec<Option<ArcEdge>>> = vec![vec![None; k]; k];
        for (a, p) in paths.iter().enumerate() {
            let mut ss: Vec<usize> = p.vertices().iter().copied().filter(|&v| inst.is_s(v)).collect();
            ss.sort_unstable();
            for s in ss {
                for &t in inst.neighbors(s) {
                    let b = comp[t];
                    if b != a && best[a][b].is_none() {
                        best[a][b] = Some(ArcEdge { from_s: s, to_t: t });
                    }
                }
            }
        }
        let mut succ = vec![Vec::new(); k];
        let mut pred = vec![Vec::new(); k];
        for a in 0..k {
            for b in 0..k {
                if let Some(e) = best[a][b] {
                    succ[a].push((b, e));
                    pred[b].push(a);
                }
            }
        }
        Self { succ, pred }
    }

    pub fn arc(&self, from: usize, to: usize) -> Option<ArcEdge> {
        self.succ[from].iter().find(|(b, _)| *b == to).map(|&(_, e)| e)
    }

    pub fn successors(&self, from: usize) -> impl Iterator<Item = usize> + '_ {
        self.succ[from].iter().map(|&(b, _)| b)
    }

    pub fn predecessors(&self, to: usize) -> &[usize] {
        &self.pred[to]
    }
}

fn component_index(n: usize, paths: &[VertexPath]) -> Vec<usize> {
    let mut comp = vec![usize::MAX; n];
    for (i, p) in paths.iter().enumerate() {
        for &v in p.vertices() {
            comp[v] = i;
        }
    }
    comp
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Admissibility {
    Weak,
    Strong,
}

/// Sequence of directed paths in the factor digraph, as component indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PathSystem {
    pub paths: Vec<Vec<usize>>,
}

impl PathSystem {
    /// Per-path node counts, compared lexicographically for progress.
    pub fn order_vector(&self) -> Vec<usize> {
        self.paths.iter().map(Vec::len).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemDefect {
    #[error("path {index} refers to an unknown component")]
    UnknownComponent { index: usize },
    #[error("path {index} is not admissible")]
    NotAdmissible { index: usize },
    #[error("path {index} revisits a component of an earlier path")]
    Revisits { index: usize },
    #[error("path {index} ends outside the bare P3s and earlier paths")]
    BadEnd { index: usize },
    #[error("path {index} is strongly admissible but not last")]
    StrongBeforeLast { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("chain needs at least two components")]
    TooShort,
    #[error("component at position {index} is unknown or repeated")]
    Repeated { index: usize },
    #[error("no arc from position {index} to the next component")]
    MissingArc { index: usize },
    #[error("last component is not a bare P3")]
    LastNotBareP3,
    #[error("first component cannot open a strongly admissible path")]
    FirstNotStrong,
    #[error("component at position {index} has an unusable type or attachment")]
    InteriorType { index: usize },
    #[error("rewired components reappear in the retained path system")]
    Overlap,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Hypothesis(#[from] HypothesisError),
    #[error("invalid factor: {0}")]
    Factor(#[from] CentralViolation),
    #[error("factor has no bare P3 to repair")]
    NothingToRepair,
    #[error("path system: {0}")]
    System(#[from] SystemDefect),
    #[error("path system cannot be completed (stopped after {paths} paths)")]
    Stuck { paths: usize },
    #[error("S cannot be matched into T")]
    NoMatching,
    #[error("growth stalled with {uncovered} uncovered T vertices")]
    GrowthStalled { uncovered: usize },
    #[error("chain: {0}")]
    Chain(#[from] ChainError),
    #[error("rewiring did not decrease the progress measure")]
    NoProgress,
    #[error("gave up after {bound} rewiring steps")]
    IterationBound { bound: usize },
    #[error("exhaustive search found no factor")]
    NoFactor,
}

/// Factor together with its component classes and digraph.
struct Context<'a> {
    inst: &'a BipartiteInstance,
    paths: &'a [VertexPath],
    classes: Vec<ComponentClass>,
    digraph: FactorDigraph,
}

impl<'a> Context<'a> {
    fn new(inst: &'a BipartiteInstance, factor: &'a CentralFactor) -> Self {
        let paths = factor.paths();
        let classes = paths.iter().map(|p| classify_component(p, inst)).collect();
        Self { inst, paths, classes, digraph: FactorDigraph::build(inst, paths) }
    }

    fn len(&self) -> usize {
        self.paths.len()
    }

    fn is_weak_opening(&self, first: usize, second: usize) -> bool {
        let c = self.classes[first];
        if c.order == 5 && c.t2_count == 1 {
            return true;
        }
        if c.order == 7 && !c.has_t2 {
            let center = self.paths[first].vertices()[3];
            return self.digraph.arc(first, second).is_some_and(|e| e.from_s == center);
        }
        false
    }

    fn admissibility(&self, path: &[usize]) -> Option<Admissibility> {
        if path.len() < 2 || path.iter().any(|&c| c >= self.len()) {
            return None;
        }
        if !self.classes[path[0]].is_opening() {
            return None;
        }
        if path[1..path.len() - 1].iter().any(|&c| !self.classes[c].is_middle()) {
            return None;
        }
        if path.windows(2).any(|w| self.digraph.arc(w[0], w[1]).is_none()) {
            return None;
        }
        let mut seen = path.to_vec();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != path.len() {
            return None;
        }
        Some(if self.is_weak_opening(path[0], path[1]) { Admissibility::Weak } else { Admissibility::Strong })
    }

    fn validate_system(&self, system: &PathSystem) -> Result<(), SystemDefect> {
        let mut visited = vec![false; self.len()];
        let m = system.paths.len();
        for (i, path) in system.paths.iter().enumerate() {
            if path.iter().any(|&c| c >= self.len()) {
                return Err(SystemDefect::UnknownComponent { index: i });
            }
            let kind = self.admissibility(path).ok_or(SystemDefect::NotAdmissible { index: i })?;
            let (last, body) = path.split_last().expect("admissible paths are nonempty");
            if body.iter().any(|&c| visited[c]) {
                return Err(SystemDefect::Revisits { index: i });
            }
            if !(self.classes[*last].is_bare_p3() || visited[*last]) {
                return Err(SystemDefect::BadEnd { index: i });
            }
            if i + 1 < m && kind == Admissibility::Strong {
                return Err(SystemDefect::StrongBeforeLast { index: i });
            }
            for &c in path {
                visited[c] = true;
            }
        }
        Ok(())
    }

    fn is_complete(&self, system: &PathSystem) -> bool {
        system.paths.last().is_some_and(|p| self.admissibility(p) == Some(Admissibility::Strong))
    }

    /// Greedily appends admissible paths until the last one is strong.
    fn complete(&self, mut system: PathSystem) -> Result<PathSystem, EngineError> {
        self.validate_system(&system)?;
        if !self.classes.iter().any(ComponentClass::is_bare_p3) {
            return Err(EngineError::NothingToRepair);
        }
        while !self.is_complete(&system) {
            let path = self.next_path(&system).ok_or(EngineError::Stuck { paths: system.paths.len() })?;
            system.paths.push(path);
        }
        Ok(system)
    }

    fn next_path(&self, system: &PathSystem) -> Option<Vec<usize>> {
        let k = self.len();
        let mut visited = vec![false; k];
        for &c in system.paths.iter().flatten() {
            visited[c] = true;
        }
        // Distance to a permissible end, moving only through fresh middle
        // components.
        let mut dist = vec![usize::MAX; k];
        let mut queue = VecDeque::new();
        for c in 0..k {
            if visited[c] || self.classes[c].is_bare_p3() {
                dist[c] = 0;
                queue.push_back(c);
            }
        }
        while let Some(y) = queue.pop_front() {
            for &x in self.digraph.predecessors(y) {
                if dist[x] == usize::MAX && !visited[x] && self.classes[x].is_middle() {
                    dist[x] = dist[y] + 1;
                    queue.push_back(x);
                }
            }
        }

        let mut fallback = None;
        for a in (0..k).filter(|&a| !visited[a] && self.classes[a].is_opening()) {
            let mut heads: Vec<usize> = self.digraph.successors(a).filter(|&y| dist[y] != usize::MAX).collect();
            heads.sort_by_key(|&y| (dist[y], y));
            for y in heads {
                let mut path = vec![a, y];
                let mut cur = y;
                while dist[cur] > 0 {
                    cur = self
                        .digraph
                        .successors(cur)
                        .find(|&z| dist[z] == dist[cur] - 1)
                        .expect("every reached component has a successor one step closer");
                    path.push(cur);
                }
                match self.admissibility(&path) {
                    Some(Admissibility::Strong) => return Some(path),
                    Some(Admissibility::Weak) if fallback.is_none() => fallback = Some(path),
                    _ => {}
                }
            }
        }
        fallback
    }

    fn chain(&self, system: &PathSystem) -> Vec<ChainNode> {
        let mut first_seen: Vec<Option<(usize, usize)>> = vec![None; self.len()];
        for (k, path) in system.paths.iter().enumerate() {
            for (j, &c) in path.iter().enumerate() {
                first_seen[c].get_or_insert((k, j));
            }
        }
        let mut out = Vec::new();
        let (mut k, mut j) = (system.paths.len() - 1, 0);
        loop {
            let c = system.paths[k][j];
            out.push(ChainNode { component: c, path: k, position: j });
            if j + 1 < system.paths[k].len() {
                j += 1;
                continue;
            }
            if self.classes[c].is_bare_p3() {
                return out;
            }
            let (k2, j2) = first_seen[c].expect("last components were visited earlier");
            // The earliest occurrence is a non-final one; jump there.
            out.pop();
            k = k2;
            j = j2;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct ChainNode {
    component: usize,
    path: usize,
    position: usize,
}

/// Result of rewiring a chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rewired {
    pub factor: CentralFactor,
    /// Index in the chain of the last component that was taken apart.
    pub split: usize,
    /// The extended path when the chain was cut before its end.
    pub merged: Option<VertexPath>,
}

fn position(path: &[usize], v: usize) -> usize {
    1 + path.iter().position(|&x| x == v).expect("vertex lies on the path")
}

/// Picks the lexicographically least orientation satisfying `ok`.
fn orient(path: &[usize], ok: impl Fn(&[usize]) -> bool) -> Option<Vec<usize>> {
    let forward = path.to_vec();
    let backward: Vec<usize> = path.iter().rev().copied().collect();
    let mut options: Vec<Vec<usize>> = [forward, backward].into_iter().filter(|o| ok(o)).collect();
    options.sort();
    options.into_iter().next()
}

fn rewire_in(ctx: &Context<'_>, chain: &[usize]) -> Result<Rewired, EngineError> {
    let p = chain.len();
    if p < 2 {
        return Err(ChainError::TooShort.into());
    }
    let mut seen = vec![false; ctx.len()];
    for (index, &c) in chain.iter().enumerate() {
        if c >= ctx.len() || std::mem::replace(&mut seen[c], true) {
            return Err(ChainError::Repeated { index }.into());
        }
    }
    let mut arcs = Vec::with_capacity(p - 1);
    for index in 0..p - 1 {
        arcs.push(ctx.digraph.arc(chain[index], chain[index + 1]).ok_or(ChainError::MissingArc { index })?);
    }
    if !ctx.classes[chain[p - 1]].is_bare_p3() {
        return Err(ChainError::LastNotBareP3.into());
    }
    if !ctx.classes[chain[0]].is_opening() || ctx.is_weak_opening(chain[0], chain[1]) {
        return Err(ChainError::FirstNotStrong.into());
    }

    let inst = ctx.inst;
    let mut oriented: Vec<Vec<usize>> = Vec::with_capacity(p);
    let mut s_pos = vec![0usize; p];
    let mut t_pos = vec![0usize; p];

    let first = ctx.paths[chain[0]].vertices();
    let class = ctx.classes[chain[0]];
    let sigma = arcs[0].from_s;
    let q = first.len();
    let o = orient(first, |o| {
        let s = position(o, sigma);
        if q % 2 == 1 {
            let center_rule = !(class.has_t2 && q == 7 && s == 4)
                || [o[0], o[2]].iter().any(|&v| inst.role(v) == Role::T2);
            2 * s > q && center_rule
        } else {
            s % 2 == 1
        }
    })
    .ok_or(ChainError::FirstNotStrong)?;
    s_pos[0] = position(&o, sigma);
    oriented.push(o);

    for i in 1..p - 1 {
        let (tau, sigma) = (arcs[i - 1].to_t, arcs[i].from_s);
        let path = ctx.paths[chain[i]].vertices();
        let o = orient(path, |o| position(o, tau) < position(o, sigma))
            .ok_or(ChainError::InteriorType { index: i })?;
        let (t, s) = (position(&o, tau), position(&o, sigma));
        let c = ctx.classes[chain[i]];
        let typed = match c.order {
            3 => c.has_t2 && s == 2,
            5 => s == 2 || s == 4,
            7 => !c.has_t2 && s == 4,
            _ => false,
        };
        if !typed {
            return Err(ChainError::InteriorType { index: i }.into());
        }
        t_pos[i] = t;
        s_pos[i] = s;
        oriented.push(o);
    }

    let tau = arcs[p - 2].to_t;
    let last = ctx.paths[chain[p - 1]].vertices();
    let o = orient(last, |o| position(o, tau) == o.len()).ok_or(ChainError::LastNotBareP3)?;
    t_pos[p - 1] = position(&o, tau);
    oriented.push(o);

    let split = (1..p).find(|&i| i == p - 1 || t_pos[i] == 1).expect("the last index qualifies");

    let mut pieces: Vec<Vec<usize>> = Vec::new();
    let head = oriented[0][..s_pos[0] - 1].to_vec();
    if !head.is_empty() {
        pieces.push(head);
    }
    for i in 1..=split {
        let mut piece: Vec<usize> = oriented[i - 1][s_pos[i - 1] - 1..].iter().rev().copied().collect();
        piece.extend(oriented[i][..t_pos[i]].iter().rev());
        pieces.push(piece);
    }
    let merged = if split < p - 1 {
        let last = pieces.last_mut().expect("at least one spliced piece");
        last.extend_from_slice(&oriented[split][1..]);
        Some(VertexPath(last.clone()))
    } else {
        None
    };

    let mut paths: Vec<VertexPath> =
        (0..ctx.len()).filter(|c| !chain[..=split].contains(c)).map(|c| ctx.paths[c].clone()).collect();
    paths.extend(pieces.into_iter().map(VertexPath));
    let factor = CentralFactor::new(inst, paths)?;
    Ok(Rewired { factor, split, merged })
}

/// Rewires the chain `chain` (component indices of `factor`), which must
/// run from an opening component through middle ones to a bare P3.
pub fn rewire(inst: &BipartiteInstance, factor: &CentralFactor, chain: &[usize]) -> Result<Rewired, EngineError> {
    let ctx = Context::new(inst, factor);
    rewire_in(&ctx, chain)
}

/// Extends `seed` to a complete path system with respect to `factor`.
pub fn find_complete_system(
    inst: &BipartiteInstance,
    factor: &CentralFactor,
    seed: PathSystem,
) -> Result<PathSystem, EngineError> {
    Context::new(inst, factor).complete(seed)
}

/// Spanning central factor grown from a matching of `S` into `T`.
pub fn s_central_spanning(inst: &BipartiteInstance) -> Result<CentralFactor, EngineError> {
    check_t2_hypothesis(inst)?;
    grow_spanning(inst)
}

fn max_matching(inst: &BipartiteInstance) -> Option<Vec<usize>> {
    fn augment(inst: &BipartiteInstance, s: usize, seen: &mut [bool], mate: &mut [Option<usize>]) -> bool {
        for &t in inst.neighbors(s) {
            if !std::mem::replace(&mut seen[t], true) {
                let free = match mate[t] {
                    None => true,
                    Some(other) => augment(inst, other, seen, mate),
                };
                if free {
                    mate[t] = Some(s);
                    return true;
                }
            }
        }
        false
    }
    let n = inst.order();
    let mut mate = vec![None; n];
    for s in inst.vertices_with(Role::S) {
        let mut seen = vec![false; n];
        if !augment(inst, s, &mut seen, &mut mate) {
            return None;
        }
    }
    let mut partner = vec![usize::MAX; n];
    for (t, m) in mate.iter().enumerate() {
        if let Some(s) = *m {
            partner[s] = t;
        }
    }
    Some(partner)
}

fn grow_spanning(inst: &BipartiteInstance) -> Result<CentralFactor, EngineError> {
    let n = inst.order();
    let partner = max_matching(inst).ok_or(EngineError::NoMatching)?;
    let mut paths: Vec<VertexPath> =
        inst.vertices_with(Role::S).into_iter().map(|s| VertexPath(vec![s, partner[s]])).collect();

    loop {
        paths = PathFactor::new(paths).canonical().paths;
        let comp = component_index(n, &paths);
        let uncovered: Vec<usize> = (0..n).filter(|&v| comp[v] == usize::MAX).collect();
        if uncovered.is_empty() {
            break;
        }
        // link[c] = (parent component or none, attachment T vertex)
        let mut link: Vec<Option<(Option<usize>, usize)>> = vec![None; paths.len()];
        let attach = |c: usize, accept: &dyn Fn(usize) -> bool| {
            paths[c]
                .vertices()
                .iter()
                .filter(|&&v| inst.is_s(v))
                .flat_map(|&s| inst.neighbors(s).iter().copied())
                .filter(|&t| accept(t))
                .min()
        };
        let mut layer: Vec<usize> = Vec::new();
        for c in 0..paths.len() {
            if let Some(t) = attach(c, &|t| comp[t] == usize::MAX) {
                link[c] = Some((None, t));
                layer.push(c);
            }
        }
        let target = loop {
            if layer.is_empty() {
                return Err(EngineError::GrowthStalled { uncovered: uncovered.len() });
            }
            if let Some(&c) = layer.iter().find(|&&c| paths[c].order() != 3) {
                break c;
            }
            let mut in_layer = vec![false; paths.len()];
            for &c in &layer {
                in_layer[c] = true;
            }
            let mut next = Vec::new();
            for c in 0..paths.len() {
                if link[c].is_none() {
                    if let Some(t) = attach(c, &|t| comp[t] != usize::MAX && in_layer[comp[t]]) {
                        link[c] = Some((Some(comp[t]), t));
                        next.push(c);
                    }
                }
            }
            layer = next;
        };

        let mut lineage = vec![target];
        while let Some((Some(parent), _)) = link[*lineage.last().expect("nonempty")] {
            lineage.push(parent);
        }
        lineage.reverse();

        let mut pieces: Vec<Vec<usize>> = Vec::new();
        let mut prev_end = link[lineage[0]].expect("layer members are linked").1;
        for w in lineage.windows(2) {
            let (c, child) = (w[0], w[1]);
            let end = link[child].expect("linked").1;
            let vs = paths[c].vertices();
            let far = if vs[0] == end { vs[2] } else { vs[0] };
            pieces.push(vec![prev_end, vs[1], far]);
            prev_end = end;
        }
        let vs = paths[target].vertices();
        let l = vs.len();
        let m = vs.iter().copied().filter(|&v| inst.is_s(v) && inst.has_edge(v, prev_end)).min().expect("linked");
        let o = orient(vs, |o| {
            let pos = position(o, m);
            if l % 2 == 1 {
                pos != 2
            } else {
                pos % 2 == 1
            }
        })
        .expect("one orientation always qualifies");
        let pos = position(&o, m);
        let mut spliced = vec![prev_end];
        spliced.extend_from_slice(&o[pos - 1..]);
        pieces.push(spliced);
        if pos > 1 {
            pieces.push(o[..pos - 1].to_vec());
        }

        paths = paths
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !lineage.contains(i))
            .map(|(_, p)| p)
            .chain(pieces.into_iter().map(VertexPath))
            .collect();
    }
    Ok(CentralFactor::new(inst, paths)?)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineConfig {
    /// Solve by exhaustive search instead of construction (tiny instances).
    pub brute_force: bool,
}

/// Central factor in which every order-3 path touches `T2`.
pub fn s_central_t2_factor(inst: &BipartiteInstance) -> Result<CentralFactor, EngineError> {
    s_central_t2_factor_with(inst, &EngineConfig::default())
}

pub fn s_central_t2_factor_with(inst: &BipartiteInstance, config: &EngineConfig) -> Result<CentralFactor, EngineError> {
    check_t2_hypothesis(inst)?;
    if config.brute_force {
        return brute_force(inst);
    }
    repair_unchecked(inst, grow_spanning(inst)?)
}

/// Rewires `factor` until no bare P3 remains.
pub fn repair(inst: &BipartiteInstance, factor: CentralFactor) -> Result<CentralFactor, EngineError> {
    check_t2_hypothesis(inst)?;
    validate_central(inst, factor.factor(), false)?;
    repair_unchecked(inst, factor)
}

fn repair_unchecked(inst: &BipartiteInstance, mut factor: CentralFactor) -> Result<CentralFactor, EngineError> {
    let initial = factor.bare_p3_count(inst);
    let bound = initial.max(1) * inst.order().pow(2);
    let mut steps = 0usize;

    loop {
        debug_weight_identities(inst, &factor);
        let bare = factor.bare_p3_count(inst);
        if bare == 0 {
            validate_central(inst, factor.factor(), true)?;
            return Ok(factor);
        }
        let mut system = Context::new(inst, &factor).complete(PathSystem::default())?;
        loop {
            steps += 1;
            if steps > bound {
                return Err(EngineError::IterationBound { bound });
            }
            let (next, next_system) = step(inst, &factor, &system)?;
            let next_bare = next.bare_p3_count(inst);
            match next_system {
                None => {
                    if next_bare >= bare {
                        return Err(EngineError::NoProgress);
                    }
                    factor = next;
                    break;
                }
                Some(s) => {
                    if next_bare != bare || s.order_vector() >= system.order_vector() {
                        return Err(EngineError::NoProgress);
                    }
                    factor = next;
                    system = s;
                    debug_weight_identities(inst, &factor);
                }
            }
        }
    }
}

/// One rewiring step. Returns the new factor and, when the bare P3 count is
/// unchanged, the complete path system that comes with it.
fn step(
    inst: &BipartiteInstance,
    factor: &CentralFactor,
    system: &PathSystem,
) -> Result<(CentralFactor, Option<PathSystem>), EngineError> {
    let ctx = Context::new(inst, factor);
    let chain = ctx.chain(system);
    let comps: Vec<usize> = chain.iter().map(|n| n.component).collect();
    let rewired = rewire_in(&ctx, &comps)?;
    let Some(merged) = rewired.merged else {
        return Ok((rewired.factor, None));
    };

    let cut = chain[rewired.split];
    let removed = &comps[..=rewired.split];
    let new_comp = component_index(inst.order(), rewired.factor.paths());
    let remap = |c: usize| -> Result<usize, ChainError> {
        if removed.contains(&c) {
            return Err(ChainError::Overlap);
        }
        Ok(new_comp[factor.paths()[c].vertices()[0]])
    };
    let mut paths = Vec::with_capacity(cut.path + 1);
    for path in &system.paths[..cut.path] {
        paths.push(path.iter().map(|&c| remap(c)).collect::<Result<Vec<_>, _>>()?);
    }
    let mut reopened = vec![new_comp[merged.vertices()[0]]];
    for &c in &system.paths[cut.path][cut.position + 1..] {
        reopened.push(remap(c)?);
    }
    paths.push(reopened);
    let seed = PathSystem { paths };

    let next_ctx = Context::new(inst, &rewired.factor);
    if cut.position == 0 {
        debug_assert!(next_ctx.is_complete(&seed), "reopened path must be strongly admissible");
    }
    let completed = next_ctx.complete(seed)?;
    Ok((rewired.factor, Some(completed)))
}

/// Scaled weight identities every central factor satisfies, by component
/// class (`t` = `3|T1| + 2|T2|`, `s` = `4|S|`).
fn debug_weight_identities(inst: &BipartiteInstance, factor: &CentralFactor) {
    if !cfg!(debug_assertions) {
        return;
    }
    for p in factor.paths() {
        let c = classify_component(p, inst);
        let (t, s) = c.weights(p.vertices(), inst);
        match (c.order, c.has_t2) {
            (3, false) => assert!(t == 6 && s + 2 == 6, "bare P3 weights"),
            (3, true) => assert!(t >= s, "order-3 weights"),
            (5, false) => assert!(t > s, "order-5 weights"),
            (5, true) if c.t2_count == 1 => assert!(t == s, "order-5 single-T2 weights"),
            (7, false) => assert!(t == s, "order-7 weights"),
            _ => {}
        }
    }
}

fn brute_force(inst: &BipartiteInstance) -> Result<CentralFactor, EngineError> {
    fn search(inst: &BipartiteInstance, used: &mut [bool], acc: &mut Vec<VertexPath>) -> bool {
        let Some(v) = used.iter().position(|&u| !u) else {
            return true;
        };
        let mut candidates = Vec::new();
        let mut path = Vec::new();
        for start in 0..used.len() {
            if !used[start] {
                collect_paths(inst, used, start, &mut path, &mut candidates);
            }
        }
        candidates.retain(|p: &Vec<usize>| p.first() < p.last() && p.contains(&v));
        candidates.sort();
        for p in candidates {
            let class = classify_component(&VertexPath(p.clone()), inst);
            if class.s_count * 2 > p.len() || class.is_bare_p3() {
                continue;
            }
            for &u in &p {
                used[u] = true;
            }
            acc.push(VertexPath(p.clone()));
            if search(inst, used, acc) {
                return true;
            }
            acc.pop();
            for &u in &p {
                used[u] = false;
            }
        }
        false
    }
    fn collect_paths(
        inst: &BipartiteInstance,
        used: &mut [bool],
        v: usize,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        used[v] = true;
        path.push(v);
        if path.len() >= 2 {
            out.push(path.clone());
        }
        for &w in inst.neighbors(v) {
            if !used[w] {
                collect_paths(inst, used, w, path, out);
            }
        }
        path.pop();
        used[v] = false;
    }

    let mut used = vec![false; inst.order()];
    let mut acc = Vec::new();
    if !search(inst, &mut used, &mut acc) {
        return Err(EngineError::NoFactor);
    }
    Ok(CentralFactor::new(inst, acc)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `s1 = 0, s2 = 1, t1 = 2, t2 = 3` in `T1`, `c = 4` in `T2`.
    fn two_three() -> BipartiteInstance {
        BipartiteInstance::from_parts(2, 2, 1, &[(0, 2), (0, 3), (1, 4), (1, 2)]).unwrap()
    }

    fn k23() -> BipartiteInstance {
        let edges: Vec<_> = (0..2).flat_map(|s| (2..5).map(move |t| (s, t))).collect();
        BipartiteInstance::from_parts(2, 3, 0, &edges).unwrap()
    }

    fn vp(v: &[usize]) -> VertexPath {
        VertexPath(v.to_vec())
    }

    #[test]
    fn instance_rejects_same_side_edges() {
        assert_eq!(
            BipartiteInstance::from_parts(2, 1, 0, &[(0, 1)]),
            Err(InstanceError::SameSide { u: 0, v: 1 })
        );
        assert_eq!(
            BipartiteInstance::from_parts(1, 1, 0, &[(0, 5)]),
            Err(InstanceError::VertexOutOfRange { v: 5, n: 2 })
        );
    }

    #[test]
    fn hypothesis_examples() {
        let edge = BipartiteInstance::from_parts(1, 1, 0, &[(0, 1)]).unwrap();
        assert_eq!(check_t2_hypothesis(&edge), Ok(()));
        assert_eq!(check_t2_hypothesis(&k23()), Ok(()));
        let star = BipartiteInstance::from_parts(1, 3, 0, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(check_t2_hypothesis(&star), Err(HypothesisError::TWeightTooLarge { weight: 9, limit: 5 }));
        // T vertex 4 is isolated; s2 alone reaches a single T1 vertex.
        let isolated = BipartiteInstance::from_parts(2, 3, 0, &[(0, 2), (1, 3), (0, 3)]).unwrap();
        assert_eq!(
            check_t2_hypothesis(&isolated),
            Err(HypothesisError::Neighborhood { set: vec![1], weight: 3, need: 4 })
        );
        assert_eq!(check_t2_hypothesis(&two_three()), Ok(()));
    }

    #[test]
    fn classification() {
        let inst = two_three();
        let c = classify_component(&vp(&[2, 0, 3]), &inst);
        assert_eq!((c.order, c.tier()), (3, 1));
        let c = classify_component(&vp(&[4, 1]), &inst);
        assert_eq!((c.order, c.tier()), (2, 2));
    }

    #[test]
    fn spanning_factor_on_k23() {
        let f = s_central_spanning(&k23()).unwrap();
        validate_central(&k23(), f.factor(), false).unwrap();
        assert_eq!(f.paths().iter().map(VertexPath::order).sum::<usize>(), 5);
    }

    #[test]
    fn complete_system_example() {
        let inst = two_three();
        let f = CentralFactor::new(&inst, vec![vp(&[1, 4]), vp(&[2, 0, 3])]).unwrap();
        // Canonical order: [2,0,3] first (contains 0), then [1,4].
        let system = find_complete_system(&inst, &f, PathSystem::default()).unwrap();
        assert_eq!(system.paths, vec![vec![1, 0]]);
        // Already complete: fixed point.
        assert_eq!(find_complete_system(&inst, &f, system.clone()).unwrap(), system);
    }

    #[test]
    fn complete_system_needs_bare_p3() {
        let inst = two_three();
        let f = CentralFactor::new(&inst, vec![vp(&[4, 1, 2, 0, 3])]).unwrap();
        assert_eq!(find_complete_system(&inst, &f, PathSystem::default()), Err(EngineError::NothingToRepair));
    }

    #[test]
    fn rewire_example() {
        let inst = two_three();
        let f = CentralFactor::new(&inst, vec![vp(&[1, 4]), vp(&[2, 0, 3])]).unwrap();
        let r = rewire(&inst, &f, &[1, 0]).unwrap();
        assert_eq!(r.factor.paths(), &[vp(&[3, 0, 2, 1, 4])]);
        assert_eq!(r.factor.bare_p3_count(&inst), 0);
        assert_eq!(r.merged, None);
        assert_eq!(rewire(&inst, &f, &[0, 1]), Err(EngineError::Chain(ChainError::MissingArc { index: 0 })));
    }

    #[test]
    fn rewire_rejects_non_bare_end() {
        let inst = k23();
        let f = CentralFactor::new(&inst, vec![vp(&[2, 0]), vp(&[3, 1, 4])]).unwrap();
        assert_eq!(rewire(&inst, &f, &[1, 0]), Err(EngineError::Chain(ChainError::LastNotBareP3)));
        // A bare order-5 path cannot open a chain.
        let f = CentralFactor::new(&inst, vec![vp(&[2, 0, 3, 1, 4])]).unwrap();
        assert_eq!(f.bare_p3_count(&inst), 0);
        assert_eq!(rewire(&inst, &f, &[0]), Err(EngineError::Chain(ChainError::TooShort)));
        let p2s = CentralFactor::new(&inst, vec![vp(&[2, 0]), vp(&[3, 1]), vp(&[4, 1])]);
        assert!(p2s.is_err(), "vertex 1 used twice");
    }

    #[test]
    fn t2_factor_examples() {
        // The matching pairs s1-t2 and s2-t1; absorbing c extends the second
        // pair to c s2 t1.
        let f = s_central_t2_factor(&two_three()).unwrap();
        assert_eq!(f.paths(), &[vp(&[0, 3]), vp(&[2, 1, 4])]);
        validate_central(&two_three(), f.factor(), true).unwrap();

        let matching = BipartiteInstance::from_parts(2, 2, 0, &[(0, 2), (1, 3), (0, 3), (1, 2)]).unwrap();
        let f = s_central_t2_factor(&matching).unwrap();
        assert!(f.paths().iter().all(|p| p.order() == 2));

        let edge = BipartiteInstance::from_parts(1, 1, 0, &[(0, 1)]).unwrap();
        assert_eq!(s_central_t2_factor(&edge).unwrap().paths(), &[vp(&[0, 1])]);
    }

    #[test]
    fn brute_force_mode() {
        let cfg = EngineConfig { brute_force: true };
        let f = s_central_t2_factor_with(&two_three(), &cfg).unwrap();
        validate_central(&two_three(), f.factor(), true).unwrap();
    }
}
