//! Constructive {P2, P5}-factors for graphs satisfying the sufficient
//! deficiency condition.
//!
//! The recursion works on connected pieces. When every subset leaving an
//! order-1 or order-3 component has scaled slack at least 6, an edge at a
//! vertex of degree at least 3 is deleted (cycles are cut and split
//! directly). Otherwise a largest minimizing subset `S` is removed, the
//! order-1 and order-3 components of `G - S` become the `T1`/`T2` tokens of a
//! bipartite instance, the bipartite engine produces a central factor there,
//! and every component of that factor is lifted back to a path of `G`.

use serde::Serialize;
use thiserror::Error;

use crate::bipartite::{
    check_neighborhood_condition, s_central_t2_factor, BipartiteInstance, EngineError, HypothesisError,
};
use crate::deficiency::{
    beta_scaled_with, check_necessary_with, check_sufficient_with, SweepConfig, SweepError, Verdict, Witness,
};
use crate::factor::{find_factor_exact, verify_factor, FactorViolation, Orders, PathFactor, VertexPath};
use crate::graph::{Graph, VertexSet};

/// Lift graphs up to this order fall back to exhaustive path search when
/// the walk fails.
pub const EXHAUSTIVE_LIFT_LIMIT: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("order-3 component {component:?} of G - S is not a triangle")]
    NonTriangle { component: Vec<usize> },
    #[error("auxiliary instance fails the bipartite hypothesis: {0}")]
    Certificate(HypothesisError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("cannot lift component {component:?}: {reason}")]
    Lift { component: Vec<usize>, reason: &'static str },
    #[error("internal invariant violated: {0}")]
    Invariant(&'static str),
    #[error("constructed factor is invalid: {0}")]
    Verification(FactorViolation),
}

/// Checked properties of the auxiliary instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certificate {
    /// `3|T1| + 2|T2| <= 4|S| + 1`.
    pub weight_bound: bool,
    /// `1 <= |S| <= |T1| + |T2|`.
    pub size_bound: bool,
    /// Every `X ⊆ S` has neighborhood weight `>= 4|X|` or sees all of `T`.
    pub neighborhood: bool,
}

impl Certificate {
    pub fn holds(&self) -> bool {
        self.weight_bound && self.size_bound && self.neighborhood
    }
}

/// Bipartite instance built from `G` and a removed set `S`.
///
/// Instance vertices `0..|S|` are the vertices of `S` (ascending); the rest
/// are tokens, `T1` singletons first, then `T2` triangles, each group sorted
/// by minimum vertex.
#[derive(Debug, Clone)]
pub struct AuxiliaryMap {
    pub instance: BipartiteInstance,
    pub s_vertices: Vec<usize>,
    pub tokens: Vec<Vec<usize>>,
    pub certificate: Certificate,
    certificate_error: Option<HypothesisError>,
}

impl AuxiliaryMap {
    /// Vertices of `G` represented by instance vertex `h`.
    pub fn vertices_of(&self, h: usize) -> &[usize] {
        let s = self.s_vertices.len();
        if h < s {
            std::slice::from_ref(&self.s_vertices[h])
        } else {
            &self.tokens[h - s]
        }
    }

    pub fn is_token(&self, h: usize) -> bool {
        h >= self.s_vertices.len()
    }

    pub fn require_certificate(&self) -> Result<(), ReductionError> {
        match &self.certificate_error {
            None => Ok(()),
            Some(e) => Err(ReductionError::Certificate(e.clone())),
        }
    }
}

pub fn build_auxiliary(g: &Graph, s: &VertexSet) -> Result<AuxiliaryMap, ReductionError> {
    let profile = g.components_after_removal(s).map_err(|_| ReductionError::Invariant("set universe mismatch"))?;
    let mut singles = Vec::new();
    let mut triangles = Vec::new();
    for comp in &profile.components {
        let vs = comp.to_vec();
        match vs.len() {
            1 => singles.push(vs),
            3 => {
                if !(g.has_edge(vs[0], vs[1]) && g.has_edge(vs[1], vs[2]) && g.has_edge(vs[0], vs[2])) {
                    return Err(ReductionError::NonTriangle { component: vs });
                }
                triangles.push(vs);
            }
            _ => {}
        }
    }
    singles.sort();
    triangles.sort();
    let s_vertices = s.to_vec();
    let (t1, t2) = (singles.len(), triangles.len());
    let tokens: Vec<Vec<usize>> = singles.into_iter().chain(triangles).collect();
    let mut edges = Vec::new();
    for (i, &u) in s_vertices.iter().enumerate() {
        for (j, tok) in tokens.iter().enumerate() {
            if tok.iter().any(|&v| g.has_edge(u, v)) {
                edges.push((i, s_vertices.len() + j));
            }
        }
    }
    let instance = BipartiteInstance::from_parts(s_vertices.len(), t1, t2, &edges)
        .expect("token edges always join S to T");

    let (s_len, t_len) = (s_vertices.len() as i64, (t1 + t2) as i64);
    let weight = 3 * t1 as i64 + 2 * t2 as i64;
    let neighborhood = check_neighborhood_condition(&instance);
    let certificate = Certificate {
        weight_bound: weight <= 4 * s_len + 1,
        size_bound: 1 <= s_len && s_len <= t_len,
        neighborhood: neighborhood.is_ok(),
    };
    let certificate_error = if !certificate.size_bound {
        Some(if s_len == 0 {
            HypothesisError::EmptyS
        } else {
            HypothesisError::SLargerThanT { s: s_len as usize, t: t_len as usize }
        })
    } else if !certificate.weight_bound {
        Some(HypothesisError::TWeightTooLarge { weight, limit: 4 * s_len + 1 })
    } else {
        neighborhood.err()
    };
    Ok(AuxiliaryMap { instance, s_vertices, tokens, certificate, certificate_error })
}

/// The part of `G` belonging to one component of the auxiliary factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftPiece {
    /// `S` vertices of the component (vertices of `G`).
    pub s_side: Vec<usize>,
    /// Singleton tokens, as vertex sets of `G`.
    pub t1_tokens: Vec<Vec<usize>>,
    /// Triangle tokens, as vertex sets of `G`.
    pub t2_tokens: Vec<Vec<usize>>,
    /// Local vertex `i` of `graph` is vertex `vertices[i]` of `G`.
    pub vertices: Vec<usize>,
    /// Induced subgraph on `vertices` without edges between `S` vertices.
    pub graph: Graph,
}

impl LiftPiece {
    pub fn new(g: &Graph, aux: &AuxiliaryMap, a: &VertexPath) -> Self {
        let mut s_side = Vec::new();
        let (mut t1_tokens, mut t2_tokens) = (Vec::new(), Vec::new());
        for &h in a.vertices() {
            let vs = aux.vertices_of(h).to_vec();
            match (aux.is_token(h), vs.len()) {
                (false, _) => s_side.push(vs[0]),
                (true, 1) => t1_tokens.push(vs),
                (true, _) => t2_tokens.push(vs),
            }
        }
        let mut vertices: Vec<usize> =
            s_side.iter().copied().chain(t1_tokens.iter().chain(&t2_tokens).flatten().copied()).collect();
        vertices.sort_unstable();
        let local = |v: usize| vertices.binary_search(&v).expect("piece vertex");
        let edges: Vec<(usize, usize)> = vertices
            .iter()
            .flat_map(|&u| g.neighbors(u).iter().map(move |&v| (u, v)))
            .filter(|&(u, v)| u < v && vertices.binary_search(&v).is_ok())
            .filter(|&(u, v)| !(s_side.contains(&u) && s_side.contains(&v)))
            .map(|(u, v)| (local(u), local(v)))
            .collect();
        let graph = Graph::from_edges(vertices.len(), &edges).expect("local edges are valid");
        Self { s_side, t1_tokens, t2_tokens, vertices, graph }
    }

    fn local(&self, v: usize) -> usize {
        self.vertices.binary_search(&v).expect("piece vertex")
    }
}

/// A lifted component: the long path and the resulting {P2, P5}-factor,
/// both in vertices of `G`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lifted {
    pub piece: LiftPiece,
    pub route: VertexPath,
    pub factor: PathFactor,
}

fn lift_error(a: &VertexPath, reason: &'static str) -> ReductionError {
    ReductionError::Lift { component: a.vertices().to_vec(), reason }
}

/// Lifts one component `a` of the auxiliary factor by walking along it.
pub fn lift_component(g: &Graph, aux: &AuxiliaryMap, a: &VertexPath) -> Result<Lifted, ReductionError> {
    let piece = LiftPiece::new(g, aux, a);
    let hs = a.vertices();
    let mut route: Vec<usize> = Vec::new();
    let mut leftovers: Vec<Vec<usize>> = Vec::new();
    for (i, &h) in hs.iter().enumerate() {
        let vs = aux.vertices_of(h);
        if !aux.is_token(h) || vs.len() == 1 {
            route.push(vs[0]);
            continue;
        }
        let prev = i.checked_sub(1).map(|j| aux.vertices_of(hs[j])[0]);
        let next = hs.get(i + 1).map(|&h2| aux.vertices_of(h2)[0]);
        let touching = |s: usize| -> Vec<usize> { vs.iter().copied().filter(|&v| g.has_edge(s, v)).collect() };
        let others = |used: &[usize]| -> Vec<usize> { vs.iter().copied().filter(|v| !used.contains(v)).collect() };
        match (prev, next) {
            (Some(p), Some(q)) => {
                let (into, out) = (touching(p), touching(q));
                let pair = into.iter().flat_map(|&u| out.iter().map(move |&w| (u, w))).find(|(u, w)| u != w);
                match pair {
                    Some((u, w)) => {
                        route.push(u);
                        route.extend(others(&[u, w]));
                        route.push(w);
                    }
                    None => {
                        let x = *into.first().ok_or_else(|| lift_error(a, "no entry vertex"))?;
                        if !out.contains(&x) {
                            return Err(lift_error(a, "no exit vertex"));
                        }
                        route.push(x);
                        leftovers.push(others(&[x]));
                    }
                }
            }
            (Some(p), None) => {
                let z = *touching(p).first().ok_or_else(|| lift_error(a, "no entry vertex"))?;
                route.push(z);
                route.extend(others(&[z]));
            }
            (None, Some(q)) => {
                let z = *touching(q).first().ok_or_else(|| lift_error(a, "no exit vertex"))?;
                route.extend(others(&[z]));
                route.push(z);
            }
            (None, None) => return Err(lift_error(a, "isolated token")),
        }
    }
    finish_lift(a, piece, route, leftovers)
}

fn finish_lift(
    a: &VertexPath,
    piece: LiftPiece,
    route: Vec<usize>,
    leftovers: Vec<Vec<usize>>,
) -> Result<Lifted, ReductionError> {
    if route.len() < 2 || route.len() == 3 {
        return Err(lift_error(a, "route has order 1 or 3"));
    }
    let mut paths = vec![VertexPath(route.clone())];
    paths.extend(leftovers.into_iter().map(VertexPath));
    let factor = PathFactor::new(paths).into_p2_p5().map_err(|_| lift_error(a, "indecomposable path"))?;
    let local: Vec<VertexPath> =
        factor.paths.iter().map(|p| VertexPath(p.vertices().iter().map(|&v| piece.local(v)).collect())).collect();
    verify_factor(&piece.graph, &PathFactor::new(local), &Orders::two_and_odd(2))
        .map_err(|_| lift_error(a, "lifted factor fails verification"))?;
    Ok(Lifted { piece, route: VertexPath(route), factor })
}

/// Lifts `a` using a longest admissible path of the lift graph, found by
/// exhaustive search (only for lift graphs of at most
/// [`EXHAUSTIVE_LIFT_LIMIT`] vertices).
pub fn lift_component_exhaustive(g: &Graph, aux: &AuxiliaryMap, a: &VertexPath) -> Result<Lifted, ReductionError> {
    let piece = LiftPiece::new(g, aux, a);
    let n = piece.graph.order();
    if n > EXHAUSTIVE_LIFT_LIMIT {
        return Err(lift_error(a, "lift graph too large for exhaustive search"));
    }
    let required: u64 = piece.s_side.iter().fold(0, |m, &v| m | 1 << piece.local(v));
    let groups: Vec<u64> = piece
        .t1_tokens
        .iter()
        .chain(&piece.t2_tokens)
        .map(|t| t.iter().fold(0, |m, &v| m | 1 << piece.local(v)))
        .collect();

    let mut best: Option<Vec<usize>> = None;
    let mut stack = Vec::new();
    for start in 0..n {
        longest_from(&piece.graph, start, 0, &mut stack, &mut |path: &[usize], used: u64| {
            if path.first() > path.last() || used & required != required || groups.iter().any(|&c| c & used == 0) {
                return;
            }
            let better = match &best {
                None => true,
                Some(b) => path.len() > b.len() || (path.len() == b.len() && path < b.as_slice()),
            };
            if better {
                best = Some(path.to_vec());
            }
        });
    }
    let best = best.ok_or_else(|| lift_error(a, "no path meets every token"))?;
    let used: u64 = best.iter().fold(0, |m, &v| m | 1 << v);
    let mut leftovers = Vec::new();
    for t in piece.t2_tokens.iter() {
        let rest: Vec<usize> = t.iter().copied().filter(|&v| used >> piece.local(v) & 1 == 0).collect();
        match rest.len() {
            0 => {}
            2 => leftovers.push(rest),
            _ => return Err(lift_error(a, "longest path leaves a single triangle vertex")),
        }
    }
    let route = best.iter().map(|&v| piece.vertices[v]).collect();
    finish_lift(a, piece, route, leftovers)
}

fn longest_from(g: &Graph, v: usize, used: u64, stack: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize], u64)) {
    let used = used | 1 << v;
    stack.push(v);
    visit(stack, used);
    for &w in g.neighbors(v) {
        if used >> w & 1 == 0 {
            longest_from(g, w, used, stack, visit);
        }
    }
    stack.pop();
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", content = "value", rename_all = "kebab-case")]
pub enum FactorOutcome {
    Factor(PathFactor),
    Witness(Witness),
}

/// A verified {P2, P5}-factor, or the subset violating the sufficient
/// condition.
pub fn find_factor(g: &Graph) -> Result<FactorOutcome, ReductionError> {
    find_factor_with(g, &SweepConfig::default())
}

pub fn find_factor_with(g: &Graph, cfg: &SweepConfig) -> Result<FactorOutcome, ReductionError> {
    if let Verdict::Violated(w) = check_sufficient_with(g, cfg)? {
        return Ok(FactorOutcome::Witness(w));
    }
    let factor = build(g, cfg, true)?.canonical();
    verify_factor(g, &factor, &Orders::two_and_odd(2)).map_err(ReductionError::Verification)?;
    Ok(FactorOutcome::Factor(factor))
}

fn build(g: &Graph, cfg: &SweepConfig, checked: bool) -> Result<PathFactor, ReductionError> {
    if g.order() == 0 {
        return Ok(PathFactor::default());
    }
    if !checked && !check_sufficient_with(g, cfg)?.is_ok() {
        return Err(ReductionError::Invariant("recursive subproblem violates the sufficient condition"));
    }
    let comps = g.components();
    if comps.len() > 1 {
        let mut paths = Vec::new();
        for c in comps {
            let vs = c.to_vec();
            paths.extend(build(&g.induced(&vs), cfg, true)?.relabel(&vs).paths);
        }
        return Ok(PathFactor::new(paths));
    }

    let beta = beta_scaled_with(g, cfg)?;
    let (Some(beta3), Some(s)) = (beta.beta3, beta.argmax_set) else {
        return Err(ReductionError::Invariant("no subset leaves an order-1 or order-3 component"));
    };
    if beta3 >= 6 {
        if (0..g.order()).all(|v| g.degree(v) == 2) {
            return cut_cycle(g);
        }
        let x0 = (0..g.order()).find(|&v| g.degree(v) >= 3).expect("not 2-regular, minimum degree 2");
        let y0 = g.neighbors(x0)[0];
        return build(&g.without_edge(x0, y0), cfg, false);
    }

    let aux = build_auxiliary(g, &s)?;
    aux.require_certificate()?;
    let central = s_central_t2_factor(&aux.instance)?;
    let mut paths = Vec::new();
    for a in central.paths() {
        let lifted = match lift_component(g, &aux, a) {
            Ok(l) => l,
            Err(e) => {
                if LiftPiece::new(g, &aux, a).graph.order() > EXHAUSTIVE_LIFT_LIMIT {
                    return Err(e);
                }
                lift_component_exhaustive(g, &aux, a)?
            }
        };
        paths.extend(lifted.factor.paths);
    }
    let rest = g.components_after_removal(&s).map_err(|_| ReductionError::Invariant("set universe mismatch"))?;
    for comp in rest.components {
        if comp.len() != 1 && comp.len() != 3 {
            let vs = comp.to_vec();
            paths.extend(build(&g.induced(&vs), cfg, false)?.relabel(&vs).paths);
        }
    }
    Ok(PathFactor::new(paths))
}

/// Deletes the edge from the least vertex to its least neighbor and splits
/// the remaining path.
fn cut_cycle(g: &Graph) -> Result<PathFactor, ReductionError> {
    let start = 0;
    let end = g.neighbors(start)[0];
    let mut path = vec![start];
    let mut prev = start;
    let mut cur = g.neighbors(start)[1];
    while cur != end {
        path.push(cur);
        let next = *g.neighbors(cur).iter().find(|&&w| w != prev).expect("cycle vertex");
        prev = cur;
        cur = next;
    }
    path.push(end);
    PathFactor::new(vec![VertexPath(path)])
        .into_p2_p5()
        .map_err(|_| ReductionError::Invariant("cycle of order 3 in a graph without order-3 components"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inconsistency {
    /// The sufficient condition holds but the constructive solver failed.
    ConstructionFailed,
    /// The sufficient condition holds but the exact solver found nothing.
    ExactMissed,
    /// The constructive solver found a factor the exact solver did not.
    SolversDisagree,
    /// A factor exists although the necessary condition is violated.
    NecessaryViolated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossReport {
    pub sufficient: Option<bool>,
    pub necessary: Option<bool>,
    pub constructive: Option<bool>,
    pub exact: Option<bool>,
    pub inconsistencies: Vec<Inconsistency>,
}

impl CrossReport {
    pub fn consistent(&self) -> bool {
        self.inconsistencies.is_empty()
    }
}

/// Runs both solvers and both conditions on `g`; `None` marks a budget
/// or construction error.
pub fn cross_validate(g: &Graph) -> CrossReport {
    let cfg = SweepConfig::default();
    let sufficient = check_sufficient_with(g, &cfg).ok().map(|v| v.is_ok());
    let necessary = check_necessary_with(g, &cfg).ok().map(|v| v.is_ok());
    let constructive = match find_factor_with(g, &cfg) {
        Ok(FactorOutcome::Factor(_)) => Some(true),
        Ok(FactorOutcome::Witness(_)) => Some(false),
        Err(_) => None,
    };
    let exact = find_factor_exact(g, &Orders::two_and_odd(2)).ok().map(|f| f.is_some());

    let mut inconsistencies = Vec::new();
    if sufficient == Some(true) && constructive != Some(true) {
        inconsistencies.push(Inconsistency::ConstructionFailed);
    }
    if sufficient == Some(true) && exact == Some(false) {
        inconsistencies.push(Inconsistency::ExactMissed);
    }
    if constructive == Some(true) && exact == Some(false) {
        inconsistencies.push(Inconsistency::SolversDisagree);
    }
    if exact == Some(true) && necessary == Some(false) {
        inconsistencies.push(Inconsistency::NecessaryViolated);
    }
    CrossReport { sufficient, necessary, constructive, exact, inconsistencies }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, edges: &[(usize, usize)]) -> Graph {
        Graph::from_edges(n, edges).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
        g(n, &edges)
    }

    fn factor_of(outcome: FactorOutcome) -> PathFactor {
        match outcome {
            FactorOutcome::Factor(f) => f,
            FactorOutcome::Witness(w) => panic!("unexpected witness {w:?}"),
        }
    }

    #[test]
    fn small_graphs() {
        assert_eq!(factor_of(find_factor(&g(2, &[(0, 1)])).unwrap()).paths, vec![VertexPath(vec![0, 1])]);
        let c6 = cycle(6);
        let f = factor_of(find_factor(&c6).unwrap());
        verify_factor(&c6, &f, &Orders::two_and_odd(2)).unwrap();
        assert!(matches!(find_factor(&cycle(3)).unwrap(), FactorOutcome::Witness(_)));
        assert_eq!(factor_of(find_factor(&Graph::empty(0)).unwrap()).paths, vec![]);
    }

    #[test]
    fn auxiliary_for_apex_over_triangle() {
        let k4 = g(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let aux = build_auxiliary(&k4, &VertexSet::from_vertices(4, [0])).unwrap();
        assert_eq!(aux.s_vertices, vec![0]);
        assert_eq!(aux.tokens, vec![vec![1, 2, 3]]);
        assert_eq!(aux.instance.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn auxiliary_rejects_path_components() {
        let p4 = g(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(
            build_auxiliary(&p4, &VertexSet::from_vertices(4, [0])).unwrap_err(),
            ReductionError::NonTriangle { component: vec![1, 2, 3] }
        );
    }

    #[test]
    fn auxiliary_certificate_failure_on_star() {
        let star = g(3, &[(0, 1), (0, 2)]);
        let aux = build_auxiliary(&star, &VertexSet::from_vertices(3, [0])).unwrap();
        assert_eq!(aux.tokens, vec![vec![1], vec![2]]);
        assert!(!aux.certificate.weight_bound);
        assert!(aux.require_certificate().is_err());
    }

    #[test]
    fn lift_triangle_token_at_the_end() {
        // Triangle {0,1,2} hangs off vertex 3 through 2.
        let gr = g(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]);
        let aux = build_auxiliary(&gr, &VertexSet::from_vertices(4, [3])).unwrap();
        let lifted = lift_component(&gr, &aux, &VertexPath(vec![1, 0])).unwrap();
        assert_eq!(lifted.route, VertexPath(vec![0, 1, 2, 3]));
        assert_eq!(lifted.factor.paths, vec![VertexPath(vec![0, 1]), VertexPath(vec![2, 3])]);
        let ex = lift_component_exhaustive(&gr, &aux, &VertexPath(vec![1, 0])).unwrap();
        assert_eq!(ex.route.order(), 4);
    }

    #[test]
    fn cross_validation_examples() {
        let r = cross_validate(&cycle(5));
        assert!(r.consistent());
        assert_eq!((r.sufficient, r.constructive, r.exact), (Some(true), Some(true), Some(true)));
        let r = cross_validate(&cycle(3));
        assert!(r.consistent());
        assert_eq!((r.sufficient, r.necessary, r.exact), (Some(false), Some(false), Some(false)));
    }
}
