//! Exact integer deficiency conditions over all vertex subsets.
//!
//! Every condition is stored with denominators cleared:
//!
//! * sufficient condition: `3 c1 + 2 c3 <= 4|X| + 1`
//! * necessary condition: `2 c1 + c3 <= 3|X|`
//! * isolated vertices: `c1 <= 2|X|`
//! * `beta3 = min (4|X| + 1 - 3 c1 - 2 c3)` over `X` leaving an order-1 or
//!   order-3 component.
//!
//! Sweeps visit subsets by increasing size, then numeric mask; the reported
//! witness is the first subset in that order attaining the extremum. Large
//! sweeps are sharded across the rayon pool and merged with the same
//! tie-break, so results never depend on the number of workers.

use std::cmp::Reverse;
use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{for_each_component, Graph, GraphError, VertexSet, MASK_LIMIT};

pub const DEFAULT_MAX_SUBSETS: u64 = 1 << 26;
const PARALLEL_THRESHOLD: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SweepError {
    #[error("sweep over 2^{n} subsets exceeds the budget of {budget}")]
    BudgetExceeded { n: usize, budget: u64 },
    #[error("bound denominators must be positive")]
    InvalidBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepConfig {
    pub max_subsets: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { max_subsets: DEFAULT_MAX_SUBSETS }
    }
}

impl SweepConfig {
    fn admit(&self, n: usize) -> Result<(), SweepError> {
        if n >= MASK_LIMIT || (1u64 << n) > self.max_subsets {
            return Err(SweepError::BudgetExceeded { n, budget: self.max_subsets });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    Sufficient,
    Necessary,
    IsolatedVertices,
    FamilyBound,
}

/// A subset violating (or extremal for) one of the conditions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub condition: Condition,
    pub set: VertexSet,
    pub lhs: i64,
    pub rhs: i64,
}

impl Witness {
    pub fn excess(&self) -> i64 {
        self.lhs - self.rhs
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "witness", rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Violated(Witness),
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Holds => None,
            Verdict::Violated(w) => Some(w),
        }
    }
}

/// `3 c1(G-X) + 2 c3(G-X) - 4|X|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Deficit(pub i64);

pub fn deficit(g: &Graph, x: &VertexSet) -> Result<Deficit, GraphError> {
    let prof = g.components_after_removal(x)?;
    Ok(Deficit(3 * prof.count(1) as i64 + 2 * prof.count(3) as i64 - 4 * x.len() as i64))
}

/// Best subset found by a sweep: maximizes `(primary, secondary)`, then
/// prefers the smaller mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Best {
    primary: i64,
    secondary: i64,
    mask: u64,
}

impl Best {
    fn key(&self) -> (i64, i64, Reverse<u64>) {
        (self.primary, self.secondary, Reverse(self.mask))
    }

    fn pick(a: Option<Best>, b: Option<Best>) -> Option<Best> {
        match (a, b) {
            (Some(x), Some(y)) => Some(if y.key() > x.key() { y } else { x }),
            (x, None) => x,
            (None, y) => y,
        }
    }
}

fn sweep<F>(n: usize, eval: F) -> Option<Best>
where
    F: Fn(u64) -> Option<(i64, i64)> + Sync,
{
    let scan = |lo: u64, hi: u64| {
        let mut best: Option<Best> = None;
        for mask in lo..hi {
            if let Some((primary, secondary)) = eval(mask) {
                best = Best::pick(best, Some(Best { primary, secondary, mask }));
            }
        }
        best
    };
    let total = 1u64 << n;
    if n < PARALLEL_THRESHOLD as usize {
        return scan(0, total);
    }
    let chunk = 1u64 << (PARALLEL_THRESHOLD - 2);
    (0..total / chunk)
        .into_par_iter()
        .map(|i| scan(i * chunk, (i + 1) * chunk))
        .reduce(|| None, Best::pick)
}

/// `Σ weight[order] · c_order(G - X)` for the subset `x`.
#[inline]
fn weighted_components(adj: &[u64], alive: u64, weights: &[i64]) -> i64 {
    let mut total = 0;
    for_each_component(adj, alive, |c| total += weights[c.count_ones() as usize]);
    total
}

fn weight_table(n: usize, weights: &BTreeMap<usize, i64>) -> Vec<i64> {
    let mut table = vec![0i64; n + 1];
    for (&order, &w) in weights {
        if order <= n {
            table[order] = w;
        }
    }
    table
}

/// Linear condition `Σ w_i c_i(G-X) <= x_coeff |X| + constant`.
struct Linear {
    condition: Condition,
    weights: BTreeMap<usize, i64>,
    x_coeff: i64,
    constant: i64,
}

impl Linear {
    /// Subset maximizing `lhs - rhs`, smallest first on ties.
    fn extremal(&self, g: &Graph, cfg: &SweepConfig) -> Result<Witness, SweepError> {
        let n = g.order();
        cfg.admit(n)?;
        let adj = g.masks().expect("admitted graphs have masks");
        let full = g.full_mask();
        let table = weight_table(n, &self.weights);
        let best = sweep(n, |x| {
            let lhs = weighted_components(adj, full & !x, &table);
            let size = x.count_ones() as i64;
            Some((lhs - self.x_coeff * size - self.constant, -size))
        })
        .expect("the empty set is always evaluated");
        let lhs = weighted_components(adj, full & !best.mask, &table);
        let rhs = self.x_coeff * best.mask.count_ones() as i64 + self.constant;
        Ok(Witness { condition: self.condition, set: VertexSet::from_mask(n, best.mask), lhs, rhs })
    }

    fn verdict(&self, g: &Graph, cfg: &SweepConfig) -> Result<Verdict, SweepError> {
        let w = self.extremal(g, cfg)?;
        Ok(if w.excess() > 0 { Verdict::Violated(w) } else { Verdict::Holds })
    }
}

fn sufficient() -> Linear {
    Linear { condition: Condition::Sufficient, weights: [(1, 3), (3, 2)].into(), x_coeff: 4, constant: 1 }
}

fn necessary() -> Linear {
    Linear { condition: Condition::Necessary, weights: [(1, 2), (3, 1)].into(), x_coeff: 3, constant: 0 }
}

fn isolated() -> Linear {
    Linear { condition: Condition::IsolatedVertices, weights: [(1, 1)].into(), x_coeff: 2, constant: 0 }
}

/// `3 c1 + 2 c3 <= 4|X| + 1` for every `X`.
pub fn check_sufficient(g: &Graph) -> Result<Verdict, SweepError> {
    check_sufficient_with(g, &SweepConfig::default())
}

pub fn check_sufficient_with(g: &Graph, cfg: &SweepConfig) -> Result<Verdict, SweepError> {
    sufficient().verdict(g, cfg)
}

/// Subset of maximum deficit `3 c1 + 2 c3 - 4|X|` (reported even when the
/// sufficient condition holds).
pub fn max_deficit(g: &Graph, cfg: &SweepConfig) -> Result<(Deficit, VertexSet), SweepError> {
    let w = sufficient().extremal(g, cfg)?;
    Ok((Deficit(w.excess() + 1), w.set))
}

/// `2 c1 + c3 <= 3|X|` for every `X`; holds whenever a {P2,P5}-factor exists.
pub fn check_necessary(g: &Graph) -> Result<Verdict, SweepError> {
    check_necessary_with(g, &SweepConfig::default())
}

pub fn check_necessary_with(g: &Graph, cfg: &SweepConfig) -> Result<Verdict, SweepError> {
    necessary().verdict(g, cfg)
}

/// `i(G - X) <= 2|X|` for every `X`; equivalent to having a path factor.
pub fn check_theorem_a(g: &Graph) -> Result<Verdict, SweepError> {
    check_theorem_a_with(g, &SweepConfig::default())
}

pub fn check_theorem_a_with(g: &Graph, cfg: &SweepConfig) -> Result<Verdict, SweepError> {
    isolated().verdict(g, cfg)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BetaResult {
    /// Three times the minimum slack; `None` when no subset leaves an order-1
    /// or order-3 component.
    pub beta3: Option<i64>,
    /// A largest subset attaining `beta3` (smallest mask among those).
    pub argmax_set: Option<VertexSet>,
}

impl BetaResult {
    pub fn feasible(&self) -> bool {
        self.beta3.is_some()
    }
}

pub fn beta_scaled(g: &Graph) -> Result<BetaResult, SweepError> {
    beta_scaled_with(g, &SweepConfig::default())
}

pub fn beta_scaled_with(g: &Graph, cfg: &SweepConfig) -> Result<BetaResult, SweepError> {
    let n = g.order();
    cfg.admit(n)?;
    let adj = g.masks().expect("admitted graphs have masks");
    let full = g.full_mask();
    let best = sweep(n, |x| {
        let (mut c1, mut c3) = (0i64, 0i64);
        for_each_component(adj, full & !x, |c| match c.count_ones() {
            1 => c1 += 1,
            3 => c3 += 1,
            _ => {}
        });
        if c1 + c3 == 0 {
            return None;
        }
        let size = x.count_ones() as i64;
        Some((-(4 * size + 1 - 3 * c1 - 2 * c3), size))
    });
    Ok(match best {
        Some(b) => BetaResult { beta3: Some(-b.primary), argmax_set: Some(VertexSet::from_mask(n, b.mask)) },
        None => BetaResult { beta3: None, argmax_set: None },
    })
}

/// Weighted bound `Σ w_i c_i(G-X) <= (a_num/a_den)|X| + b_num/b_den`.
///
/// The weights are given on the common-denominator scale
/// `L = lcm(a_den, b_den)`: `{1: 3, 3: 2}` with `a = 4/3`, `b = 2/3` encodes
/// `c1 + (2/3) c3 <= (4/3)|X| + 2/3`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyBound {
    pub weights: BTreeMap<usize, i64>,
    pub a_num: i64,
    pub a_den: i64,
    pub b_num: i64,
    pub b_den: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl FamilyBound {
    /// `c1 + (2/3) c3 <= (4/3)|X| + 2/3`, satisfied by every `H_n`.
    pub fn hn() -> Self {
        Self { weights: [(1, 3), (3, 2)].into(), a_num: 4, a_den: 3, b_num: 2, b_den: 3 }
    }

    /// `Σ_{j<k} c_{2j+1} <= ((4k+6)|X| + (2k+3)) / (8k+3)`, satisfied by
    /// every `H'_n` for `k ≡ 0 (mod 3)`.
    pub fn hprime(k: usize) -> Self {
        let k = k as i64;
        let den = 8 * k + 3;
        Self { weights: odd_weights(k, den), a_num: 4 * k + 6, a_den: den, b_num: 2 * k + 3, b_den: den }
    }

    /// The conjectured hypothesis `Σ_{j<k} c_{2j+1} <= ((4k+6)/(8k+3))|X|`.
    pub fn conjecture(k: usize) -> Self {
        let k = k as i64;
        let den = 8 * k + 3;
        Self { weights: odd_weights(k, den), a_num: 4 * k + 6, a_den: den, b_num: 0, b_den: 1 }
    }

    fn linear(&self) -> Result<Linear, SweepError> {
        if self.a_den <= 0 || self.b_den <= 0 {
            return Err(SweepError::InvalidBound);
        }
        let scale = self.a_den / gcd(self.a_den, self.b_den) * self.b_den;
        Ok(Linear {
            condition: Condition::FamilyBound,
            weights: self.weights.clone(),
            x_coeff: self.a_num * (scale / self.a_den),
            constant: self.b_num * (scale / self.b_den),
        })
    }
}

fn odd_weights(k: i64, weight: i64) -> BTreeMap<usize, i64> {
    (0..k).map(|j| ((2 * j + 1) as usize, weight)).collect()
}

/// Maximum of `lhs - rhs` over all `X`, with the first subset attaining it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub max_slack: i64,
    pub witness: Witness,
}

impl BoundReport {
    pub fn holds(&self) -> bool {
        self.max_slack <= 0
    }
}

pub fn check_family_bound(g: &Graph, bound: &FamilyBound) -> Result<BoundReport, SweepError> {
    check_family_bound_with(g, bound, &SweepConfig::default())
}

pub fn check_family_bound_with(
    g: &Graph,
    bound: &FamilyBound,
    cfg: &SweepConfig,
) -> Result<BoundReport, SweepError> {
    let witness = bound.linear()?.extremal(g, cfg)?;
    Ok(BoundReport { max_slack: witness.excess(), witness })
}
