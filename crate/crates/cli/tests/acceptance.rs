//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Every value is checked against an
//! independent oracle written here, not only against the library.

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant};

use pathfactor::bipartite::{
    check_t2_hypothesis, s_central_t2_factor, s_central_t2_factor_with, validate_central, BipartiteInstance,
    EngineConfig, Role,
};
use pathfactor::deficiency::{
    check_family_bound, check_necessary, check_sufficient, check_theorem_a, max_deficit, FamilyBound, SweepConfig,
};
use pathfactor::extremal::{gen_hn, gen_hprime, FamilySpec};
use pathfactor::factor::{find_factor_exact, Orders, PathFactor};
use pathfactor::graph::Graph;
use pathfactor::graph6::{parse_graph6, to_graph6};
use pathfactor::reduction::{find_factor, FactorOutcome};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

const CONNECTED_LE8: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/connected_le8.g6");
const ALL_LE7: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/all_le7.g6");

// Pinned budgets and sample sizes.
const MAX_SECS_MAIN_SWEEP: u64 = 300;
const MAX_SECS_HN: u64 = 120;
const MAX_SECS_HPRIME: u64 = 900;
const BIPARTITE_INSTANCES: usize = 500;
const BRUTE_FORCE_ORDER: usize = 8;
const ROUND_TRIPS: usize = 10_000;
const ROUND_TRIP_MAX_N: u64 = 12;

fn corpus(path: &str) -> Vec<Graph> {
    std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("{path}: {e}"))
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse_graph6(l).expect("corpus line parses"))
        .collect()
}

// ---- independent oracles ----

/// Component orders of `g - x`, by DFS over adjacency lists.
fn component_orders(g: &Graph, x: u64) -> Vec<usize> {
    let n = g.order();
    let mut seen: Vec<bool> = (0..n).map(|v| x >> v & 1 == 1).collect();
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut stack = vec![s];
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        out.push(size);
    }
    out
}

/// max over X of `Σ weight(order) c_order(G - X) - coeff |X|`.
fn oracle_max(g: &Graph, weight: impl Fn(usize) -> i64, coeff: i64) -> i64 {
    (0u64..1 << g.order())
        .map(|x| {
            let lhs: i64 = component_orders(g, x).into_iter().map(&weight).sum();
            lhs - coeff * x.count_ones() as i64
        })
        .max()
        .expect("at least the empty set")
}

/// Whether `factor` is a spanning set of disjoint paths of allowed orders.
fn oracle_is_factor(g: &Graph, factor: &PathFactor, orders: &[usize]) -> bool {
    let mut seen = vec![false; g.order()];
    for p in &factor.paths {
        let vs = p.vertices();
        if !orders.contains(&vs.len()) || vs.windows(2).any(|w| !g.has_edge(w[0], w[1])) {
            return false;
        }
        for &v in vs {
            if v >= seen.len() || std::mem::replace(&mut seen[v], true) {
                return false;
            }
        }
    }
    seen.into_iter().all(|c| c)
}

/// graph6 encoding written from the format definition (n <= 62).
fn oracle_graph6(g: &Graph) -> String {
    let n = g.order();
    let mut bits = Vec::new();
    for j in 1..n {
        for i in 0..j {
            bits.push(g.has_edge(i, j));
        }
    }
    while bits.len() % 6 != 0 {
        bits.push(false);
    }
    let mut s = String::new();
    s.push((n as u8 + 63) as char);
    for chunk in bits.chunks(6) {
        let v = chunk.iter().fold(0u8, |acc, &b| acc << 1 | b as u8);
        s.push((v + 63) as char);
    }
    s
}

// ---- criteria ----

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, secs: u64) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure(t <= Duration::from_secs(secs), || format!("took {t:.1?}, limit {secs}s"))?;
    Ok(t)
}

fn main_theorem_sweep() -> Outcome {
    let start = Instant::now();
    let orders = Orders::two_and_odd(2);
    let (mut graphs, mut premise) = (0, 0);
    for (i, g) in corpus(CONNECTED_LE8).iter().enumerate() {
        graphs += 1;
        let holds = check_sufficient(g).map_err(|e| e.to_string())?.is_ok();
        let oracle = oracle_max(g, |o| [0, 3, 0, 2].get(o).copied().unwrap_or(0), 4) <= 1;
        ensure(holds == oracle, || format!("graph {}: condition {holds}, oracle {oracle}", i + 1))?;
        if !holds {
            continue;
        }
        premise += 1;
        let exact = find_factor_exact(g, &orders).map_err(|e| e.to_string())?;
        ensure(exact.as_ref().is_some_and(|f| oracle_is_factor(g, f, &[2, 5])), || {
            format!("graph {}: exact solver gave {exact:?}", i + 1)
        })?;
        match find_factor(g) {
            Ok(FactorOutcome::Factor(f)) if oracle_is_factor(g, &f, &[2, 5]) => {}
            other => return Err(format!("graph {}: constructive solver gave {other:?}", i + 1)),
        }
    }
    let t = within(start, MAX_SECS_MAIN_SWEEP)?;
    Ok(format!("{graphs} graphs, {premise} satisfy the condition, all factored twice, {t:.1?}"))
}

fn necessary_condition_sweep() -> Outcome {
    let orders = Orders::two_and_odd(2);
    let mut factored = 0;
    for (i, g) in corpus(CONNECTED_LE8).iter().enumerate() {
        let Some(f) = find_factor_exact(g, &orders).map_err(|e| e.to_string())? else {
            continue;
        };
        factored += 1;
        ensure(oracle_is_factor(g, &f, &[2, 5]), || format!("graph {}: invalid factor", i + 1))?;
        let holds = check_necessary(g).map_err(|e| e.to_string())?.is_ok();
        let oracle = oracle_max(g, |o| [0, 2, 0, 1].get(o).copied().unwrap_or(0), 3) <= 0;
        ensure(holds && oracle, || format!("graph {}: condition {holds}, oracle {oracle}", i + 1))?;
    }
    Ok(format!("{factored} graphs with a factor, all satisfy the necessary condition"))
}

fn isolated_vertex_iff() -> Outcome {
    let orders = Orders::new([2, 3]).expect("valid orders");
    let (mut graphs, mut with_factor) = (0, 0);
    for (i, g) in corpus(ALL_LE7).iter().enumerate() {
        graphs += 1;
        let condition = check_theorem_a(g).map_err(|e| e.to_string())?.is_ok();
        let oracle = oracle_max(g, |o| (o == 1) as i64, 2) <= 0;
        let factor = find_factor_exact(g, &orders).map_err(|e| e.to_string())?;
        if let Some(f) = &factor {
            with_factor += 1;
            ensure(oracle_is_factor(g, f, &[2, 3]), || format!("graph {}: invalid factor", i + 1))?;
        }
        ensure(condition == oracle && condition == factor.is_some(), || {
            format!("graph {}: condition {condition}, oracle {oracle}, factor {}", i + 1, factor.is_some())
        })?;
    }
    Ok(format!("{graphs} graphs, {with_factor} with a {{2,3}}-factor, zero discrepancies"))
}

fn hn_tightness() -> Outcome {
    let start = Instant::now();
    for n in 1..=2 {
        let g = gen_hn(n).map_err(|e| e.to_string())?;
        let exact = find_factor_exact(&g, &Orders::two_and_odd(2)).map_err(|e| e.to_string())?;
        ensure(exact.is_none(), || format!("H_{n} has a factor {exact:?}"))?;
        let (d, _) = max_deficit(&g, &SweepConfig::default()).map_err(|e| e.to_string())?;
        let oracle = oracle_max(&g, |o| [0, 3, 0, 2].get(o).copied().unwrap_or(0), 4);
        ensure(d.0 == 2 && oracle == 2, || format!("H_{n}: max deficit {} (oracle {oracle}), expected 2", d.0))?;
        let report = check_family_bound(&g, &FamilyBound::hn()).map_err(|e| e.to_string())?;
        ensure(report.max_slack == 0, || format!("H_{n}: bound slack {}", report.max_slack))?;
    }
    let t = within(start, MAX_SECS_HN)?;
    Ok(format!("H_1, H_2: no factor, max 3c1+2c3-4|X| = 2, +2/3 bound attained, {t:.1?}"))
}

fn hprime_bound() -> Outcome {
    let start = Instant::now();
    let k = 3;
    let g = gen_hprime(k, 1).map_err(|e| e.to_string())?;
    ensure(g.order() == 22, || format!("order {}", g.order()))?;
    let report = check_family_bound(&g, &FamilyBound::hprime(k)).map_err(|e| e.to_string())?;
    // (8k+3) Σ_{odd order < 2k} c - (4k+6)|X| <= 2k+3
    let oracle = oracle_max(&g, |o| if o % 2 == 1 && o < 2 * k { 27 } else { 0 }, 18);
    ensure(report.holds() && oracle <= 9, || format!("slack {}, oracle max {oracle} vs 9", report.max_slack))?;
    ensure(report.max_slack == oracle - 9, || format!("slack {} disagrees with oracle {}", report.max_slack, oracle - 9))?;
    let exact = find_factor_exact(&g, &Orders::two_and_odd(k)).map_err(|e| e.to_string())?;
    ensure(exact.is_none(), || format!("found a {{2,7}}-factor {exact:?}"))?;
    let t = within(start, MAX_SECS_HPRIME)?;
    Ok(format!("2^22 subsets, max slack {}, no {{2,7}}-factor, {t:.1?}", report.max_slack))
}

struct Bip {
    inst: BipartiteInstance,
    n: usize,
    adj: Vec<Vec<bool>>,
}

fn random_bipartite(rng: &mut SplitMix64) -> Bip {
    loop {
        let s = 1 + (rng.next_u64() % 5) as usize;
        let t = s + (rng.next_u64() % (8 - s as u64)) as usize;
        if t > 7 {
            continue;
        }
        let t2 = (rng.next_u64() % (t as u64 + 1)) as usize;
        let density = 35 + rng.next_u64() % 50;
        let mut edges = Vec::new();
        for u in 0..s {
            for v in s..s + t {
                if rng.next_u64() % 100 < density {
                    edges.push((u, v));
                }
            }
        }
        let n = s + t;
        let mut adj = vec![vec![false; n]; n];
        for &(u, v) in &edges {
            adj[u][v] = true;
            adj[v][u] = true;
        }
        let inst = BipartiteInstance::from_parts(s, t - t2, t2, &edges).expect("valid parts");
        return Bip { inst, n, adj };
    }
}

fn oracle_hypothesis(b: &Bip) -> bool {
    let s: Vec<usize> = (0..b.n).filter(|&v| b.inst.role(v) == Role::S).collect();
    let t: Vec<usize> = (0..b.n).filter(|&v| b.inst.role(v) != Role::S).collect();
    let weight = |v: usize| if b.inst.role(v) == Role::T1 { 3 } else { 2 };
    let total: usize = t.iter().map(|&v| weight(v)).sum();
    if s.is_empty() || s.len() > t.len() || total > 4 * s.len() + 1 {
        return false;
    }
    (0u32..1 << s.len()).all(|x| {
        let members: Vec<usize> = (0..s.len()).filter(|i| x >> i & 1 == 1).map(|i| s[i]).collect();
        let nb: Vec<usize> = t.iter().copied().filter(|&w| members.iter().any(|&m| b.adj[m][w])).collect();
        nb.len() == t.len() || nb.iter().map(|&v| weight(v)).sum::<usize>() >= 4 * members.len()
    })
}

fn has_hamiltonian_path(b: &Bip, vs: &[usize]) -> bool {
    let k = vs.len();
    let mut reach = vec![vec![false; k]; 1 << k];
    for i in 0..k {
        reach[1 << i][i] = true;
    }
    for sub in 1..1usize << k {
        for end in 0..k {
            if reach[sub][end] {
                for next in 0..k {
                    if sub >> next & 1 == 0 && b.adj[vs[end]][vs[next]] {
                        reach[sub | 1 << next][next] = true;
                    }
                }
            }
        }
    }
    reach[(1 << k) - 1].iter().any(|&r| r)
}

/// Whether the vertex set splits into traceable blocks of order >= 2 with at
/// least as many T as S vertices, and no order-3 block avoiding T2.
fn oracle_central_exists(b: &Bip) -> bool {
    fn go(b: &Bip, left: u32) -> bool {
        if left == 0 {
            return true;
        }
        let low = left & left.wrapping_neg();
        let rest = left & !low;
        let mut sub = rest;
        loop {
            let block = sub | low;
            let vs: Vec<usize> = (0..b.n).filter(|v| block >> v & 1 == 1).collect();
            let s = vs.iter().filter(|&&v| b.inst.role(v) == Role::S).count();
            let t2 = vs.iter().any(|&v| b.inst.role(v) == Role::T2);
            let ok = vs.len() >= 2 && 2 * s <= vs.len() && !(vs.len() == 3 && !t2);
            if ok && has_hamiltonian_path(b, &vs) && go(b, left & !block) {
                return true;
            }
            if sub == 0 {
                return false;
            }
            sub = (sub - 1) & rest;
        }
    }
    go(b, (1u32 << b.n) - 1)
}

fn oracle_central(b: &Bip, f: &PathFactor) -> bool {
    let mut seen = vec![false; b.n];
    for p in &f.paths {
        let vs = p.vertices();
        let s = vs.iter().filter(|&&v| b.inst.role(v) == Role::S).count();
        let t2 = vs.iter().any(|&v| b.inst.role(v) == Role::T2);
        if vs.len() < 2 || 2 * s > vs.len() || (vs.len() == 3 && !t2) {
            return false;
        }
        if vs.windows(2).any(|w| !b.adj[w[0]][w[1]]) {
            return false;
        }
        for &v in vs {
            if std::mem::replace(&mut seen[v], true) {
                return false;
            }
        }
    }
    seen.into_iter().all(|c| c)
}

fn bipartite_engine() -> Outcome {
    let mut rng = SplitMix64::seed_from_u64(2024);
    let (mut valid, mut small, mut tried) = (0, 0, 0);
    while valid < BIPARTITE_INSTANCES {
        tried += 1;
        let b = random_bipartite(&mut rng);
        let expected = oracle_hypothesis(&b);
        ensure(check_t2_hypothesis(&b.inst).is_ok() == expected, || {
            format!("instance {tried}: hypothesis check disagrees with oracle")
        })?;
        if !expected {
            continue;
        }
        valid += 1;
        let f = s_central_t2_factor(&b.inst).map_err(|e| format!("instance {tried}: {e}"))?;
        ensure(validate_central(&b.inst, f.factor(), true).is_ok() && oracle_central(&b, f.factor()), || {
            format!("instance {tried}: invalid output {:?}", f.paths())
        })?;
        if b.n <= BRUTE_FORCE_ORDER {
            small += 1;
            let brute = s_central_t2_factor_with(&b.inst, &EngineConfig { brute_force: true })
                .map_err(|e| format!("instance {tried}: brute force: {e}"))?;
            ensure(oracle_central(&b, brute.factor()) && oracle_central_exists(&b), || {
                format!("instance {tried}: brute-force enumeration disagrees")
            })?;
        }
    }
    Ok(format!("{valid} valid instances ({tried} drawn), all validated; {small} with |S|+|T| <= 8 agree with enumeration"))
}

fn pfk(args: &[&str], jobs: &str) -> (Option<i32>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_pfk"))
        .args(args)
        .args(["--jobs", jobs])
        .env_remove("PFK_JOBS")
        .output()
        .expect("pfk runs");
    (out.status.code(), out.stdout)
}

fn parallel_equivalence() -> Outcome {
    let runs: [&[&str]; 8] = [
        &["check", "-i", ALL_LE7],
        &["solve", "-i", CONNECTED_LE8],
        &["solve", "--method", "constructive", "-i", CONNECTED_LE8],
        &["sweep", "--assert", "theorem1", "-i", CONNECTED_LE8],
        &["sweep", "--assert", "prop-necessary", "-i", CONNECTED_LE8],
        &["sweep", "--assert", "fact-a", "-i", ALL_LE7],
        &["extremal"],
        &["conjecture", "--k", "3", "-i", CONNECTED_LE8],
    ];
    let mut bytes = 0;
    for args in runs {
        let one = pfk(args, "1");
        let four = pfk(args, "4");
        ensure(one == four, || format!("`pfk {}` differs between --jobs 1 and --jobs 4", args.join(" ")))?;
        ensure(!one.1.is_empty(), || format!("`pfk {}` wrote nothing", args.join(" ")))?;
        bytes += one.1.len();
    }
    Ok(format!("{} commands, {bytes} bytes of records identical", runs.len()))
}

fn graph6_round_trip() -> Outcome {
    let mut rng = SplitMix64::seed_from_u64(8);
    let mut orders = BTreeSet::new();
    for i in 0..ROUND_TRIPS {
        let n = (rng.next_u64() % (ROUND_TRIP_MAX_N + 1)) as usize;
        let den = 1 + rng.next_u64() % 8;
        let spec = FamilySpec::Random { n, num: rng.next_u64() % (den + 1), den, seed: rng.next_u64() };
        let g = spec.generate().map_err(|e| e.to_string())?;
        let text = to_graph6(&g);
        ensure(text == oracle_graph6(&g), || format!("case {i}: encoding {text:?} differs from oracle"))?;
        let back = parse_graph6(&text).map_err(|e| format!("case {i}: {e}"))?;
        ensure(back == g, || format!("case {i}: round trip changed {text:?}"))?;
        orders.insert(n);
    }
    Ok(format!("{ROUND_TRIPS} random graphs, orders 0..={ROUND_TRIP_MAX_N} ({} distinct), identity", orders.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("main-theorem sweep, connected graphs n <= 8", main_theorem_sweep),
        ("necessary-condition sweep, connected graphs n <= 8", necessary_condition_sweep),
        ("isolated-vertex condition iff {2,3}-factor, all graphs n <= 7", isolated_vertex_iff),
        ("H_n tightness, n = 1, 2", hn_tightness),
        ("H'_n bound and no {2,7}-factor, k = 3, n = 1", hprime_bound),
        ("bipartite central-factor engine, 500 random instances", bipartite_engine),
        ("--jobs 4 output equals --jobs 1", parallel_equivalence),
        ("graph6 round trip", graph6_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
