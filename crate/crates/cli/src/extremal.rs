use std::io::Write;

use anyhow::bail;
use clap::Args;
use pathfactor::deficiency::{check_family_bound_with, max_deficit, BoundReport, FamilyBound};
use pathfactor::extremal::FamilySpec;
use pathfactor::factor::{ExactSolver, Orders};
use pathfactor::graph::VertexSet;
use pathfactor::graph6::to_graph6;
use serde::Serialize;

use crate::stream::{write_json, Body, Context, Problem};

#[derive(Debug, Args)]
pub struct ExtremalArgs {
    /// `Hn:N` or `Hprime:K,N`; repeatable. Defaults to `Hn:1`, `Hn:2`, `Hprime:3,1`.
    #[arg(long)]
    pub family: Vec<FamilySpec>,
}

#[derive(Serialize)]
struct MaxDeficit {
    value: i64,
    set: VertexSet,
}

#[derive(Serialize)]
struct Verification {
    orders: String,
    factor_exists: bool,
    bound: BoundReport,
    /// `max_slack == 0`: the bound is attained.
    attained: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_deficit: Option<MaxDeficit>,
    verified: bool,
}

#[derive(Serialize)]
struct ExtremalRecord<T: Serialize> {
    family: String,
    n: usize,
    edges: usize,
    graph6: String,
    #[serde(flatten)]
    body: T,
}

/// Families are processed one after another; each sweep shards internally.
/// Exit 0 if every family has no factor and satisfies its bound, 1 otherwise.
pub fn run(ctx: &Context, args: &ExtremalArgs, out: &mut impl Write) -> anyhow::Result<i32> {
    let families = if args.family.is_empty() {
        vec![FamilySpec::Hn { n: 1 }, FamilySpec::Hn { n: 2 }, FamilySpec::Hprime { k: 3, n: 1 }]
    } else {
        args.family.clone()
    };
    for spec in &families {
        if !matches!(spec, FamilySpec::Hn { .. } | FamilySpec::Hprime { .. }) {
            bail!("{spec} is not an extremal family (expected Hn:N or Hprime:K,N)");
        }
    }
    let mut all_verified = true;
    for spec in &families {
        let g = spec.generate()?;
        let (orders, bound) = match *spec {
            FamilySpec::Hprime { k, .. } => (Orders::two_and_odd(k), FamilyBound::hprime(k)),
            _ => (Orders::two_and_odd(2), FamilyBound::hn()),
        };
        let result = ctx.pool.install(|| -> Result<Verification, Problem> {
            if g.order() > ctx.max_n {
                return Err(Problem::Budget { error: format!("order {} exceeds --max-n {}", g.order(), ctx.max_n) });
            }
            let factor_exists = ExactSolver::new(ctx.solver).find(&g, &orders)?.is_some();
            let bound = check_family_bound_with(&g, &bound, &ctx.sweep)?;
            let max_deficit = match spec {
                FamilySpec::Hn { .. } => {
                    let (d, set) = max_deficit(&g, &ctx.sweep)?;
                    Some(MaxDeficit { value: d.0, set })
                }
                _ => None,
            };
            Ok(Verification {
                orders: orders.to_string(),
                factor_exists,
                attained: bound.max_slack == 0,
                verified: !factor_exists && bound.holds(),
                bound,
                max_deficit,
            })
        });
        match &result {
            Ok(v) => {
                all_verified &= v.verified;
                eprintln!(
                    "{spec}: {} vertices, factor {}, max slack {}, {}",
                    g.order(),
                    if v.factor_exists { "exists" } else { "absent" },
                    v.bound.max_slack,
                    if v.verified { "verified" } else { "NOT verified" }
                );
            }
            Err(p) => {
                all_verified = false;
                eprintln!("{spec}: {p:?}");
            }
        }
        let record = ExtremalRecord {
            family: spec.to_string(),
            n: g.order(),
            edges: g.edge_count(),
            graph6: to_graph6(&g),
            body: Body::from(result),
        };
        write_json(out, &record)?;
    }
    Ok(if all_verified { 0 } else { 1 })
}
