use std::io::Write;

use anyhow::bail;
use clap::{Args, ValueEnum};
use pathfactor::deficiency::Witness;
use pathfactor::factor::{verify_factor, ExactSolver, Orders, PathFactor};
use pathfactor::reduction::{find_factor_with, FactorOutcome};
use serde::Serialize;

use crate::input::{self, InputArgs};
use crate::stream::{write_json, Body, Context, Problem, Record};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Exhaustive branch-and-bound search.
    Exact,
    /// Deficiency-driven construction; `{2,5}` only.
    Constructive,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Allowed path orders, comma separated.
    #[arg(long, default_value = "2,5")]
    pub orders: Orders,
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    pub method: Method,
}

#[derive(Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
enum Solution {
    Factor { factor: PathFactor },
    None,
    Witness { witness: Witness },
}

#[derive(Serialize)]
struct Solved {
    method: Method,
    orders: String,
    #[serde(flatten)]
    solution: Solution,
}

/// Exit 0 if every graph has a factor, 1 if some graph has none, 2 on errors.
pub fn run(ctx: &Context, args: &SolveArgs, out: &mut impl Write) -> anyhow::Result<i32> {
    if args.method == Method::Constructive && args.orders != Orders::two_and_odd(2) {
        bail!("the constructive method only produces {{2,5}}-factors, got orders {}", args.orders);
    }
    let orders = args.orders.to_string();
    let (mut found, mut missing, mut failed) = (0usize, 0usize, 0usize);
    ctx.run(
        input::open(&args.input)?,
        |item| -> Result<Solved, Problem> {
            let g = ctx.admit(item)?;
            let solution = match args.method {
                Method::Exact => match ExactSolver::new(ctx.solver).find(g, &args.orders)? {
                    Some(factor) => Solution::Factor { factor },
                    None => Solution::None,
                },
                Method::Constructive => match find_factor_with(g, &ctx.sweep)? {
                    FactorOutcome::Factor(factor) => Solution::Factor { factor },
                    FactorOutcome::Witness(witness) => Solution::Witness { witness },
                },
            };
            if let Solution::Factor { factor } = &solution {
                verify_factor(g, factor, &args.orders)
                    .map_err(|e| Problem::Error { error: format!("factor failed verification: {e}") })?;
            }
            Ok(Solved { method: args.method, orders: orders.clone(), solution })
        },
        |item, r, elapsed| {
            match &r {
                Ok(Solved { solution: Solution::Factor { .. }, .. }) => found += 1,
                Ok(_) => missing += 1,
                Err(_) => failed += 1,
            }
            write_json(out, &Record::new(item, Body::from(r), elapsed))?;
            Ok(false)
        },
    )?;
    eprintln!("solve: {found} with factor, {missing} without, {failed} not solved");
    Ok(if failed > 0 {
        2
    } else if missing > 0 {
        1
    } else {
        0
    })
}
