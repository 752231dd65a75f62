use std::io::Write;

use clap::{Args, ValueEnum};
use pathfactor::deficiency::{check_necessary_with, check_sufficient_with, check_theorem_a_with};
use pathfactor::factor::{verify_factor, ExactSolver, Orders};
use pathfactor::graph::Graph;
use pathfactor::reduction::{find_factor_with, FactorOutcome, ReductionError};
use serde::Serialize;

use crate::input::{self, InputArgs};
use crate::stream::{write_json, Body, Context, Problem, Record};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Assertion {
    /// Sufficient condition holds ⇒ both solvers return a verified {2,5}-factor.
    Theorem1,
    /// A {2,5}-factor exists ⇒ the necessary condition holds.
    PropNecessary,
    /// Isolated-vertex condition holds ⇔ a {2,3}-factor exists.
    FactA,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long = "assert", value_enum)]
    pub assertion: Assertion,
}

#[derive(Serialize)]
struct Checked {
    /// Whether the assertion's premise held (for `fact-a`: the condition).
    premise: bool,
    pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<String>,
}

impl Checked {
    fn pass(premise: bool) -> Self {
        Self { premise, pass: true, detail: None }
    }

    fn fail(premise: bool, detail: impl Into<String>) -> Self {
        Self { premise, pass: false, detail: Some(detail.into()) }
    }
}

#[derive(Debug, Default, Serialize)]
struct Summary {
    assertion: Option<Assertion>,
    graphs: usize,
    premise_held: usize,
    passed: usize,
    failed: usize,
    budget: usize,
    errors: usize,
    malformed: usize,
    first_failure: Option<usize>,
}

fn theorem1(ctx: &Context, g: &Graph) -> Result<Checked, Problem> {
    if !check_sufficient_with(g, &ctx.sweep)?.is_ok() {
        return Ok(Checked::pass(false));
    }
    let orders = Orders::two_and_odd(2);
    match ExactSolver::new(ctx.solver).find(g, &orders)? {
        None => return Ok(Checked::fail(true, "exact solver found no factor")),
        Some(f) => {
            if let Err(e) = verify_factor(g, &f, &orders) {
                return Ok(Checked::fail(true, format!("exact factor invalid: {e}")));
            }
        }
    }
    match find_factor_with(g, &ctx.sweep) {
        Ok(FactorOutcome::Factor(f)) => Ok(match verify_factor(g, &f, &orders) {
            Ok(()) => Checked::pass(true),
            Err(e) => Checked::fail(true, format!("constructed factor invalid: {e}")),
        }),
        Ok(FactorOutcome::Witness(w)) => Ok(Checked::fail(true, format!("construction reported witness {:?}", w.set))),
        Err(ReductionError::Sweep(e)) => Err(e.into()),
        Err(e) => Ok(Checked::fail(true, format!("construction failed: {e}"))),
    }
}

fn prop_necessary(ctx: &Context, g: &Graph) -> Result<Checked, Problem> {
    let orders = Orders::two_and_odd(2);
    let Some(f) = ExactSolver::new(ctx.solver).find(g, &orders)? else {
        return Ok(Checked::pass(false));
    };
    if let Err(e) = verify_factor(g, &f, &orders) {
        return Ok(Checked::fail(true, format!("exact factor invalid: {e}")));
    }
    Ok(match check_necessary_with(g, &ctx.sweep)?.witness() {
        None => Checked::pass(true),
        Some(w) => Checked::fail(true, format!("necessary condition violated at {:?}", w.set)),
    })
}

fn fact_a(ctx: &Context, g: &Graph) -> Result<Checked, Problem> {
    let condition = check_theorem_a_with(g, &ctx.sweep)?.is_ok();
    let orders = Orders::new([2, 3]).expect("valid orders");
    let factor = ExactSolver::new(ctx.solver).find(g, &orders)?;
    if let Some(f) = &factor {
        if let Err(e) = verify_factor(g, f, &orders) {
            return Ok(Checked::fail(condition, format!("exact factor invalid: {e}")));
        }
    }
    Ok(match (condition, factor.is_some()) {
        (true, false) => Checked::fail(true, "condition holds but no {2,3}-factor"),
        (false, true) => Checked::fail(false, "{2,3}-factor exists but condition fails"),
        _ => Checked::pass(condition),
    })
}

/// Stops at the first failed assertion. Exit 1 iff an assertion failed;
/// malformed lines, budget overruns and errors are only counted.
pub fn run(ctx: &Context, args: &SweepArgs, out: &mut impl Write) -> anyhow::Result<i32> {
    let mut summary = Summary { assertion: Some(args.assertion), ..Summary::default() };
    ctx.run(
        input::open(&args.input)?,
        |item| -> Result<Checked, Problem> {
            let g = ctx.admit(item)?;
            match args.assertion {
                Assertion::Theorem1 => theorem1(ctx, g),
                Assertion::PropNecessary => prop_necessary(ctx, g),
                Assertion::FactA => fact_a(ctx, g),
            }
        },
        |item, r, elapsed| {
            let mut stop = false;
            match &r {
                Ok(c) => {
                    summary.graphs += 1;
                    summary.premise_held += c.premise as usize;
                    if c.pass {
                        summary.passed += 1;
                    } else {
                        summary.failed += 1;
                        summary.first_failure = item.origin.line;
                        stop = true;
                    }
                }
                Err(Problem::Malformed { .. }) => summary.malformed += 1,
                Err(Problem::Budget { .. }) => {
                    summary.graphs += 1;
                    summary.budget += 1;
                }
                Err(Problem::Error { .. }) => {
                    summary.graphs += 1;
                    summary.errors += 1;
                }
            }
            write_json(out, &Record::new(item, Body::from(r), elapsed))?;
            Ok(stop)
        },
    )?;
    #[derive(Serialize)]
    struct Wrapped<'a> {
        summary: &'a Summary,
    }
    write_json(out, &Wrapped { summary: &summary })?;
    eprintln!(
        "sweep {}: {} graphs, {} with premise, {} passed, {} failed, {} over budget, {} errors, {} malformed",
        args.assertion.to_possible_value().expect("not skipped").get_name(),
        summary.graphs,
        summary.premise_held,
        summary.passed,
        summary.failed,
        summary.budget,
        summary.errors,
        summary.malformed
    );
    Ok(if summary.failed > 0 { 1 } else { 0 })
}
