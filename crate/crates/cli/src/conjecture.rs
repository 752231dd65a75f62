use std::io::Write;

use anyhow::bail;
use clap::Args;
use pathfactor::deficiency::{check_family_bound_with, FamilyBound, Witness};
use pathfactor::factor::{ExactSolver, Orders};
use serde::Serialize;

use crate::input::{self, InputArgs};
use crate::stream::{write_json, Body, Context, Problem, Record};

#[derive(Debug, Args)]
pub struct ConjectureArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Path order parameter: factors use orders 2 and 2k+1.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
}

#[derive(Serialize)]
struct Explored {
    hypothesis: bool,
    /// Subset where the hypothesis fails.
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<Witness>,
    /// Only searched when the hypothesis holds.
    #[serde(skip_serializing_if = "Option::is_none")]
    factor: Option<bool>,
    candidate: bool,
}

#[derive(Default, Serialize)]
struct Summary {
    k: usize,
    graphs: usize,
    hypothesis_held: usize,
    candidates: Vec<usize>,
    budget: usize,
    malformed: usize,
}

/// Lists graphs that satisfy the conjectured hypothesis but have no
/// {P2, P(2k+1)}-factor. Candidates are reported, not treated as failures:
/// exit 0 unless the arguments are invalid.
pub fn run(ctx: &Context, args: &ConjectureArgs, out: &mut impl Write) -> anyhow::Result<i32> {
    if args.k < 3 || args.k % 3 != 0 {
        bail!("--k must be at least 3 and divisible by 3, got {}", args.k);
    }
    let bound = FamilyBound::conjecture(args.k);
    let orders = Orders::two_and_odd(args.k);
    let mut summary = Summary { k: args.k, ..Summary::default() };
    ctx.run(
        input::open(&args.input)?,
        |item| -> Result<Explored, Problem> {
            let g = ctx.admit(item)?;
            let report = check_family_bound_with(g, &bound, &ctx.sweep)?;
            if !report.holds() {
                return Ok(Explored { hypothesis: false, witness: Some(report.witness), factor: None, candidate: false });
            }
            let factor = ExactSolver::new(ctx.solver).find(g, &orders)?.is_some();
            Ok(Explored { hypothesis: true, witness: None, factor: Some(factor), candidate: !factor })
        },
        |item, r, elapsed| {
            match &r {
                Ok(e) => {
                    summary.graphs += 1;
                    summary.hypothesis_held += e.hypothesis as usize;
                    if e.candidate {
                        summary.candidates.extend(item.origin.line);
                    }
                }
                Err(Problem::Malformed { .. }) => summary.malformed += 1,
                Err(_) => {
                    summary.graphs += 1;
                    summary.budget += 1;
                }
            }
            write_json(out, &Record::new(item, Body::from(r), elapsed))?;
            Ok(false)
        },
    )?;
    #[derive(Serialize)]
    struct Wrapped<'a> {
        summary: &'a Summary,
    }
    write_json(out, &Wrapped { summary: &summary })?;
    eprintln!(
        "conjecture k={}: {} graphs, {} satisfy the hypothesis, {} candidates",
        args.k,
        summary.graphs,
        summary.hypothesis_held,
        summary.candidates.len()
    );
    Ok(0)
}
