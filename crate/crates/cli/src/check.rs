use std::io::Write;

use pathfactor::deficiency::{
    beta_scaled_with, check_necessary_with, check_sufficient_with, check_theorem_a_with, Verdict,
};
use pathfactor::graph::VertexSet;
use serde::Serialize;

use crate::input::{self, InputArgs};
use crate::stream::{write_json, Body, Context, Problem, Record};

#[derive(Serialize)]
struct Checks {
    sufficient: Verdict,
    necessary: Verdict,
    theorem_a: Verdict,
    beta3: Option<i64>,
    beta_set: Option<VertexSet>,
}

/// Exit 0 if every graph satisfies the sufficient condition, 1 if some graph
/// violates it, 2 if some graph could not be checked.
pub fn run(ctx: &Context, args: &InputArgs, out: &mut impl Write) -> anyhow::Result<i32> {
    let (mut holds, mut violated, mut failed) = (0usize, 0usize, 0usize);
    ctx.run(
        input::open(args)?,
        |item| -> Result<Checks, Problem> {
            let g = ctx.admit(item)?;
            let beta = beta_scaled_with(g, &ctx.sweep)?;
            Ok(Checks {
                sufficient: check_sufficient_with(g, &ctx.sweep)?,
                necessary: check_necessary_with(g, &ctx.sweep)?,
                theorem_a: check_theorem_a_with(g, &ctx.sweep)?,
                beta3: beta.beta3,
                beta_set: beta.argmax_set,
            })
        },
        |item, r, elapsed| {
            match &r {
                Ok(c) if c.sufficient.is_ok() => holds += 1,
                Ok(_) => violated += 1,
                Err(_) => failed += 1,
            }
            write_json(out, &Record::new(item, Body::from(r), elapsed))?;
            Ok(false)
        },
    )?;
    eprintln!("check: {holds} hold, {violated} violated, {failed} not checked");
    Ok(if failed > 0 {
        2
    } else if violated > 0 {
        1
    } else {
        0
    })
}
