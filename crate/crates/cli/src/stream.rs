use std::io::Write;
use std::time::{Duration, Instant};

use pathfactor::deficiency::{SweepConfig, SweepError};
use pathfactor::factor::{SolveError, SolverConfig};
use pathfactor::graph::Graph;
use pathfactor::reduction::ReductionError;
use rayon::prelude::*;
use rayon::ThreadPool;
use serde::Serialize;

use crate::input::{Item, Items, Origin};

/// Items handed to the pool at once. Fixed so that output never depends on
/// the worker count.
const CHUNK: usize = 256;

pub struct Context {
    pub pool: ThreadPool,
    pub sweep: SweepConfig,
    pub solver: SolverConfig,
    pub max_n: usize,
    pub timings: bool,
}

impl Context {
    /// The graph of `item`, or the reason it cannot be processed.
    pub fn admit<'a>(&self, item: &'a Item) -> Result<&'a Graph, Problem> {
        let g = item.graph.as_ref().map_err(|e| Problem::Malformed { error: e.clone() })?;
        if g.order() > self.max_n {
            return Err(Problem::Budget { error: format!("order {} exceeds --max-n {}", g.order(), self.max_n) });
        }
        Ok(g)
    }

    /// Runs `work` over `items` in parallel chunks and hands results to `emit`
    /// in input order. `emit` returns `true` to stop the stream.
    pub fn run<R: Send>(
        &self,
        items: Items,
        work: impl Fn(&Item) -> R + Sync,
        mut emit: impl FnMut(&Item, R, Option<Duration>) -> anyhow::Result<bool>,
    ) -> anyhow::Result<()> {
        let mut items = items.peekable();
        while items.peek().is_some() {
            let chunk = items.by_ref().take(CHUNK).collect::<Result<Vec<Item>, _>>()?;
            let results: Vec<(R, Duration)> = self.pool.install(|| {
                chunk
                    .par_iter()
                    .map(|item| {
                        let start = Instant::now();
                        let r = work(item);
                        (r, start.elapsed())
                    })
                    .collect()
            });
            for (item, (r, elapsed)) in chunk.iter().zip(results) {
                if emit(item, r, self.timings.then_some(elapsed))? {
                    return Ok(());
                }
            }
        }
        Ok(())
    }
}

/// Why a graph produced no result.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Problem {
    Malformed { error: String },
    Budget { error: String },
    Error { error: String },
}

impl From<SweepError> for Problem {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::BudgetExceeded { .. } => Problem::Budget { error: e.to_string() },
            SweepError::InvalidBound => Problem::Error { error: e.to_string() },
        }
    }
}

impl From<SolveError> for Problem {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::BudgetExhausted(_) | SolveError::TooLarge(_) => Problem::Budget { error: e.to_string() },
            _ => Problem::Error { error: e.to_string() },
        }
    }
}

impl From<ReductionError> for Problem {
    fn from(e: ReductionError) -> Self {
        match e {
            ReductionError::Sweep(inner) => inner.into(),
            _ => Problem::Error { error: e.to_string() },
        }
    }
}

/// One JSON-lines record: origin, graph order, then the command's body.
#[derive(Serialize)]
pub struct Record<'a, B: Serialize> {
    #[serde(flatten)]
    pub origin: &'a Origin,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(flatten)]
    pub body: B,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
}

impl<'a, B: Serialize> Record<'a, B> {
    pub fn new(item: &'a Item, body: B, elapsed: Option<Duration>) -> Self {
        Self {
            origin: &item.origin,
            n: item.graph.as_ref().ok().map(Graph::order),
            body,
            elapsed_ms: elapsed.map(|d| d.as_secs_f64() * 1e3),
        }
    }
}

/// Body that is either a computed result (`status: ok`) or a problem.
#[derive(Serialize)]
#[serde(untagged)]
pub enum Body<T: Serialize> {
    Done(Done<T>),
    Problem(Problem),
}

#[derive(Serialize)]
pub struct Done<T: Serialize> {
    status: &'static str,
    #[serde(flatten)]
    value: T,
}

impl<T: Serialize> From<Result<T, Problem>> for Body<T> {
    fn from(r: Result<T, Problem>) -> Self {
        match r {
            Ok(value) => Body::Done(Done { status: "ok", value }),
            Err(p) => Body::Problem(p),
        }
    }
}

pub fn write_json(out: &mut impl Write, value: &impl Serialize) -> anyhow::Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    out.write_all(b"\n")?;
    Ok(())
}
