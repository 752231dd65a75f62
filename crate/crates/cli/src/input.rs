use std::fs::File;
use std::io::{self, BufRead, BufReader};
use std::path::PathBuf;

use anyhow::Context as _;
use clap::Args;
use pathfactor::extremal::FamilySpec;
use pathfactor::graph::Graph;
use pathfactor::graph6::{parse_graph6, to_graph6};
use serde::Serialize;

#[derive(Debug, Args)]
pub struct InputArgs {
    /// A single graph in graph6 format.
    #[arg(conflicts_with_all = ["family", "input"])]
    pub graph6: Option<String>,
    /// Generated graph, e.g. `cycle:5`, `Hn:2`, `Hprime:3,1`, `random:8,1/2,7`.
    #[arg(long, conflicts_with = "input")]
    pub family: Option<FamilySpec>,
    /// File with one graph6 string per line (stdin if no input is given).
    #[arg(long, short)]
    pub input: Option<PathBuf>,
}

/// Where a graph came from, printed at the head of every record.
#[derive(Debug, Clone, Serialize)]
pub struct Origin {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    pub graph6: String,
}

#[derive(Debug)]
pub struct Item {
    pub origin: Origin,
    pub graph: Result<Graph, String>,
}

impl Item {
    fn from_line(line: usize, text: &str) -> Self {
        let text = text.trim();
        Self {
            origin: Origin { line: Some(line), family: None, graph6: text.to_string() },
            graph: parse_graph6(text).map_err(|e| e.to_string()),
        }
    }
}

pub type Items = Box<dyn Iterator<Item = io::Result<Item>>>;

/// Blank lines in streams are skipped; a positional argument is always one
/// item, even when empty.
pub fn open(args: &InputArgs) -> anyhow::Result<Items> {
    if let Some(text) = &args.graph6 {
        return Ok(Box::new(std::iter::once(Ok(Item::from_line(1, text)))));
    }
    if let Some(spec) = &args.family {
        let g = spec.generate()?;
        let origin = Origin { line: None, family: Some(spec.to_string()), graph6: to_graph6(&g) };
        return Ok(Box::new(std::iter::once(Ok(Item { origin, graph: Ok(g) }))));
    }
    let reader: Box<dyn BufRead> = match &args.input {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
            Box::new(BufReader::new(file))
        }
        None => Box::new(io::stdin().lock()),
    };
    Ok(Box::new(reader.lines().enumerate().filter_map(|(i, line)| match line {
        Ok(text) if text.trim().is_empty() => None,
        Ok(text) => Some(Ok(Item::from_line(i + 1, &text))),
        Err(e) => Some(Err(e)),
    })))
}
