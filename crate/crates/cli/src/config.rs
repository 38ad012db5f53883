use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::Deserialize;

use matkowski::families::{FamilyError, FamilyParams, FamilyTag};
use matkowski::Interval;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Build,
    Verify,
    Invariance,
    Reduce,
    Classify,
    Demo,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Build, verify and classify solutions of the Matkowski-mean functional equation.
#[derive(Clone, Debug, Parser)]
#[command(name = "matkowski", version)]
pub struct CommandConfig {
    #[arg(long, value_enum)]
    pub command: Command,
    /// JSON family parameters or generator triple.
    #[arg(long = "input")]
    pub input_path: Option<PathBuf>,
    /// Points per grid axis.
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u32).range(8..))]
    pub grid_n: u32,
    /// Pass threshold for every residual.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long = "output")]
    pub output_path: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for random parameter draws.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Family to draw at random when no input file is given.
    #[arg(long)]
    pub tag: Option<FamilyTag>,
}

/// Three generator pairs `(m, n, k)` named from the built-in catalog.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleSpec {
    pub m: [String; 2],
    pub n: [String; 2],
    pub k: [String; 2],
    pub domain: Interval,
}

impl TripleSpec {
    pub fn classical() -> Self {
        let s = |a: &str| [a.to_string(), a.to_string()];
        TripleSpec { m: s("ln"), n: s("id"), k: s("neg_reciprocal"), domain: Interval::new(0.5, 4.0).unwrap() }
    }
}

#[derive(Clone, Debug)]
pub enum Input {
    Family(FamilyParams),
    Triple(TripleSpec),
}

/// Parse an input document; objects with a `tag` key are family parameters.
pub fn parse_input(text: &str) -> Result<Input, String> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if v.get("tag").is_some() {
        FamilyParams::from_json(text).map(Input::Family).map_err(|e: FamilyError| e.to_string())
    } else {
        serde_json::from_value(v).map(Input::Triple).map_err(|e| format!("generator triple: {e}"))
    }
}
