//! `tropicorr` command-line front end.
//!
//! Exit codes: 0 on success, 1 on a domain error (the report carries a stable
//! error code), 2 when the input cannot be read or parsed.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Info,
    Stabilize,
    Tr,
    Fan,
    Complex,
    Regular,
    Count,
    CountElliptic,
    Stacky,
    ReductionData,
}

impl Command {
    fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GroupArg {
    #[value(name = "Z")]
    Z,
    #[value(name = "Q")]
    Q,
    #[value(name = "Fp")]
    Fp,
    #[value(name = "kstar")]
    Kstar,
}

/// Exact combinatorics of tropical correspondence theorems.
///
/// Infinite vertices are ordered as listed in the curve file; constraint `i`
/// binds to the `i`-th infinite vertex.
#[derive(Debug, Parser)]
#[command(name = "tropicorr", version)]
pub struct Cli {
    pub command: Command,
    /// Curve file (schema `tropicorr/1`).
    pub input: PathBuf,
    /// Emit the JSON report instead of text.
    #[arg(long)]
    pub json: bool,
    /// Residue characteristic; defaults to the file's `char`, else 0.
    #[arg(long = "char", value_name = "P")]
    pub char_p: Option<u64>,
    /// Coefficient group for `complex` and `regular`.
    #[arg(long, value_enum)]
    pub group: Option<GroupArg>,
    /// Use the constraints from the file.
    #[arg(long)]
    pub constrained: bool,
    /// Add the j-invariant row (genus one only).
    #[arg(long)]
    pub elliptic: bool,
    /// Base change order for `stacky`; defaults to the least reduced one.
    #[arg(long, value_name = "A")]
    pub a: Option<u64>,
    /// Write the curve file (`stabilize`, `tr`) or the report (other commands) here.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub enum Failure {
    Parse(String),
    Domain { code: String, message: String, result: Option<Value> },
}

impl Failure {
    pub fn domain(code: impl Into<String>, message: impl ToString) -> Self {
        Failure::Domain { code: code.into(), message: message.to_string(), result: None }
    }
}

pub struct Outcome {
    pub result: Value,
    pub warnings: Vec<String>,
    /// Curve file produced by `stabilize` / `tr`.
    pub curve_file: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let bytes = match std::fs::read(&cli.input) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.input.display());
            return ExitCode::from(2);
        }
    };
    let digest = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8_lossy(&bytes);
    let mut report = json!({ "command": cli.command.name(), "input_digest": digest });
    let code = match commands::run(&cli, &text) {
        Ok(out) => {
            report["result"] = out.result;
            report["warnings"] = json!(out.warnings);
            if let (Some(path), Some(curve)) = (&cli.out, &out.curve_file) {
                if let Err(e) = std::fs::write(path, curve) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            0
        }
        Err(Failure::Parse(msg)) => {
            report["error"] = json!({ "code": "ParseError", "message": msg });
            report["warnings"] = json!([]);
            2
        }
        Err(Failure::Domain { code, message, result }) => {
            if let Some(r) = result {
                report["result"] = r;
            }
            report["error"] = json!({ "code": code, "message": message });
            report["warnings"] = json!([]);
            1
        }
    };
    let rendered = if cli.json {
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    } else {
        render::text(&report)
    };
    match (&cli.out, cli.command) {
        (Some(path), c) if !matches!(c, Command::Stabilize | Command::Tr) => {
            if let Err(e) = std::fs::write(path, &rendered) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        _ => print!("{rendered}"),
    }
    ExitCode::from(code)
}
