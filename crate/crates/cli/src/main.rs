//! `dotalg`: run the diagram pipeline on programs, queries and attack trees.

mod commands;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dotalg::decomposition::TdMode;
use dotalg::diagram::DEFAULT_UNFOLD_CAP;
use dotalg::inference::{InferenceMethod, DEFAULT_PRECISION_CAP};
use dotalg::Error;

#[derive(Parser)]
#[command(name = "dotalg", version, about = "Compile and evaluate dot diagrams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the parsed program or the hierarchical diagram it denotes.
    Parse(Common),
    /// DOT rendering of a node's primal graph or dependency hypergraph.
    Graph {
        #[command(flatten)]
        common: Common,
        /// Render the dependency hypergraph instead of the primal graph.
        #[arg(long)]
        hypergraph: bool,
    },
    /// Tree and branch decomposition of one node.
    Decompose(Common),
    /// Hypergraph term for the whole hierarchy, with width measurements.
    Algebraise(Common),
    /// Arithmetic circuit over the chosen semiring, as JSON.
    Compile {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        semiring: Option<SemiringArg>,
    },
    /// Probability that a closed program returns true, to `--digits` bits.
    Infer {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 30)]
        digits: u32,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        #[arg(long, default_value_t = DEFAULT_PRECISION_CAP)]
        precision_cap: u32,
    },
    /// Evaluate the algebraised term under a semiring interpretation.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        semiring: Option<SemiringArg>,
    },
    /// Brute-force reference answer, computed without the pipeline.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        semiring: Option<SemiringArg>,
    },
    /// Shape parameters of every node and the width bounds achieved.
    Stats(Common),
}

#[derive(Args, Clone)]
pub struct Common {
    /// Input file: `.dpp` program, `.cq` query, or JSON attack tree / diagram.
    pub input: PathBuf,
    /// Root function of a program.
    #[arg(long = "fn")]
    pub function: Option<String>,
    /// Node of the hierarchy to inspect (defaults to the root).
    #[arg(long)]
    pub node: Option<String>,
    /// Relational instance (CSV) for a query.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::Heuristic)]
    pub mode: ModeArg,
    /// Seed for random interpretations of bare diagrams.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest number of assignments the oracle may unfold a program into.
    #[arg(long, default_value_t = DEFAULT_UNFOLD_CAP)]
    pub max_unfold: usize,
    /// Machine-readable output.
    #[arg(long)]
    pub json: bool,
    /// Graphviz output where available.
    #[arg(long)]
    pub dot: bool,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Heuristic,
    Exact,
}

impl From<ModeArg> for TdMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Heuristic => TdMode::Heuristic,
            ModeArg::Exact => TdMode::Exact,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SemiringArg {
    Rational,
    Bool,
    Tropical,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Auto,
    Exact,
    Truncated,
}

impl From<MethodArg> for InferenceMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => InferenceMethod::Auto,
            MethodArg::Exact => InferenceMethod::Exact,
            MethodArg::Truncated => InferenceMethod::Truncated,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } => 2,
        Error::Validation(_) | Error::InterfaceMismatch(_) => 3,
        Error::ResourceLimit(_) => 4,
        Error::UnresolvedAcceptance { .. } => 5,
        _ => 1,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse { .. } => "parse",
        Error::Validation(_) => "validation",
        Error::InterfaceMismatch(_) => "interface_mismatch",
        Error::Precondition(_) => "precondition",
        Error::InvalidInput(_) => "invalid_input",
        Error::ResourceLimit(_) => "resource_limit",
        Error::MissingSymbol(_) => "missing_symbol",
        Error::DimensionMismatch(_) => "dimension_mismatch",
        Error::UnresolvedAcceptance { .. } => "unresolved_acceptance",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
        Error::Csv(_) => "csv",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = match &cli.command {
        Command::Parse(c) | Command::Decompose(c) | Command::Algebraise(c) | Command::Stats(c) => {
            c.json
        }
        Command::Graph { common, .. }
        | Command::Compile { common, .. }
        | Command::Infer { common, .. }
        | Command::Eval { common, .. }
        | Command::Oracle { common, .. } => common.json,
    };
    let result = match cli.command {
        Command::Parse(c) => commands::parse(&c),
        Command::Graph { common, hypergraph } => commands::graph(&common, hypergraph),
        Command::Decompose(c) => commands::decompose(&c),
        Command::Algebraise(c) => commands::algebraise(&c),
        Command::Compile { common, semiring } => commands::compile(&common, semiring),
        Command::Infer {
            common,
            digits,
            method,
            precision_cap,
        } => commands::infer(&common, digits, method.into(), precision_cap),
        Command::Eval { common, semiring } => commands::eval(&common, semiring),
        Command::Oracle { common, semiring } => commands::oracle(&common, semiring),
        Command::Stats(c) => commands::stats(&c),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            if !out.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if json {
                let v = serde_json::json!({ "error": error_kind(&e), "message": e.to_string() });
                eprintln!("{v}");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
