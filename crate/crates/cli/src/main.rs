//! `seqnorm`: exact norm evaluations and inequality checks as JSON reports.
//!
//! Exit codes: 0 success, 1 a check or recheck failed, 2 usage or schema
//! error, 3 a computational cap was exceeded.

mod analysis;
mod evaluate;
mod input;
mod op;
mod report;
mod verify;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use report::{Ctx, Outcome, Report};

#[derive(Parser)]
#[command(name = "seqnorm", version, about = "Exact sequence-space norms and checks")]
struct Cli {
    /// Seed for every randomized sample.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Re-evaluate every witness and fail on any mismatch.
    #[arg(long, global = true)]
    recheck: bool,
    /// Include wall-clock time (makes output non-reproducible).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Norm of a vector in a space given by a spec file.
    Norm(evaluate::NormArgs),
    /// Seminorms: the ladder `‖x‖_i` of X, or a bush seminorm on the tree.
    #[command(subcommand)]
    Seminorm(evaluate::SeminormCmd),
    /// Branch codes, weights and thresholds on the dyadic tree.
    #[command(subcommand)]
    Tree(evaluate::TreeCmd),
    /// Growth diagnostics for admissibility sequences.
    #[command(subcommand)]
    Eq1(evaluate::Eq1Cmd),
    /// Run a named inequality on generated or supplied inputs.
    #[command(subcommand)]
    Verify(verify::VerifyCmd),
    /// Spreading-model estimates.
    #[command(subcommand)]
    Sm(analysis::SmCmd),
    /// Domination constant of one norm over another on `n` coordinates.
    Dominate(analysis::PairArgs),
    /// Basis distance between two norms on `n` coordinates.
    Dbasis(analysis::PairArgs),
    /// Search for blocks close to `ℓ_p^n`.
    Krivine(analysis::KrivineArgs),
    /// The layered model space and the operator `T`.
    #[command(subcommand)]
    Op(op::OpCmd),
}

fn run(cli: &Cli, ctx: &Ctx) -> seqnorm::Result<Outcome> {
    match &cli.command {
        Command::Norm(a) => evaluate::norm(a, ctx),
        Command::Seminorm(c) => evaluate::seminorm(c, ctx),
        Command::Tree(c) => evaluate::tree(c, ctx),
        Command::Eq1(c) => evaluate::eq1(c),
        Command::Verify(c) => verify::run(c, ctx),
        Command::Sm(c) => analysis::sm(c),
        Command::Dominate(a) => analysis::dominate(a, ctx),
        Command::Dbasis(a) => analysis::dbasis(a, ctx),
        Command::Krivine(a) => analysis::krivine(a, ctx),
        Command::Op(c) => op::run(c, ctx),
    }
}

fn exit_code(e: &seqnorm::Error) -> u8 {
    match e {
        seqnorm::Error::Parse(_) | seqnorm::Error::Invalid(_) => 2,
        seqnorm::Error::CapExceeded(_) => 3,
        seqnorm::Error::Witness(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx { seed: cli.seed, recheck: cli.recheck };
    let start = Instant::now();
    let outcome = match run(&cli, &ctx) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("seqnorm: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let ok = outcome.ok();
    let report = Report {
        command: std::env::args().skip(1).collect(),
        inputs: outcome.inputs,
        result: outcome.result,
        passed: outcome.passed,
        recheck: cli.recheck.then_some(outcome.recheck),
        elapsed_ms: cli.timing.then(|| start.elapsed().as_millis()),
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                eprintln!("seqnorm: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if !ok {
        eprintln!("seqnorm: check failed");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
