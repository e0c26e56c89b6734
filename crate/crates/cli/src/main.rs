//! Command-line front end for the QA-corpus balancing toolkit.
//!
//! Exit codes: 0 on success (including `--help`/`--version`), 1 on
//! validation failures (bad flags, bad parameters, records that violate the
//! data model), 2 on I/O and parse errors (unreadable files, malformed
//! JSON). Every randomized command requires a seed and echoes it in its
//! output provenance; rerunning any command with identical inputs and flags
//! produces byte-identical output files.

mod commands;
mod config;
mod emit;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use commands::{audit, compare, contrast, fusion_check, plan, score, split};

#[derive(Debug, Parser)]
#[command(
    name = "avqa",
    version,
    about = "Audit, balance, split, and score template-based audio-visual QA corpora"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report per-template answer distributions and bias flags.
    Audit(audit::AuditArgs),
    /// Compare dominant shares before and after a corpus change.
    Compare(compare::CompareArgs),
    /// Produce balancing plans (deficits, audio swaps, flips, generation).
    #[command(subcommand)]
    Plan(plan::PlanCommand),
    /// Build the deterministic five-way split.
    Split(split::SplitArgs),
    /// Score predictions into the per-category accuracy table.
    Score(score::ScoreArgs),
    /// Mine contrasting binary pairs and score them pairwise.
    Contrast(contrast::ContrastArgs),
    /// Verify the cross-attention reference math on a feature-map pair.
    FusionCheck(fusion_check::FusionCheckArgs),
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(error) => {
            let code = match error.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = error.print();
            return code;
        }
    };

    let result = match &cli.command {
        Command::Audit(args) => audit::run(args),
        Command::Compare(args) => compare::run(args),
        Command::Plan(command) => plan::run(command),
        Command::Split(args) => split::run(args),
        Command::Score(args) => score::run(args),
        Command::Contrast(args) => contrast::run(args),
        Command::FusionCheck(args) => fusion_check::run(args),
    };

    match result {
        Ok(()) => 0,
        Err(error) => {
            eprintln!("error: {error:#}");
            exit_code_for(&error)
        }
    }
}

/// Maps an error chain to the exit-code contract: unreadable or
/// unparseable inputs are 2, everything else (validation) is 1.
fn exit_code_for(error: &anyhow::Error) -> i32 {
    for cause in error.chain() {
        if let Some(ingest) = cause.downcast_ref::<avqa_core::ingest::IngestError>() {
            return if ingest.is_read_or_parse() { 2 } else { 1 };
        }
        if cause.downcast_ref::<std::io::Error>().is_some()
            || cause.downcast_ref::<serde_json::Error>().is_some()
        {
            return 2;
        }
    }
    1
}
