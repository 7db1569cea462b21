//! `curvreal`: realize, check, and classify curvature models from JSON documents.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "curvreal", version, about = "Exact jet-level realization of algebraic curvature operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the connection for a model, verify it, and write it out.
    Realize(RealizeArgs),
    /// Re-run the verifier on a stored Christoffel document.
    Check(CheckArgs),
    /// Report the curvature classes and Ricci data of a model's operator.
    Classify(ClassifyArgs),
    /// Generate a deterministic random model document.
    RandomModel(RandomModelArgs),
}

#[derive(Args)]
pub struct RealizeArgs {
    /// Model document.
    pub model: PathBuf,
    /// Truncation order N; defaults to the document's order, then 4.
    #[arg(long)]
    pub order: Option<u32>,
    /// Where to write the Christoffel document (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Where to write the realization report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Realize and verify without writing the Christoffel document.
    #[arg(long)]
    pub check_only: bool,
}

#[derive(Args)]
pub struct CheckArgs {
    /// Christoffel document.
    pub christoffel: PathBuf,
    /// Model document the connection should realize.
    pub model: PathBuf,
    /// Where to write the verdict document (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct ClassifyArgs {
    /// Model document.
    pub model: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct RandomModelArgs {
    #[arg(long)]
    pub dim: usize,
    /// Signature as `p,q` with p timelike directions; defaults to `0,dim`.
    #[arg(long, value_parser = parse_signature)]
    pub signature: Option<(usize, usize)>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Order stored in the document's options.
    #[arg(long)]
    pub order: Option<u32>,
    /// Remove the antisymmetric Ricci part.
    #[arg(long)]
    pub ricci_symmetric: bool,
    /// Remove the symmetric Ricci part.
    #[arg(long)]
    pub ricci_antisymmetric: bool,
    /// Remove the scalar curvature.
    #[arg(long)]
    pub traceless: bool,
    /// Add a random quadratic perturbation to the flat metric.
    #[arg(long)]
    pub curved: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_signature(s: &str) -> Result<(usize, usize), String> {
    let (p, q) = s.split_once(',').ok_or_else(|| format!("expected p,q, got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((parse(p)?, parse(q)?))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Realize(args) => commands::realize(&args),
        Command::Check(args) => commands::check(&args),
        Command::Classify(args) => commands::classify(&args),
        Command::RandomModel(args) => commands::random_model(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commands::Failure;

    #[test]
    fn signature_flag() {
        assert_eq!(parse_signature("1,3"), Ok((1, 3)));
        assert!(parse_signature("13").is_err());
        assert!(parse_signature("a,3").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            Failure::Io(anyhow::anyhow!("x")).exit_code(),
            Failure::Validation("x".into()).exit_code(),
            Failure::Verification("x".into()).exit_code(),
            Failure::Internal("x".into()).exit_code(),
        ];
        let mut sorted = codes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 4);
        assert!(!codes.contains(&0));
    }
}
