use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qdi::experiment::{Command, Experiment, Overrides};

#[derive(Parser)]
#[command(name = "qdi", version, about = "Deterministic identification codes over classical-quantum channels")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate the Minkowski dimension of the output set.
    Dimension(RunArgs),
    /// Build codes and record their exact errors.
    Build(RunArgs),
    /// Recompute the errors of a saved code and check its bounds.
    Verify(RunArgs),
    /// Check the hypothesis-testing bound on random word pairs.
    CheckLemma2(RunArgs),
    /// Rate and error sweep over block lengths.
    Sweep(RunArgs),
    /// Compare measured-classical and quantum dimension estimates.
    SimCompare(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    cap: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (command, args) = match cli.command {
        Cmd::Dimension(a) => (Command::Dimension, a),
        Cmd::Build(a) => (Command::Build, a),
        Cmd::Verify(a) => (Command::Verify, a),
        Cmd::CheckLemma2(a) => (Command::CheckLemma2, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::SimCompare(a) => (Command::SimCompare, a),
    };
    let overrides = Overrides {
        seed: args.seed,
        out: args.out,
        cap: args.cap,
    };
    let result = Experiment::load(&args.config, &overrides).and_then(|exp| exp.run(command));
    match result {
        Ok(outcome) => {
            for note in &outcome.notes {
                eprintln!("{note}");
            }
            for f in &outcome.files {
                println!("{}", f.display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
