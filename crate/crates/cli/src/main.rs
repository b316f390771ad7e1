//! `qpdrive` command-line front end.

mod commands;
mod config;
mod io;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{AnalyzeArgs, DecomposeArgs, EvalArgs, FrequenciesArgs, ReconstructArgs, SynthArgs};
use config::{GlobalArgs, Precision, Settings};

/// Reconstruct quasiperiodically driven dynamics from a multichannel time series.
#[derive(Debug, Parser)]
#[command(name = "qpdrive", version, about)]
struct Cli {
    #[command(flatten)]
    globals: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every stage on a CSV series and write a model file.
    Analyze(AnalyzeArgs),
    /// Report the selected eigenfrequencies of a model or of raw data.
    Frequencies(FrequenciesArgs),
    /// Report the periodic/chaotic decomposition stored in a model.
    Decompose(DecomposeArgs),
    /// Iterate a model forward and optionally score it against a reference.
    Reconstruct(ReconstructArgs),
    /// Generate a synthetic driven series with known frequencies.
    Synth(SynthArgs),
    /// Amplitude-normalized moving-average error between two CSV series.
    Eval(EvalArgs),
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let settings = Settings::resolve(&cli.globals)?;
    match (&cli.command, settings.precision) {
        (Command::Analyze(a), Precision::F64) => commands::analyze::<f64>(&settings, a),
        (Command::Analyze(a), Precision::F32) => commands::analyze::<f32>(&settings, a),
        (Command::Reconstruct(a), Precision::F64) => commands::reconstruct::<f64>(&settings, a),
        (Command::Reconstruct(a), Precision::F32) => commands::reconstruct::<f32>(&settings, a),
        (Command::Frequencies(a), _) => commands::frequencies(&settings, a),
        (Command::Decompose(a), _) => commands::decompose(&settings, a),
        (Command::Synth(a), _) => commands::synth(&settings, a),
        (Command::Eval(a), _) => commands::eval(&settings, a),
    }
}

/// The error chain on one line, skipping causes already quoted by their parent.
fn describe(err: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in err.chain() {
        let s = cause.to_string();
        if !msg.contains(&s) {
            if !msg.is_empty() {
                msg.push_str(": ");
            }
            msg.push_str(&s);
        }
    }
    msg
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", describe(&err));
            ExitCode::FAILURE
        }
    }
}
