use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use homog::cli::{run, CliInvocation, Subcommand};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Solve,
    Scaling,
    Distribution,
    FieldCheck,
    Green,
}

/// Homogenization fluctuation studies for semilinear elliptic equations.
#[derive(Debug, Parser)]
#[command(version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// JSON study configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, env = "HOMOG_THREADS")]
    threads: Option<usize>,
    /// Overrides base_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Exit with status 4 when an acceptance band is violated.
    #[arg(long = "assert")]
    assert_bands: bool,
    /// Dotted-path override, e.g. model.amplitude=0.25.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let subcommand = match args.command {
        Command::Solve => Subcommand::Solve,
        Command::Scaling => Subcommand::Scaling,
        Command::Distribution => Subcommand::Distribution,
        Command::FieldCheck => Subcommand::FieldCheck,
        Command::Green => Subcommand::Green,
    };
    let inv = CliInvocation {
        subcommand,
        config_path: args.config,
        out_dir: args.out,
        overrides: args.overrides,
        threads: args.threads,
        seed: args.seed,
        assert_bands: args.assert_bands,
    };
    ExitCode::from(run(&inv) as u8)
}
