use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ntband::commands;
use ntband::{CliError, CliOverrides, RunConfig};

/// No-transaction band portfolio simulator.
#[derive(Parser)]
#[command(name = "ntband", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print optimal weights and band coefficients; write band_table.json.
    Weights(Common),
    /// Run an ensemble; write summary.csv.
    Simulate(Common),
    /// Difference of two ensembles (first config minus second); write difference.csv.
    Compare(Common),
    /// Trace one path; write trades.csv and series.csv.
    Trades(Common),
}

#[derive(Args)]
struct Common {
    /// Config file (TOML, or a JSON manifest). `compare` takes it twice.
    #[arg(long = "config", required = true, num_args = 1)]
    config: Vec<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of paths in an ensemble.
    #[arg(long)]
    paths: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Suppress the stdout summary.
    #[arg(long)]
    quiet: bool,
}

impl Common {
    fn load(&self) -> Result<Vec<RunConfig>, CliError> {
        let overrides =
            CliOverrides { out: self.out.clone(), seed: self.seed, paths: self.paths, workers: self.workers };
        self.config
            .iter()
            .map(|p| {
                let mut cfg = RunConfig::load(p)?;
                cfg.apply(&overrides);
                Ok(cfg)
            })
            .collect()
    }

    fn single(&self) -> Result<RunConfig, CliError> {
        match self.load()?.as_slice() {
            [cfg] => Ok(cfg.clone()),
            _ => Err(CliError::Config("expected exactly one --config".into())),
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Weights(c) => commands::cmd_weights(&c.single()?, c.quiet),
        Command::Simulate(c) => commands::cmd_simulate(&c.single()?, c.quiet),
        Command::Trades(c) => commands::cmd_trades(&c.single()?, c.quiet),
        Command::Compare(c) => match c.load()?.as_slice() {
            [a, b] => commands::cmd_compare(a, b, c.quiet),
            _ => Err(CliError::Config("compare needs exactly two --config files".into())),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
