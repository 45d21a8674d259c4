// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use dgramsey_cli::{load_config, run, Command, Overrides};

const AFTER_HELP: &str = "\
Artifacts (written to --out):
  validate   validate.json
  fold       embedding.json, fold.csv (fold,isometric,min_radius)
  count      count.json, count.csv (lambda,value,std_error,samples,seed)
  c0         c0.json
  gvn        gvn.json
  u1         u1.json, u1.csv (l,u1,boundary)
  spectrum   spectrum.json, spectrum.csv (r_lo,r_hi,mass)
  localize   localize.json, localize.csv (level,energy,exceptional_fraction), aggregate.json
  scan       scan.json, scan.csv (lambda,found,witness_file), witness_NNNN.json
  threshold  threshold.json
  corollary  corollary.json

Exit codes: 0 success, 1 error, 2 hypothesis not met.";

/// Distance-graph Ramsey experiments on grid sets.
#[derive(Debug, Parser)]
#[command(name = "dgramsey", version, after_help = AFTER_HELP)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// RNG seed; overrides the config value.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores). Never changes the output.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rotation budget for scan/threshold.
    #[arg(long)]
    budget: Option<usize>,
    /// Snap tolerance for scan/threshold.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Anchor stride for scan/threshold.
    #[arg(long)]
    stride: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors share the generic error code; 2 is reserved.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let overrides = Overrides {
        seed: cli.seed,
        workers: cli.workers,
        out: cli.out,
        budget: cli.budget,
        tolerance: cli.tolerance,
        stride: cli.stride,
    };
    let result = load_config(cli.command, &cli.config, &overrides).and_then(|c| run(&c));
    match result {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
