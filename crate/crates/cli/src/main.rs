#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod output;
mod suites;

use std::process::ExitCode;

use clap::Parser;
use mangoldt::geodesic::DistanceOptions;

use args::Cli;
use commands::Context;
use output::{Artifacts, CliError, CliResult};

fn execute(cli: Cli) -> CliResult<bool> {
    let g = cli.global;
    if let Some(n) = g.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let mut opts = DistanceOptions::default();
    if let Some(tol) = g.tol {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(CliError::Usage(format!("--tol must lie in (0, 1), got {tol}")));
        }
        opts = opts.with_tol(tol);
    }
    let mut ctx = Context {
        model_name: g.model,
        model_file: g.model_file,
        seed: g.seed,
        horizon: g.horizon,
        opts,
        artifacts: Artifacts::new(g.out_dir),
    };
    let passed = commands::run(cli.command, &mut ctx)?;
    for path in ctx.artifacts.flush()? {
        println!("wrote {}", path.display());
    }
    Ok(passed)
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
