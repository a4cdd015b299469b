mod args;
mod run;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use ctp_core::Error;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot start {threads} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Route(a) => run::route(a),
        Command::Centrality(a) => run::centrality(a),
        Command::Elicit(a) => run::elicit(a),
        Command::Simulate(a) => run::simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::TooManyUncertainEdges { .. }) => {
            eprintln!("error: {e}");
            eprintln!("hint: use --method mc --policy replan, or raise --cap");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
