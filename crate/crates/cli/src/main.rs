mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;
use commands::Failure;

/// Sizes the global thread pool from `QINFO_THREADS` when set.
fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("QINFO_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("QINFO_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| commands::run(&cli.run, &cli.command));
    let failure = match result {
        Ok(rendered) => match output::emit(&rendered.text, cli.run.output.as_deref()) {
            Ok(()) => rendered.failure,
            Err(e) => Some(Failure::Io(format!("cannot write output: {e}"))),
        },
        Err(f) => Some(f),
    };
    match failure {
        None => ExitCode::SUCCESS,
        Some(f) => {
            eprintln!("qinfo: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
