//! `evprofile`: batch front end for ingestion, extraction, featurization
//! and the profiling experiments.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// Exit code for artifacts written by another format version.
const EXIT_VERSION: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(cli.log_level()))
        .format_timestamp(None)
        .init();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let core = err
                .chain()
                .find_map(|e| e.downcast_ref::<evprofile::Error>());
            let code = core.map_or("error", evprofile::Error::code);
            let msg = format!("{err:#}").replace('\n', " ");
            eprintln!("error: code={code} msg={msg}");
            match core {
                Some(evprofile::Error::VersionMismatch { .. }) => ExitCode::from(EXIT_VERSION),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
