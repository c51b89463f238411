use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use fpctl::{run, threads_from_env, Cli, Status};

fn configure_threads() -> anyhow::Result<()> {
    let threads = threads_from_env(std::env::var("THREADS").ok().as_deref())?;
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(Status::InvalidInput.code() as u8);
    }
    let outcome = run(&cli);
    for message in &outcome.messages {
        eprintln!("{message}");
    }
    if !outcome.body.is_empty() {
        let written = match &outcome.path {
            Some(path) => std::fs::write(path, &outcome.body).map_err(anyhow::Error::from),
            None => std::io::stdout().write_all(outcome.body.as_bytes()).map_err(anyhow::Error::from),
        };
        if let Err(e) = written {
            eprintln!("error: cannot write output: {e}");
            return ExitCode::from(Status::InvalidInput.code() as u8);
        }
    }
    ExitCode::from(outcome.status.code() as u8)
}
