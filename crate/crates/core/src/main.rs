use std::io::Write;
use std::process::ExitCode;

use bethe_sos::cli::{exit_code, render, run, thread_count, Cli, EXIT_CONFIG};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match thread_count(std::env::var("BETHE_SOS_THREADS").ok().as_deref()) {
        Ok(k) => k,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("error: thread pool: {e}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    let text = match render(&report, cli.format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: writing report: {e}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    ExitCode::from(report.exit_code() as u8)
}
