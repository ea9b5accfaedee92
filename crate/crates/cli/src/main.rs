use std::process::ExitCode;

use clap::Parser;
use telesense_cli::{execute, Cli, RunConfig};

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let report = match RunConfig::from_cli(&cli).and_then(|run| Ok((execute(&run)?, run))) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let (report, run) = report;
    match &run.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &report.text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{}", report.text),
    }
    if report.flags.is_empty() {
        return ExitCode::SUCCESS;
    }
    eprintln!("{} flagged row(s):", report.flags.len());
    for (row, flag) in &report.flags {
        eprintln!("  row {row}: {flag}");
    }
    ExitCode::from(1)
}
