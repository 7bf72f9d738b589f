//! `modflow`: runs the modular-flow experiments and writes CSV/JSON reports.
//!
//! Exit codes: 0 every check passed, 1 a check failed, 2 usage or input
//! error, 3 a polynomial degree would exceed `--degree-cap`.

mod args;
mod commands;
mod config;
mod error;
mod inputs;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::Ctx;

fn main() -> ExitCode {
    let argv = match config::expand(std::env::args_os().collect()) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::try_parse_from(argv).unwrap_or_else(|e| e.exit());
    let g = &cli.global;
    let ctx = Ctx {
        seed: g.seed,
        degree_cap: g.degree_cap,
        record_timing: g.record_timing,
        parameters: serde_json::to_value(&cli.command).expect("serializable arguments"),
    };
    let name = cli.command.name();
    let report = match commands::run(&cli.command, &ctx) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    match &g.out {
        Some(dir) => match report.write_to(dir, ctx.parameters.clone(), ctx.seed, ctx.degree_cap) {
            Ok((csv, json)) => eprintln!("wrote {} and {}", csv.display(), json.display()),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => {
            let mut out = std::io::stdout().lock();
            if out.write_all(report.to_csv().as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(2);
            }
        }
    }
    eprintln!("{name}: {} checks, {} failed", report.checks(), report.failures());
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
