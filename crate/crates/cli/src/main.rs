//! `dirichlet-lab`: runs one experiment and writes `<name>.json`, CSV detail
//! files and `meta.json` (timestamps and thread count) into the output
//! directory. Everything except `meta.json` is reproducible from the config
//! and seed.
//!
//! Exit codes: 0 success, 2 parse error, 3 validation error, 4 numerical
//! failure, 5 failed assertion.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod config;
mod diff;
mod error;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde_json::{json, Value};

use args::{Cli, Command, DiffArgs};
use commands::{Context, Report};
use config::{ExperimentConfig, Kind};
use error::{CliError, Result};

const DEFAULT_OUT: &str = "dirichlet-lab-out";

fn unix_millis() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis())
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::validation(format!("output {}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn run_diff(args: &DiffArgs, tolerance: Option<f64>) -> Result<()> {
    let read = |p: &PathBuf| -> Result<Value> {
        let text = fs::read_to_string(p).map_err(|e| CliError::validation(format!("report {}: {e}", p.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("report {}: {e}", p.display())))
    };
    let defaults = diff::DiffOptions::default();
    let opts = diff::DiffOptions {
        abs_tol: tolerance.unwrap_or(defaults.abs_tol),
        rel_tol: args.rel_tolerance.unwrap_or(defaults.rel_tol),
        only: args.only.clone(),
        ignore: args.ignore.clone(),
    };
    if !(opts.abs_tol >= 0.0 && opts.rel_tol >= 0.0) {
        return Err(CliError::validation("tolerances must be nonnegative"));
    }
    let d = diff::report_diff(&read(&args.a)?, &read(&args.b)?, &opts)?;
    print!("{}", pretty(&serde_json::to_value(&d).expect("serializable")));
    if d.differences.is_empty() {
        Ok(())
    } else {
        Err(CliError::Assertion(format!("{} field(s) differ", d.differences.len())))
    }
}

fn kind_of(cmd: &Command) -> Kind {
    match cmd {
        Command::Spectrum(_) => Kind::Spectrum,
        Command::Gap(_) => Kind::Gap,
        Command::ChainGap(_) | Command::DetailedBalance(_) => Kind::Chain,
        Command::Simulate(_) | Command::DecayFit(_) => Kind::Diffusion,
        Command::Poincare(_) => Kind::Poincare,
        Command::InfiniteSweep(_) => Kind::Infinite,
        Command::Diff(_) => unreachable!("diff takes no experiment config"),
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = cli.global;
    if let Command::Diff(d) = &cli.command {
        return run_diff(d, g.tolerance);
    }
    let started = unix_millis();
    let clock = Instant::now();
    let config = match &g.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    config.check_kind(kind_of(&cli.command))?;
    if let Some(t) = g.threads {
        if t == 0 {
            return Err(CliError::validation("field `threads`: must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::validation(format!("field `threads`: {e}")))?;
    }
    let out = g.out.clone().or(config.out.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let ctx = Context {
        seed: g.seed.or(config.seed).unwrap_or(0),
        tolerance: g.tolerance,
        alpha_text: g.alpha.clone(),
        config,
    };
    let report: Report = match &cli.command {
        Command::Spectrum(a) => commands::spectrum(&ctx, a)?,
        Command::Gap(a) => commands::gap(&ctx, a)?,
        Command::ChainGap(a) => commands::chain_gap(&ctx, a)?,
        Command::DetailedBalance(a) => commands::detailed_balance(&ctx, a)?,
        Command::Simulate(a) => commands::simulate(&ctx, a)?,
        Command::DecayFit(a) => commands::decay_fit(&ctx, a)?,
        Command::Poincare(a) => commands::poincare(&ctx, a)?,
        Command::InfiniteSweep(a) => commands::infinite_sweep(&ctx, a)?,
        Command::Diff(_) => unreachable!(),
    };

    fs::create_dir_all(&out).map_err(|e| CliError::validation(format!("output {}: {e}", out.display())))?;
    let summary_name = format!("{}.json", report.name);
    write_file(&out, &summary_name, &pretty(&report.summary))?;
    let mut files = vec![summary_name];
    for (name, body) in &report.csv {
        write_file(&out, name, body)?;
        files.push(name.clone());
    }
    let meta = json!({
        "command": report.name,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": ctx.seed,
        "threads": rayon::current_num_threads(),
        "started_unix_ms": started as u64,
        "finished_unix_ms": unix_millis() as u64,
        "elapsed_ms": clock.elapsed().as_millis() as u64,
        "files": files,
        "failures": report.failures,
    });
    write_file(&out, "meta.json", &pretty(&meta))?;
    print!("{}", pretty(&report.summary));
    if report.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Assertion(report.failures.join("; ")))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dirichlet-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
