//! `verify`: config-driven verification harness.
//!
//! Usage: `verify --config <path> [--out <dir>] [--h <real>] [--seed <int>]`
//!
//! Exit codes: 0 when every asserted record holds, 2 when any is violated,
//! 1 on runtime errors, 64 on config/usage errors.

mod config;
mod expr;
mod fields;
mod report;
mod suites;

use std::path::PathBuf;
use std::time::Instant;

use schwarz_core::{GridDomain, MeasureConstants, COMPARISON_SLACK};

use config::{ExperimentConfig, RunError};
use suites::{SuiteContext, SuiteOutcome};

const EXIT_OK: i32 = 0;
const EXIT_RUNTIME: i32 = 1;
const EXIT_VIOLATED: i32 = 2;
const EXIT_USAGE: i32 = 64;

const USAGE: &str = "usage: verify --config <path> [--out <dir>] [--h <real>] [--seed <int>]";

struct Cli {
    config: PathBuf,
    out: PathBuf,
    h: Option<f64>,
    seed: Option<u64>,
}

fn parse_args(args: &[String]) -> Result<Cli, String> {
    let mut config = None;
    let mut out = PathBuf::from(".");
    let mut h = None;
    let mut seed = None;
    let mut i = 0;
    while i < args.len() {
        let take_value = |i: usize| -> Result<&String, String> {
            args.get(i + 1)
                .ok_or_else(|| format!("{} needs a value", args[i]))
        };
        match args[i].as_str() {
            "--config" => {
                config = Some(PathBuf::from(take_value(i)?));
                i += 2;
            }
            "--out" => {
                out = PathBuf::from(take_value(i)?);
                i += 2;
            }
            "--h" => {
                h = Some(
                    take_value(i)?
                        .parse::<f64>()
                        .map_err(|e| format!("bad --h value: {e}"))?,
                );
                i += 2;
            }
            "--seed" => {
                seed = Some(
                    take_value(i)?
                        .parse::<u64>()
                        .map_err(|e| format!("bad --seed value: {e}"))?,
                );
                i += 2;
            }
            "--help" | "-h" => return Err(USAGE.to_string()),
            other => return Err(format!("unexpected argument {other:?}\n{USAGE}")),
        }
    }
    let config = config.ok_or_else(|| format!("--config is required\n{USAGE}"))?;
    Ok(Cli { config, out, h, seed })
}

fn run(cli: &Cli) -> Result<i32, RunError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| RunError::config(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(h) = cli.h {
        config.domain.h = h;
    }
    if let Some(seed) = cli.seed {
        config.field.seed = Some(seed);
    }
    config.validate()?;

    let domain = GridDomain::load(&config.domain)
        .map_err(|e| RunError::config(format!("domain: {e}")))?;
    let field = fields::build_field(&domain, &config.field)?;
    let constants = MeasureConstants::planar();
    let ctx = SuiteContext {
        domain: &domain,
        field: &field,
        constants,
        betas: &config.betas,
        lorentz_p: &config.lorentz_p,
        seed: config.field.seed.unwrap_or(0),
        solver_tol: config.tolerance.solver_tol.unwrap_or(1e-10),
        slack_factor: config
            .tolerance
            .comparison_slack
            .map_or(1.0, |s| s / COMPARISON_SLACK),
    };

    let mut outcomes: Vec<SuiteOutcome> = Vec::new();
    for name in &config.suites {
        let suite = suites::find(name).expect("validated");
        let start = Instant::now();
        let outcome = suite.run(&ctx)?;
        eprintln!(
            "suite {name}: {} records in {:.2?}",
            outcome.records.len(),
            start.elapsed()
        );
        outcomes.push(outcome);
    }

    let report = report::assemble(&config, &domain, &outcomes);
    report::write_outputs(&cli.out, &report, &outcomes)?;
    for o in &outcomes {
        for r in &o.records {
            let tag = match r.verdict {
                schwarz_core::Verdict::Holds => "holds",
                schwarz_core::Verdict::Violated => "VIOLATED",
                schwarz_core::Verdict::Inconclusive => "probe",
            };
            eprintln!(
                "  [{tag:>8}] {}: lhs={:.6e} rhs={:.6e} tol={:.1e}",
                r.name, r.lhs, r.rhs, r.tolerance
            );
        }
    }
    let overall = report.overall;
    println!("overall: {overall}");
    Ok(if overall == "holds" { EXIT_OK } else { EXIT_VIOLATED })
}

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match parse_args(&args) {
        Ok(cli) => cli,
        Err(msg) => {
            eprintln!("{msg}");
            std::process::exit(EXIT_USAGE);
        }
    };
    match run(&cli) {
        Ok(code) => std::process::exit(code),
        Err(RunError::Config(msg)) => {
            eprintln!("config error: {msg}");
            std::process::exit(EXIT_USAGE);
        }
        Err(RunError::Runtime(msg)) => {
            eprintln!("runtime error: {msg}");
            std::process::exit(EXIT_RUNTIME);
        }
    }
}
