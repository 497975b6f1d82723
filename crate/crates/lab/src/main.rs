//! `lab`: sweeps, inclusion certificates and self-checks from the command line.
//!
//! Exit codes: 0 on success, 2 when validation fails (bad input, failed
//! certificate or self-check), 3 on numerical-regime failures.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use flatlab::bergman::{metric_report, product_j_target, ClosedForm};
use flatlab::frames::{build_frame, certify_inclusions};
use flatlab::harness::{run_sweep, verify_all, write_csv, write_outputs, SweepConfig, VerifyLevel, VerifyOptions};
use flatlab::kobayashi::kobayashi_product;
use flatlab::{LabError, C64};

const VALIDATION_FAILURE: u8 = 2;

#[derive(Parser)]
#[command(name = "lab", version, about = "Invariant metrics near exponentially flat boundary points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Fast,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Invariants of 𝔻 × Bₙ at the origin for ξ = e₁.
    ClosedForm {
        #[arg(long)]
        dim: usize,
    },
    /// Runs a sweep; CSV goes to stdout when the config names no file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Inclusion certificates for every (t, ε, δ) of a config.
    Certify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Runs the self-check suites and prints a JSON report.
    Verify {
        #[arg(long, value_enum)]
        level: Level,
        /// Polynomial degree of the Gram oracle suite.
        #[arg(long)]
        dmax: Option<usize>,
        /// Halton samples per inclusion test.
        #[arg(long)]
        samples: Option<usize>,
    },
}

fn print_json(v: &impl serde::Serialize) -> Result<(), LabError> {
    let s = serde_json::to_string_pretty(v).map_err(|e| LabError::Io(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn closed_form(dim: usize) -> Result<ExitCode, LabError> {
    if dim == 0 {
        return Err(LabError::Config("--dim must be at least 1".into()));
    }
    let model = ClosedForm::product_disc_ball(dim);
    let origin = vec![C64::new(0.0, 0.0); dim + 1];
    let mut xi = origin.clone();
    xi[0] = C64::new(1.0, 0.0);
    let rep = metric_report(&model, &origin, &xi)?;
    print_json(&json!({
        "n": dim,
        "summary": rep.summary(),
        "kobayashi": kobayashi_product(&xi),
        "j_target": product_j_target(dim),
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn sweep(config: &Path) -> Result<ExitCode, LabError> {
    let cfg = SweepConfig::from_path(config)?;
    let out = run_sweep(&cfg)?;
    write_outputs(&cfg, &out)?;
    if cfg.output.csv.is_none() {
        let stdout = std::io::stdout();
        write_csv(&out.rows, stdout.lock())?;
    }
    if cfg.output.json.is_none() {
        let s = serde_json::to_string_pretty(&out.summary).map_err(|e| LabError::Io(e.to_string()))?;
        writeln!(std::io::stderr(), "{s}")?;
    }
    Ok(ExitCode::SUCCESS)
}

fn certify(config: &Path) -> Result<ExitCode, LabError> {
    let cfg = SweepConfig::from_path(config)?;
    let dom = cfg.model_domain()?;
    let curve = cfg.curve()?;
    let mut reports = Vec::new();
    let mut all = true;
    for &ln_t in &cfg.sweep.ln_t {
        let frame = build_frame(&dom, &curve, ln_t.exp(), cfg.sweep.delta0)?;
        for &e in &cfg.sweep.epsilon {
            for &d in &cfg.sweep.delta {
                let r = certify_inclusions(&frame, e, d, cfg.sweep.samples)?;
                all &= r.certified();
                reports.push(json!({ "ln_t": ln_t, "certified": r.certified(), "report": r }));
            }
        }
    }
    print_json(&json!({ "all_certified": all, "reports": reports }))?;
    Ok(if all { ExitCode::SUCCESS } else { ExitCode::from(VALIDATION_FAILURE) })
}

fn verify(level: Level, dmax: Option<usize>, samples: Option<usize>) -> Result<ExitCode, LabError> {
    let mut opts = VerifyOptions::new(match level {
        Level::Fast => VerifyLevel::Fast,
        Level::Full => VerifyLevel::Full,
    });
    if let Some(d) = dmax {
        opts.gram.dmax = d;
    }
    if let Some(s) = samples {
        opts.samples = s;
    }
    let report = verify_all(&opts);
    print_json(&report)?;
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::from(VALIDATION_FAILURE) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::ClosedForm { dim } => closed_form(*dim),
        Command::Sweep { config } => sweep(config),
        Command::Certify { config } => certify(config),
        Command::Verify { level, dmax, samples } => verify(*level, *dmax, *samples),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
