use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ac_duality::par;
use ac_duality::scenario::{
    run_bundled_suite, run_scenario, run_suite, run_sweep, Kind, ScenarioConfig, ScenarioError,
    SUITE_TOL,
};
use ac_duality::Error;

/// Topological phase, duality and entanglement scenarios.
///
/// Exit codes: 0 pass, 1 expectation failure, 2 config error, 3 numerical
/// non-convergence. `ACD_THREADS` sets the worker count (0 = automatic).
#[derive(Parser)]
#[command(name = "acd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Line-integral phase of a path around a source.
    Phase(Common),
    /// Force on the neutral particle.
    Force(Common),
    /// Swap and boost invariance of the interaction.
    Duality(Common),
    /// Two-packet scattering and conditional phases.
    Entangle(Common),
    /// One base scenario per value of a parameter; also writes CSV.
    Sweep(SweepArgs),
    /// The bundled invariant suite, or the scenarios of a suite config.
    Suite(SuiteArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Report path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the quadrature tolerance.
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// CSV path; defaults to the report path with a `.csv` extension.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
}

const EXIT_PASS: u8 = 0;
const EXIT_EXPECTATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS });
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    let code = match cli.command {
        Command::Phase(a) => single(Kind::Phase, &a),
        Command::Force(a) => single(Kind::Force, &a),
        Command::Duality(a) => single(Kind::Duality, &a),
        Command::Entangle(a) => single(Kind::Entangle, &a),
        Command::Sweep(a) => sweep(&a),
        Command::Suite(a) => suite(&a),
    };
    ExitCode::from(code.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code() as u8
    }))
}

fn configure_threads() -> Result<(), Error> {
    match std::env::var("ACD_THREADS") {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::config("ACD_THREADS", format!("expected a non-negative integer, got `{v}`")))?;
            par::configure_threads(n);
            Ok(())
        }
        Err(_) => Ok(()),
    }
}

fn cli_error(error: Error) -> ScenarioError {
    ScenarioError {
        scenario: "-".into(),
        error,
    }
}

/// Reads the config, fills in the kind from the subcommand and applies `--tol`.
fn load(path: &Path, kind: Kind, tol: Option<f64>) -> Result<ScenarioConfig, ScenarioError> {
    let text = fs::read_to_string(path)
        .map_err(|e| cli_error(Error::config("--config", format!("cannot read {}: {e}", path.display()))))?;
    let mut cfg = ScenarioConfig::from_json(&text).map_err(cli_error)?;
    match cfg.kind {
        None => cfg.kind = Some(kind),
        Some(k) if k != kind => {
            return Err(ScenarioError {
                scenario: cfg.id.clone(),
                error: Error::config(
                    "kind",
                    format!("config is a `{}` scenario but ran as `{}`", k.as_str(), kind.as_str()),
                ),
            })
        }
        Some(_) => {}
    }
    if let Some(t) = tol {
        apply_tol(&mut cfg, t).map_err(cli_error)?;
    }
    Ok(cfg)
}

fn check_tol(tol: f64) -> Result<f64, Error> {
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(Error::config("--tol", format!("must be positive, got {tol}")))
    }
}

fn apply_tol(cfg: &mut ScenarioConfig, tol: f64) -> Result<(), Error> {
    cfg.tolerances.tol = check_tol(tol)?;
    for sc in &mut cfg.scenarios {
        apply_tol(sc, tol)?;
    }
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), ScenarioError> {
    match out {
        Some(p) => fs::write(p, format!("{text}\n"))
            .map_err(|e| cli_error(Error::config("--out", format!("cannot write {}: {e}", p.display())))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn verdict(passed: bool) -> u8 {
    if passed {
        EXIT_PASS
    } else {
        EXIT_EXPECTATION
    }
}

fn single(kind: Kind, a: &Common) -> Result<u8, ScenarioError> {
    let cfg = load(&a.config, kind, a.tol)?;
    let report = run_scenario(&cfg)?;
    emit(a.out.as_deref(), &report.to_json())?;
    Ok(verdict(report.passed))
}

fn sweep(a: &SweepArgs) -> Result<u8, ScenarioError> {
    let cfg = load(&a.common.config, Kind::Sweep, a.common.tol)?;
    let report = run_sweep(&cfg)?;
    emit(a.common.out.as_deref(), &report.to_json())?;
    let csv_path = a
        .csv
        .clone()
        .or_else(|| a.common.out.as_ref().map(|p| p.with_extension("csv")));
    if let Some(p) = csv_path {
        fs::write(&p, &report.csv)
            .map_err(|e| cli_error(Error::config("--csv", format!("cannot write {}: {e}", p.display()))))?;
    }
    for row in report.rows.iter().filter(|r| r.exit_code.is_some()) {
        eprintln!("row {}: {}", row.value, row.status);
    }
    Ok(match report.row_error_code() {
        Some(code) => code as u8,
        None => verdict(report.passed),
    })
}

fn suite(a: &SuiteArgs) -> Result<u8, ScenarioError> {
    let report = match &a.config {
        Some(path) => {
            let cfg = load(path, Kind::Suite, a.tol)?;
            run_suite(&cfg)?
        }
        None => {
            let tol = match a.tol {
                Some(t) => check_tol(t).map_err(cli_error)?,
                None => SUITE_TOL,
            };
            run_bundled_suite(tol)
        }
    };
    let json = report.to_json();
    emit(a.out.as_deref(), &json)?;
    // keep stdout clean for the JSON when it goes there
    let table = report.table();
    if a.out.is_some() {
        print!("{table}");
        let _ = std::io::stdout().flush();
    } else {
        eprint!("{table}");
    }
    Ok(verdict(report.passed))
}
