//! `parity-proj` command line: `verify`, `compare`, `sweep`, `dump-operator`.
//!
//! Exit codes: 0 success, 1 check failure or runtime error, 2 usage error.

mod config;
mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

pub use config::{Format, GridArg, RunConfig, TolOverride, Tolerances};
pub use verify::{run_suite, Check, Suite, VerifyContext, VerifyReport};

use crate::angle::parse_angle;
use crate::error::{Error, Result};
use crate::metrology::{phase_sweep, Bs1, InterferometerSpec, SweepResult};
use crate::projectors::{
    compare_projectors, default_block, GridDescriptor, ProjectorMethod, QuadratureOptions,
};
use crate::states::StateSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_COMPARE_CUTOFF: usize = 8;
const DEFAULT_SWEEP_CUTOFF: usize = 12;
const DEFAULT_DUMP_CUTOFF: usize = 4;

#[derive(Debug, Parser)]
#[command(
    name = "parity-proj",
    version,
    about = "Entangled-state projection operators and parity-detection interferometry"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Per-mode Fock cutoff d (2..=64).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(2..=64))]
    cutoff: Option<u16>,

    /// Quadrature grid half-width and step.
    #[arg(long, global = true, value_name = "R,h")]
    grid: Option<GridArg>,

    /// Compare only rows/columns with m + n <= K.
    #[arg(long, global = true, value_name = "K")]
    block: Option<usize>,

    /// Write the result here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<std::path::PathBuf>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Override a named tolerance (repeatable).
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    tol: Vec<TolOverride>,

    /// Omit wall-clock times so output is byte-stable.
    #[arg(long, global = true)]
    no_timing: bool,

    /// Run 4-D quadratures beyond the cost guard.
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a verification suite and report every check as JSON.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
    },
    /// Build two projectors and report their block-restricted difference.
    Compare {
        #[arg(long, value_name = "METHOD")]
        method_a: ProjectorMethod,
        #[arg(long, value_name = "METHOD")]
        method_b: ProjectorMethod,
    },
    /// Parity signal over a range of phases.
    Sweep {
        /// Input state, e.g. noon:2 or cs-sv:0.8,0,0.4.
        #[arg(long, value_name = "STATE")]
        input: StateSpec,
        /// First beam splitter: none, symmetric-i or bs:THETA,PHI.
        #[arg(long, default_value = "none", allow_hyphen_values = true)]
        bs1: Bs1,
        /// Detection projector.
        #[arg(
            long,
            default_value = "fock:-pi/2",
            allow_hyphen_values = true,
            value_name = "METHOD"
        )]
        detect: ProjectorMethod,
        /// Phase range MIN:MAX:STEPS, endpoints inclusive.
        #[arg(
            long,
            default_value = "0:2pi:200",
            allow_hyphen_values = true,
            value_name = "MIN:MAX:N"
        )]
        phi: PhiRange,
    },
    /// Dump an operator matrix or state vector as JSON.
    DumpOperator {
        #[arg(
            long,
            value_name = "METHOD",
            allow_hyphen_values = true,
            required_unless_present = "state",
            conflicts_with = "state"
        )]
        operator: Option<ProjectorMethod>,
        #[arg(long, value_name = "STATE")]
        state: Option<StateSpec>,
    },
}

/// `MIN:MAX:STEPS` with angles in radians or multiples of `pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiRange {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl FromStr for PhiRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, steps] = parts[..] else {
            return Err(Error::Parse(format!(
                "phase range '{s}': expected MIN:MAX:STEPS"
            )));
        };
        let steps: usize = steps
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("phase range '{s}': bad step count '{steps}'")))?;
        if steps < 2 {
            return Err(Error::Parse(format!(
                "phase range '{s}': need at least 2 steps"
            )));
        }
        Ok(Self {
            min: parse_angle(min)?,
            max: parse_angle(max)?,
            steps,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub method_a: String,
    pub method_b: String,
    pub cutoff: usize,
    pub block: usize,
    pub maxdiff: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub hermiticity_a: f64,
    pub hermiticity_b: f64,
    pub grid: Option<GridDescriptor>,
    pub seconds: Option<f64>,
}

fn grid_for(cfg: &RunConfig) -> Result<Option<crate::quadrature::QuadratureGrid>> {
    cfg.grid.map(|g| g.plane()).transpose()
}

fn quadrature_options(cfg: &RunConfig) -> QuadratureOptions {
    QuadratureOptions {
        force: cfg.force,
        ..Default::default()
    }
}

/// Build both projectors and compare them on the block `m + n ≤ K`.
///
/// Without `--block`, `K = d − 1` when both routes are exact and `d/2 − 2`
/// otherwise. The tolerance follows the least accurate route.
pub fn run_compare(
    a: ProjectorMethod,
    b: ProjectorMethod,
    cfg: &RunConfig,
) -> Result<CompareReport> {
    let started = Instant::now();
    let cutoff = cfg.cutoff.unwrap_or(DEFAULT_COMPARE_CUTOFF);
    let grid = grid_for(cfg)?;
    let opts = quadrature_options(cfg);
    let (ma, ra) = a.build(cutoff, grid.as_ref(), opts)?;
    let (mb, rb) = b.build(cutoff, grid.as_ref(), opts)?;
    let any_quadrature = a.is_quadrature() || b.is_quadrature();
    let block = cfg.block.unwrap_or(if any_quadrature {
        default_block(cutoff)
    } else {
        cutoff - 1
    });
    let maxdiff = compare_projectors(&ma, &mb, block)?;
    let tol = &cfg.tolerances;
    let tolerance = if [a, b].contains(&ProjectorMethod::CoherentQuadrature) {
        tol.coherent4d
    } else if any_quadrature {
        tol.quadrature
    } else {
        tol.exact
    };
    Ok(CompareReport {
        method_a: a.to_string(),
        method_b: b.to_string(),
        cutoff,
        block,
        maxdiff,
        tolerance,
        pass: maxdiff <= tolerance,
        hermiticity_a: ra.hermiticity_residual,
        hermiticity_b: rb.hermiticity_residual,
        grid: ra.grid.or(rb.grid),
        seconds: cfg.timing.then(|| started.elapsed().as_secs_f64()),
    })
}

pub fn run_sweep(
    input: StateSpec,
    bs1: Bs1,
    detection: ProjectorMethod,
    phi: PhiRange,
    cfg: &RunConfig,
) -> Result<SweepResult> {
    let spec = InterferometerSpec {
        input,
        bs1,
        phase: phi.min,
        detection,
        cutoff: cfg.cutoff.unwrap_or(DEFAULT_SWEEP_CUTOFF),
        grid: grid_for(cfg)?,
    };
    phase_sweep(&spec, phi.min, phi.max, phi.steps)
}

/// What `dump-operator` writes.
pub enum Dump {
    Operator(crate::tensor::OperatorMatrix),
    State(crate::tensor::TwoModeState),
}

pub fn run_dump(
    operator: Option<ProjectorMethod>,
    state: Option<StateSpec>,
    cfg: &RunConfig,
) -> Result<Dump> {
    let cutoff = cfg.cutoff.unwrap_or(DEFAULT_DUMP_CUTOFF);
    match (operator, state) {
        (Some(m), None) => {
            let (op, _) = m.build(cutoff, grid_for(cfg)?.as_ref(), quadrature_options(cfg))?;
            Ok(Dump::Operator(op))
        }
        (None, Some(s)) => Ok(Dump::State(s.build(cutoff)?)),
        _ => Err(Error::Parse(
            "dump-operator needs exactly one of --operator or --state".into(),
        )),
    }
}

pub fn run_verify(suite: Suite, cfg: &RunConfig) -> Result<VerifyReport> {
    let defaults = VerifyContext::default();
    let ctx = VerifyContext {
        cutoff: cfg.cutoff.unwrap_or(defaults.cutoff),
        grid: grid_for(cfg)?.unwrap_or(defaults.grid),
        block: cfg.block.unwrap_or(defaults.block),
        tol: cfg.tolerances,
        force: cfg.force,
    };
    Ok(run_suite(suite, &ctx, cfg.timing))
}

enum CliError {
    Usage(String),
    Failed(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::CostGuard(_) | Error::InvalidGrid(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Failed(other.to_string()),
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn to_compact_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string(value)?;
    s.push('\n');
    Ok(s)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json_only(cfg: &RunConfig, command: &str) -> std::result::Result<(), CliError> {
    match cfg.format {
        Some(Format::Csv) => Err(CliError::Usage(format!("{command} only writes json"))),
        _ => Ok(()),
    }
}

fn execute(cli: Cli) -> std::result::Result<i32, CliError> {
    let cfg = RunConfig {
        cutoff: cli.cutoff.map(usize::from),
        grid: cli.grid,
        block: cli.block,
        tolerances: Tolerances::with_overrides(&cli.tol)?,
        out: cli.out,
        format: cli.format,
        timing: !cli.no_timing,
        force: cli.force,
    };
    let out = cfg.out.as_deref();
    match cli.command {
        Command::Verify { suite } => {
            json_only(&cfg, "verify")?;
            let report = run_verify(suite, &cfg)?;
            for c in &report.checks {
                eprintln!(
                    "{} {} (residual {:e}, tolerance {:e}){}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.residual,
                    c.tolerance,
                    c.error
                        .as_deref()
                        .map(|e| format!(": {e}"))
                        .unwrap_or_default()
                );
            }
            eprintln!(
                "{}: {}/{} checks passed",
                report.suite, report.passed, report.total
            );
            emit(out, &to_json(&report)?)?;
            Ok(if report.all_passed() {
                EXIT_OK
            } else {
                EXIT_FAILURE
            })
        }
        Command::Compare { method_a, method_b } => {
            json_only(&cfg, "compare")?;
            let report = run_compare(method_a, method_b, &cfg)?;
            emit(out, &to_json(&report)?)?;
            Ok(if report.pass { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::Sweep {
            input,
            bs1,
            detect,
            phi,
        } => {
            let result = run_sweep(input, bs1, detect, phi, &cfg)?;
            let text = match cfg.format.unwrap_or(Format::Csv) {
                Format::Csv => result.to_csv(),
                Format::Json => to_json(&result)?,
            };
            emit(out, &text)?;
            Ok(EXIT_OK)
        }
        Command::DumpOperator { operator, state } => {
            json_only(&cfg, "dump-operator")?;
            let text = match run_dump(operator, state, &cfg)? {
                Dump::Operator(op) => to_compact_json(&op)?,
                Dump::State(s) => to_compact_json(&s)?,
            };
            emit(out, &text)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Failed(msg)) => {
            eprintln!("error: {msg}");
            EXIT_FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn phi_range() {
        let r: PhiRange = "0:2pi:5".parse().unwrap();
        assert_eq!(
            r,
            PhiRange {
                min: 0.0,
                max: 2.0 * PI,
                steps: 5
            }
        );
        let r: PhiRange = "-pi/2:pi/2:3".parse().unwrap();
        assert_eq!(r.min, -PI / 2.0);
        assert!("0:1".parse::<PhiRange>().is_err());
        assert!("0:1:1".parse::<PhiRange>().is_err());
        assert!("0:1:x".parse::<PhiRange>().is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(
            run(["parity-proj", "verify", "--suite", "bogus"]),
            EXIT_USAGE
        );
        assert_eq!(
            run(["parity-proj", "sweep", "--input", "noon:x"]),
            EXIT_USAGE
        );
        assert_eq!(run(["parity-proj", "verify", "--cutoff", "65"]), EXIT_USAGE);
        assert_eq!(
            run(["parity-proj", "verify", "--tol", "bogus=1"]),
            EXIT_USAGE
        );
        assert_eq!(run(["parity-proj", "dump-operator"]), EXIT_USAGE);
    }

    #[test]
    fn compare_block_defaults() {
        let cfg = RunConfig {
            cutoff: Some(6),
            timing: false,
            ..Default::default()
        };
        let r = run_compare(
            ProjectorMethod::Conjugation(crate::projectors::BsParams::balanced(0.0).unwrap()),
            ProjectorMethod::Fock { phi: 0.0 },
            &cfg,
        )
        .unwrap();
        assert_eq!(r.block, 5);
        assert!(r.pass);
        assert!(r.seconds.is_none());
    }
}
