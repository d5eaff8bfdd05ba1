//! Argument definitions and command bodies.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fidelity_coherence::channels::{self, IncoherentChannel};
use fidelity_coherence::exec::Execution;
use fidelity_coherence::linalg;
use fidelity_coherence::measures::{self as m, RoofConfig};
use fidelity_coherence::transform::{self, TRANSFORM_TOL};
use fidelity_coherence::verify::{self, Suite, SuiteConfig};
use fidelity_coherence::{Error, PureState, STRUCTURAL_TOL};
use serde::Serialize;

use crate::files::{self, ChannelFile, State, StateFile};
use crate::{CliError, EXIT_FALSE, EXIT_INVALID, EXIT_OK, SEED_ENV};

type Out<'a> = &'a mut dyn Write;

#[derive(Debug, Parser)]
#[command(name = "fidcoh", version, about = "Fidelity-based quantum coherence toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coherence of a state file.
    Measure(MeasureArgs),
    /// Uhlmann fidelity between two state files.
    Fidelity { a: PathBuf, b: PathBuf },
    /// Pure-to-mixed qubit transformations by incoherent operations.
    #[command(subcommand)]
    Transform(TransformCommand),
    /// Check or apply a Kraus channel file.
    #[command(subcommand)]
    Channel(ChannelCommand),
    /// Run randomized property suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Measure {
    Cf,
    Cl1,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Measure::Cf)]
    pub measure: Measure,
    /// Optimizer restarts (dim ≥ 3 only).
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    /// Ensemble size; defaults to rank².
    #[arg(long)]
    pub ensemble_size: Option<usize>,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Run restarts on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Subcommand)]
pub enum TransformCommand {
    /// Decide whether the source can be mapped onto the target.
    Check { source: PathBuf, target: PathBuf },
    /// Build the channel; written to --out, or printed as JSON.
    Build {
        source: PathBuf,
        target: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ChannelCommand {
    /// Check completeness and the incoherent column structure.
    Validate {
        channel: PathBuf,
        #[arg(long, default_value_t = STRUCTURAL_TOL)]
        tol: f64,
    },
    /// Apply the channel to a state; written to --out, or printed as JSON.
    Apply {
        channel: PathBuf,
        state: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    C1,
    C3,
    C4,
    L1,
    Roof,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::C1 => Suite::C1,
            SuiteArg::C3 => Suite::C3,
            SuiteArg::C4 => Suite::C4,
            SuiteArg::L1 => Suite::L1Relation,
            SuiteArg::Roof => Suite::RoofOracle,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    pub suite: SuiteArg,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Print the report as JSON.
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub sequential: bool,
}

fn execution(sequential: bool) -> Execution {
    if sequential { Execution::Sequential } else { Execution::Parallel }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Writes JSON to `path`, or to `out` when no path is given.
fn emit<T: Serialize>(value: &T, path: Option<&Path>, out: Out) -> Result<(), CliError> {
    match path {
        Some(p) => files::write_json(p, value),
        None => out.write_all(files::to_json(value).as_bytes()).map_err(io_err),
    }
}

pub fn execute(cli: &Cli, out: Out) -> Result<i32, CliError> {
    match &cli.command {
        Command::Measure(args) => measure(args, out),
        Command::Fidelity { a, b } => fidelity(a, b, out),
        Command::Transform(TransformCommand::Check { source, target }) => transform_check(source, target, out),
        Command::Transform(TransformCommand::Build { source, target, out: path }) => {
            transform_build(source, target, path.as_deref(), out)
        }
        Command::Channel(ChannelCommand::Validate { channel, tol }) => channel_validate(channel, *tol, out),
        Command::Channel(ChannelCommand::Apply { channel, state, out: path }) => {
            channel_apply(channel, state, path.as_deref(), out)
        }
        Command::Verify(args) => run_verify(args, out),
    }
}

fn measure(args: &MeasureArgs, out: Out) -> Result<i32, CliError> {
    let state = files::load_state(&args.input)?;
    let line = match (args.measure, &state) {
        (Measure::Cl1, s) => format!("{:.12}", m::c_l1(&s.to_density())),
        (Measure::Cf, State::Pure(phi)) => format!("{:.12}", m::c_f_pure(phi)),
        (Measure::Cf, State::Density(rho)) if rho.dim() == 2 => format!("{:.12}", m::c_f_qubit(rho)?),
        (Measure::Cf, State::Density(rho)) => {
            let cfg = RoofConfig {
                ensemble_size: args.ensemble_size,
                restarts: args.restarts,
                max_iterations: args.max_iter,
                seed: args.seed,
                execution: execution(args.sequential),
                ..RoofConfig::default()
            };
            let est = m::c_f_roof_estimate_with(rho, &cfg)?;
            format!("{:.12} (upper-bound estimate)", est.value)
        }
    };
    writeln!(out, "{line}").map_err(io_err)?;
    Ok(EXIT_OK)
}

fn fidelity(a: &Path, b: &Path, out: Out) -> Result<i32, CliError> {
    let (a, b) = (files::load_state(a)?.to_density(), files::load_state(b)?.to_density());
    if a.dim() != b.dim() {
        return Err(CliError::Validation(format!("dimension mismatch: {} vs {}", a.dim(), b.dim())));
    }
    writeln!(out, "{:.12}", m::uhlmann_fidelity(&a, &b)?).map_err(io_err)?;
    Ok(EXIT_OK)
}

fn load_transform_pair(source: &Path, target: &Path) -> Result<(PureState, State), CliError> {
    let source = match files::load_state(source)? {
        State::Pure(phi) => phi,
        State::Density(_) => return Err(CliError::Validation("transform source must be a pure state".into())),
    };
    let target = files::load_state(target)?;
    if source.dim() != 2 || target.dim() != 2 {
        return Err(CliError::Validation(format!(
            "transform requires qubit states (source dim {}, target dim {})",
            source.dim(),
            target.dim()
        )));
    }
    Ok((source, target))
}

fn verdict(phi: &PureState, target: &State) -> Result<(bool, String), CliError> {
    let rho = target.to_density();
    let ok = transform::can_transform(phi, &rho, TRANSFORM_TOL)?;
    let (s, t) = (m::c_f_pure(phi), m::c_f_qubit(&rho)?);
    let text = if ok {
        format!("transformable ({s:.6} ≥ {t:.6})")
    } else {
        format!("not transformable ({s:.6} < {t:.6})")
    };
    Ok((ok, text))
}

fn transform_check(source: &Path, target: &Path, out: Out) -> Result<i32, CliError> {
    let (phi, target) = load_transform_pair(source, target)?;
    let (ok, text) = verdict(&phi, &target)?;
    writeln!(out, "{text}").map_err(io_err)?;
    Ok(if ok { EXIT_OK } else { EXIT_FALSE })
}

fn transform_build(source: &Path, target: &Path, path: Option<&Path>, out: Out) -> Result<i32, CliError> {
    let (phi, target) = load_transform_pair(source, target)?;
    let (_, text) = verdict(&phi, &target)?;
    let rho = target.to_density();
    let channel = match transform::build_transform_channel(&phi, &rho) {
        Ok(ch) => ch,
        Err(Error::NotTransformable { .. }) => {
            writeln!(out, "{text}").map_err(io_err)?;
            return Ok(EXIT_FALSE);
        }
        Err(e) => return Err(e.into()),
    };
    let image = channels::apply_channel(&channel, &phi.to_density())?;
    let reconstruction = linalg::max_abs(&(image.matrix() - rho.matrix()));
    let summary = format!(
        "{text}\nkraus operators: {}\ncompleteness residual: {:e}\nreconstruction residual: {:e}\n",
        channel.len(),
        channel.completeness_residual(),
        reconstruction
    );
    match path {
        Some(p) => {
            files::write_json(p, &ChannelFile::from_channel(&channel))?;
            out.write_all(summary.as_bytes()).map_err(io_err)?;
        }
        None => {
            emit(&ChannelFile::from_channel(&channel), None, out)?;
            eprint!("{summary}");
        }
    }
    Ok(EXIT_OK)
}

fn pass(ok: bool) -> &'static str {
    if ok { "pass" } else { "fail" }
}

fn channel_validate(path: &Path, tol: f64, out: Out) -> Result<i32, CliError> {
    let file = files::read_channel_file(path)?;
    let ops = file.matrices()?;
    let report = channels::check_channel(&ops, tol);
    let residual = report.completeness_residual.map_or("n/a".to_string(), |r| format!("{r:e}"));
    let mut text = format!(
        "operators: {}\ndimensions: {}\ncompleteness: {} (residual {residual}, tolerance {tol:e})\nincoherence: {}\n",
        report.operators,
        pass(report.dimensions_ok()),
        pass(report.complete()),
        pass(report.incoherent()),
    );
    if !report.passed() {
        for line in report.to_string().split("; ") {
            text.push_str(line);
            text.push('\n');
        }
    }
    text.push_str(&format!("result: {}\n", pass(report.passed())));
    out.write_all(text.as_bytes()).map_err(io_err)?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_INVALID })
}

fn load_channel(path: &Path) -> Result<IncoherentChannel, CliError> {
    let ops = files::read_channel_file(path)?.matrices()?;
    let report = channels::check_channel(&ops, STRUCTURAL_TOL);
    if !report.passed() {
        return Err(CliError::Validation(format!("invalid channel: {report}")));
    }
    Ok(channels::validate_channel(ops, STRUCTURAL_TOL)?)
}

fn channel_apply(channel: &Path, state: &Path, path: Option<&Path>, out: Out) -> Result<i32, CliError> {
    let channel = load_channel(channel)?;
    let rho = files::load_state(state)?.to_density();
    let image = channels::apply_channel(&channel, &rho)?;
    emit(&StateFile::from_density(&image), path, out)?;
    Ok(EXIT_OK)
}

fn run_verify(args: &VerifyArgs, out: Out) -> Result<i32, CliError> {
    let cfg = SuiteConfig {
        suite: args.suite.into(),
        trials: args.trials,
        dim: args.dim,
        seed: args.seed,
        tolerance: args.tol,
        execution: execution(args.sequential),
    };
    let report = verify::run_suite(&cfg)?;
    if args.json {
        let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(out, "{json}").map_err(io_err)?;
    } else {
        writeln!(out, "{report}").map_err(io_err)?;
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_FALSE })
}
