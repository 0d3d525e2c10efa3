//! `qrlc`: compile Gaussian targets into macronode schedules, verify them symbolically,
//! simulate them on the finite-squeezing lattice, and draw their layout.
//!
//! Exit codes: 0 success, 1 validation or tolerance failure, 2 structural or parse failure.

mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qrl_core::compile::{compile_bs, compile_gaussian, compile_shear, Layout, Role, Schedule, ShearMatrix};
use qrl_core::gaussian::{
    bogoliubov_to_symplectic, max_deviation, random_bogoliubov, random_unitary, unitary_to_symplectic, BogoliubovJson,
    BogoliubovPair, ComplexMatrixJson, ComplexUnitary, GaussianState, RealMatrixJson, SymplecticMap,
};
use qrl_core::lattice::{run_report, RunReport};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] qrl_core::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_structural() => 2,
            CliError::Io { .. } => 2,
            CliError::Core(_) | CliError::Invalid(_) => 1,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "qrlc", version, about = "Quad-rail lattice schedule compiler, verifier and simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a target matrix into a schedule.
    Compile(CompileArgs),
    /// Compose a schedule symbolically and compare it with a target.
    Verify(VerifyArgs),
    /// Run a schedule on the finite-squeezing lattice with vacuum inputs.
    Simulate(SimulateArgs),
    /// Draw a schedule on the lattice grid.
    Layout(LayoutArgs),
    /// Write a seeded random target.
    Random(RandomArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TargetKind {
    Unitary,
    Bogoliubov,
    Shear,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LayoutKind {
    Triangular,
    Rectangular,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Ascii,
    Svg,
}

#[derive(Args)]
struct CompileArgs {
    /// Target matrix JSON.
    #[arg(long)]
    input: PathBuf,
    /// Schedule JSON to write.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "unitary")]
    target_kind: TargetKind,
    #[arg(long, value_enum, default_value = "triangular")]
    layout: LayoutKind,
    /// Tolerance for validating the target.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Schedule JSON.
    #[arg(long)]
    input: PathBuf,
    /// Target matrix JSON.
    #[arg(long)]
    target: PathBuf,
    #[arg(long, value_enum, default_value = "unitary")]
    target_kind: TargetKind,
    /// Largest accepted entry deviation.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
}

#[derive(Args)]
struct SimulateArgs {
    /// Schedule JSON.
    #[arg(long)]
    input: PathBuf,
    /// Report JSON to write; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Target matrix JSON; the schedule's own verified map when absent.
    #[arg(long)]
    target: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "unitary")]
    target_kind: TargetKind,
    /// Tolerance for validating the target.
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    /// Squeezing of every lattice source in dB.
    #[arg(long, default_value_t = 20.0)]
    r_db: f64,
    /// Comma-separated squeezing levels in dB; emits one report per level.
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct LayoutArgs {
    /// Schedule JSON.
    #[arg(long)]
    input: PathBuf,
    /// Diagram file to write; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "ascii")]
    format: Format,
}

#[derive(Args)]
struct RandomArgs {
    #[arg(long, value_enum, default_value = "unitary")]
    target_kind: TargetKind,
    #[arg(long)]
    modes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest squeezing of a random Bogoliubov target.
    #[arg(long, default_value_t = 1.0)]
    max_r: f64,
    /// Entry bound of a random shear target.
    #[arg(long, default_value_t = 3.0)]
    bound: f64,
    /// Target JSON to write; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_owned(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn check_tolerance(tol: f64) -> CliResult<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(CliError::Invalid(format!("tolerance {tol:e} must be positive")))
    }
}

fn load_schedule(path: &Path) -> CliResult<Schedule> {
    Ok(Schedule::from_json(&read(path)?)?)
}

enum Target {
    Unitary(ComplexUnitary),
    Bogoliubov(BogoliubovPair),
    Shear(ShearMatrix),
}

impl Target {
    fn load(path: &Path, kind: TargetKind, tol: f64) -> CliResult<Self> {
        let text = read(path)?;
        Ok(match kind {
            TargetKind::Unitary => {
                let j: ComplexMatrixJson = serde_json::from_str(&text)?;
                Target::Unitary(ComplexUnitary::from_json(&j, tol)?)
            }
            TargetKind::Bogoliubov => {
                let j: BogoliubovJson = serde_json::from_str(&text)?;
                Target::Bogoliubov(BogoliubovPair::from_json(&j, tol)?)
            }
            TargetKind::Shear => {
                let j: RealMatrixJson = serde_json::from_str(&text)?;
                Target::Shear(ShearMatrix::from_json(&j, tol)?)
            }
        })
    }

    fn symplectic(&self) -> CliResult<SymplecticMap> {
        Ok(match self {
            Target::Unitary(u) => unitary_to_symplectic(u),
            Target::Bogoliubov(p) => bogoliubov_to_symplectic(p),
            Target::Shear(k) => SymplecticMap::new(k.symplectic(), 0.0)?,
        })
    }
}

fn deviation(schedule: &Schedule, target: &SymplecticMap) -> CliResult<f64> {
    let composed = schedule.verify()?;
    if composed.modes() != target.modes() {
        return Err(qrl_core::Error::DimensionMismatch {
            expected: target.modes(),
            found: composed.modes(),
        }
        .into());
    }
    Ok(max_deviation(composed.matrix(), target.matrix()))
}

fn cmd_compile(a: &CompileArgs) -> CliResult<u8> {
    check_tolerance(a.tolerance)?;
    let target = Target::load(&a.input, a.target_kind, a.tolerance)?;
    let schedule = match &target {
        Target::Unitary(u) => compile_bs(
            u,
            match a.layout {
                LayoutKind::Triangular => Layout::Triangular,
                LayoutKind::Rectangular => Layout::Rectangular,
            },
        )?,
        Target::Bogoliubov(p) => compile_gaussian(p)?,
        Target::Shear(k) => compile_shear(k)?,
    };
    emit(Some(&a.output), &schedule.to_json()?)?;
    println!("modes {}", schedule.modes);
    println!("instructions {}", schedule.instructions.len());
    for role in [
        Role::Beamsplitter,
        Role::Phase,
        Role::Squeeze,
        Role::ShearPair,
        Role::Shear,
        Role::Identity,
    ] {
        let n = schedule.count_role(role);
        if n > 0 {
            println!("{} {n}", role.as_str());
        }
    }
    let (rows, cols) = schedule.footprint();
    println!("footprint {rows} x {cols}");
    println!("lattice_period {}", schedule.lattice_period);
    println!("deviation {:e}", deviation(&schedule, &target.symplectic()?)?);
    Ok(0)
}

fn cmd_verify(a: &VerifyArgs) -> CliResult<u8> {
    check_tolerance(a.tolerance)?;
    let schedule = load_schedule(&a.input)?;
    let target = Target::load(&a.target, a.target_kind, 1e-9)?.symplectic()?;
    let dev = deviation(&schedule, &target)?;
    let pass = dev <= a.tolerance;
    println!("deviation {dev:e}");
    println!("tolerance {:e}", a.tolerance);
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { 0 } else { 1 })
}

fn cmd_simulate(a: &SimulateArgs) -> CliResult<u8> {
    check_tolerance(a.tolerance)?;
    let levels = if a.sweep.is_empty() { vec![a.r_db] } else { a.sweep.clone() };
    if let Some(bad) = levels.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
        return Err(CliError::Invalid(format!("squeezing {bad:e} dB must be finite and non-negative")));
    }
    let schedule = load_schedule(&a.input)?;
    let target = match &a.target {
        Some(p) => Target::load(p, a.target_kind, a.tolerance)?.symplectic()?,
        None => schedule.verify()?,
    };
    if target.modes() != schedule.modes {
        return Err(qrl_core::Error::DimensionMismatch {
            expected: schedule.modes,
            found: target.modes(),
        }
        .into());
    }
    let inputs = GaussianState::vacuum(schedule.modes);
    let reports: Vec<RunReport> = levels
        .iter()
        .map(|&db| run_report(&schedule, &inputs, &target, db, a.seed))
        .collect::<Result<_, _>>()?;
    for r in &reports {
        eprintln!("r_db {:e} distance {:e}", r.r_db, r.target_distance_frobenius);
    }
    let text = if a.sweep.is_empty() {
        serde_json::to_string_pretty(&reports[0])?
    } else {
        serde_json::to_string_pretty(&reports)?
    };
    emit(a.output.as_deref(), &(text + "\n"))?;
    Ok(0)
}

fn cmd_layout(a: &LayoutArgs) -> CliResult<u8> {
    let schedule = load_schedule(&a.input)?;
    let text = match a.format {
        Format::Json => schedule.to_json()? + "\n",
        Format::Ascii => render::ascii(&schedule),
        Format::Svg => render::svg(&schedule),
    };
    emit(a.output.as_deref(), &text)?;
    Ok(0)
}

fn cmd_random(a: &RandomArgs) -> CliResult<u8> {
    if a.modes == 0 {
        return Err(CliError::Invalid("at least one mode is required".into()));
    }
    let text = match a.target_kind {
        TargetKind::Unitary => serde_json::to_string_pretty(&random_unitary(a.modes, a.seed).to_json())?,
        TargetKind::Bogoliubov => {
            if !(a.max_r.is_finite() && a.max_r >= 0.0) {
                return Err(CliError::Invalid(format!("max squeezing {:e} must be non-negative", a.max_r)));
            }
            serde_json::to_string_pretty(&random_bogoliubov(a.modes, a.seed, a.max_r).to_json())?
        }
        TargetKind::Shear => serde_json::to_string_pretty(&ShearMatrix::random(a.modes, a.seed, a.bound)?.to_json())?,
    };
    emit(a.output.as_deref(), &(text + "\n"))?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compile(a) => cmd_compile(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Layout(a) => cmd_layout(a),
        Command::Random(a) => cmd_random(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
