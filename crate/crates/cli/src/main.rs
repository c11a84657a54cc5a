//! Command-line front end for the double-well boson toolkit.
//!
//! Seven subcommands tie the library together:
//!
//! * `modes` — solve a double-well potential for its two lowest modes and the
//!   effective two-mode parameters.
//! * `simulate` — integrate a two-mode trajectory and export it as CSV plus a
//!   JSON metadata sidecar.
//! * `thermal` — sweep the canonical coherence fraction over a splitting
//!   range.
//! * `limits` — evaluate the imbalance/coherence limits table for the
//!   reference particle sources.
//! * `isolines` — emit constant-fragmentation contours of the equation of
//!   state.
//! * `oracle` — cross-check the reduced dynamics against exact many-body
//!   evolution and print a JSON report.
//! * `reproduce` — run the complete acceptance suite and write a summary.
//!
//! Parameters come from flags, from a JSON config file (`--config`), or from
//! built-in defaults, in that order of precedence. Outputs are deterministic:
//! an identical resolved configuration produces byte-identical artifacts, and
//! every artifact embeds a provenance header with the tool version and a hash
//! of that resolved configuration.
//!
//! Exit codes: `0` success, `1` configuration error, `2` physics
//! precondition violation, `3` acceptance failure (`reproduce` only).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

/// Error carrying its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Invalid flags, config file, or input file — exit code 1.
    #[error("{0}")]
    Config(String),
    /// Physically inadmissible request — exit code 2.
    #[error("{0}")]
    Physics(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Physics(_) => 2,
        }
    }
}

/// Library errors all signal a violated physical precondition: the request
/// was well-formed but asked for something outside the model's domain.
macro_rules! physics_error {
    ($($ty:ty),* $(,)?) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Physics(e.to_string())
            }
        }
    )*};
}

physics_error!(
    josephson_kit::density::DensityError,
    josephson_kit::dynamics::DynamicsError,
    josephson_kit::oracle::OracleError,
    josephson_kit::thermal::ThermalError,
    josephson_kit::wellmodes::WellModesError,
);

/// How frequency-like inputs (`ΔE/ħ`, `V₀/ħ`) are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Angular frequencies in rad/s, used as given.
    Angular,
    /// Cyclic frequencies in Hz, multiplied by 2π on input.
    Cyclic,
}

impl Convention {
    /// Factor converting an input value into an angular frequency.
    pub fn factor(self) -> f64 {
        match self {
            Convention::Angular => 1.0,
            Convention::Cyclic => std::f64::consts::TAU,
        }
    }
}

/// Trajectory integration engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Pure-state imbalance/phase equations; requires `f = 1`.
    Standard,
    /// Polar-variable integrator for fragmented states.
    Generalized,
    /// Direct density-matrix integration (reference engine).
    Liouville,
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Engine::Standard => "standard",
            Engine::Generalized => "generalized",
            Engine::Liouville => "liouville",
        })
    }
}

/// Built-in potential family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Square barrier between hard walls.
    Square,
    /// Gaussian barrier in a harmonic trap.
    Gaussian,
}

/// Many-body state construction for the verification oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lift {
    /// Kicked canonical equilibrium at splitting `x`.
    Thermal,
    /// Every particle in the same two-mode orbital.
    Product,
}

/// Double-well boson toolkit: mode solving, oscillation dynamics, thermal
/// coherence limits, and many-body verification.
#[derive(Debug, Parser)]
#[command(name = "josephson-kit", version)]
struct Cli {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Directory for output artifacts (default: current directory).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Interpretation of frequency-like inputs (default: angular).
    #[arg(long, global = true, value_enum)]
    convention: Option<Convention>,

    /// Integration engine for trajectory work (default: generalized).
    #[arg(long, global = true, value_enum)]
    engine: Option<Engine>,

    /// Seed for the randomized acceptance sweeps (default: 42).
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a double-well potential for its two lowest modes.
    Modes(ModesArgs),
    /// Integrate a two-mode trajectory and export CSV + JSON metadata.
    Simulate(SimulateArgs),
    /// Sweep the canonical coherence fraction over a splitting range.
    Thermal(ThermalArgs),
    /// Evaluate imbalance/coherence limits for the reference sources.
    Limits(LimitsArgs),
    /// Emit constant-fragmentation contours of the equation of state.
    Isolines(IsolinesArgs),
    /// Cross-check reduced dynamics against exact many-body evolution.
    Oracle(OracleArgs),
    /// Run the acceptance suite and write a summary report.
    Reproduce,
}

#[derive(Debug, Args)]
struct ModesArgs {
    /// Built-in potential family (default: gaussian).
    #[arg(long, value_enum, conflicts_with = "potential_file")]
    family: Option<Family>,

    /// Potential samples from a JSON or CSV file instead of a built-in
    /// family.
    #[arg(long, value_name = "PATH")]
    potential_file: Option<PathBuf>,

    /// Number of grid points (odd).
    #[arg(long)]
    n_grid: Option<usize>,

    /// Half-width of the simulation box.
    #[arg(long, allow_negative_numbers = true)]
    half_box: Option<f64>,

    /// Barrier height.
    #[arg(long, allow_negative_numbers = true)]
    barrier_height: Option<f64>,

    /// Square family: barrier half-width.
    #[arg(long, allow_negative_numbers = true)]
    barrier_half_width: Option<f64>,

    /// Gaussian family: barrier width σ.
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,

    /// Gaussian family: trap frequency ω.
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,

    /// Particle mass (for file potentials: overrides the file header).
    #[arg(long, allow_negative_numbers = true)]
    mass: Option<f64>,

    /// Also report the modes of the trap tilted by a step of this height.
    #[arg(long, allow_negative_numbers = true)]
    step: Option<f64>,

    /// Skip the grid-resolution quality gate.
    #[arg(long)]
    unchecked: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Mode splitting ΔE/ħ (frequency-like; see --convention).
    #[arg(long, allow_negative_numbers = true)]
    delta_e: Option<f64>,

    /// Well asymmetry V₀/ħ (frequency-like; see --convention).
    #[arg(long, allow_negative_numbers = true)]
    v0: Option<f64>,

    /// Total particle number N.
    #[arg(long, allow_negative_numbers = true)]
    n_total: Option<f64>,

    /// Initial population imbalance Z₀.
    #[arg(long, allow_negative_numbers = true)]
    z0: Option<f64>,

    /// Initial relative phase θ₀ in radians.
    #[arg(long, allow_negative_numbers = true)]
    theta0: Option<f64>,

    /// Coherence measure f of the initial state (1 = pure).
    #[arg(long, allow_negative_numbers = true)]
    f: Option<f64>,

    /// Duration in oscillation periods 2π/Ω.
    #[arg(long, allow_negative_numbers = true)]
    periods: Option<f64>,

    /// Number of output rows after the initial one.
    #[arg(long)]
    samples: Option<usize>,

    /// Integrator steps per oscillation period.
    #[arg(long)]
    steps_per_period: Option<u32>,

    /// Output file stem: writes <stem>.csv and <stem>.json.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Debug, Args)]
struct ThermalArgs {
    /// Particle number N.
    #[arg(long = "N", value_name = "N")]
    n: Option<u64>,

    /// Splitting sweep range x = ΔE/(k_B T) as LO:HI, log-spaced.
    #[arg(long, value_name = "LO:HI")]
    x_range: Option<String>,

    /// Number of sweep points.
    #[arg(long)]
    points: Option<usize>,
}

#[derive(Debug, Args)]
struct LimitsArgs {
    /// Mode splitting ΔE/ħ (frequency-like; see --convention).
    #[arg(long = "deltaE-over-hbar", value_name = "FREQ", allow_negative_numbers = true)]
    delta_e_over_hbar: Option<f64>,

    /// Tilt ratio V₀/ΔE.
    #[arg(long, allow_negative_numbers = true)]
    v: Option<f64>,
}

#[derive(Debug, Args)]
struct IsolinesArgs {
    /// Comma-separated fragmentation levels of the contours.
    #[arg(long, value_name = "F1,F2,...", allow_hyphen_values = true)]
    f_values: Option<String>,

    /// Tilt ratio V₀/ΔE.
    #[arg(long, allow_negative_numbers = true)]
    v: Option<f64>,

    /// Sample count per contour (each contour emits this many + 1 points).
    #[arg(long)]
    resolution: Option<usize>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Particle number for the exact evolution (Fock dimension N + 1).
    #[arg(long = "N", value_name = "N")]
    n: Option<usize>,

    /// Mode splitting ΔE/ħ (frequency-like; see --convention).
    #[arg(long, allow_negative_numbers = true)]
    delta_e: Option<f64>,

    /// Well asymmetry V₀/ħ (frequency-like; see --convention).
    #[arg(long, allow_negative_numbers = true)]
    v0: Option<f64>,

    /// Many-body state construction to verify against (default: thermal).
    #[arg(long, value_enum)]
    lift: Option<Lift>,

    /// Thermal lift: splitting x = ΔE/(k_B T).
    #[arg(long, allow_negative_numbers = true)]
    x: Option<f64>,

    /// Thermal lift: left/right kick as a fraction of N.
    #[arg(long, allow_negative_numbers = true)]
    kick_frac: Option<f64>,

    /// Product lift: real part of the lower-mode coefficient.
    #[arg(long, allow_negative_numbers = true)]
    c0_re: Option<f64>,

    /// Product lift: imaginary part of the lower-mode coefficient.
    #[arg(long, allow_negative_numbers = true)]
    c0_im: Option<f64>,

    /// Product lift: real part of the upper-mode coefficient.
    #[arg(long, allow_negative_numbers = true)]
    c1_re: Option<f64>,

    /// Product lift: imaginary part of the upper-mode coefficient.
    #[arg(long, allow_negative_numbers = true)]
    c1_im: Option<f64>,

    /// Duration in oscillation periods.
    #[arg(long, allow_negative_numbers = true)]
    periods: Option<f64>,

    /// Number of comparison samples.
    #[arg(long)]
    samples: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version print to stdout and succeed; anything else
            // is a configuration error.
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    init_thread_pool()?;
    let file = config::load(cli.config.as_deref())?;
    let out = cli
        .out
        .or_else(|| file.out.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let convention = config::pick(cli.convention, file.convention, Convention::Angular);
    let engine = config::pick(cli.engine, file.engine, Engine::Generalized);
    let seed = config::pick(cli.seed, file.seed, 42);
    match cli.command {
        Command::Modes(args) => commands::modes(args, &file.modes, &out),
        Command::Simulate(args) => {
            commands::simulate(args, &file.simulate, &out, convention, engine)
        }
        Command::Thermal(args) => commands::thermal(args, &file.thermal, &out),
        Command::Limits(args) => commands::limits(args, &file.limits, &out, convention),
        Command::Isolines(args) => commands::isolines(args, &file.isolines, &out),
        Command::Oracle(args) => commands::oracle(args, &file.oracle, &out, convention),
        Command::Reproduce => commands::reproduce(&out, seed),
    }
}

/// Honours the `JOSEPHSON_KIT_THREADS` cap on internal data parallelism.
fn init_thread_pool() -> Result<(), CliError> {
    match std::env::var("JOSEPHSON_KIT_THREADS") {
        Ok(raw) => {
            let threads: usize = raw.trim().parse().map_err(|_| {
                CliError::Config(format!(
                    "JOSEPHSON_KIT_THREADS must be a non-negative integer, got {raw:?}"
                ))
            })?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global()
                .map_err(|e| CliError::Config(format!("cannot configure thread pool: {e}")))
        }
        Err(std::env::VarError::NotPresent) => Ok(()),
        Err(e) => Err(CliError::Config(format!("JOSEPHSON_KIT_THREADS: {e}"))),
    }
}
