//! The seven subcommand implementations.
//!
//! Each command resolves its parameters (flags over config file over
//! defaults) into a serializable record, derives the provenance header from
//! that record, runs the library, and writes its artifacts through
//! [`crate::output`] so the results are deterministic.

use std::fs;
use std::path::Path;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use josephson_kit::acceptance::run_all;
use josephson_kit::density::{to_left_right, to_modes};
use josephson_kit::dynamics::{
    integrate_generalized_with_steps, integrate_liouville, integrate_liouville_with_steps,
    integrate_standard_with_steps, IntegratorInfo, DEFAULT_STEPS_PER_PERIOD,
};
use josephson_kit::oracle::{
    lift_product, lift_thermal_with_coherence, mode_energies_for, oracle_check,
};
use josephson_kit::thermal::{
    canonical_alphas, equilibrium_state, kicked_state, limits_table, reference_scenarios,
    ThermalError,
};
use josephson_kit::wellmodes::{perturbed_modes, two_mode_params};
use josephson_kit::{
    BasisTransform, EffectiveDensityMatrixLR, ModePair, PotentialSpec, ThermalEnsemble,
    Trajectory, TwoModeParams,
};

use crate::config::{
    pick, provenance, IsolinesFile, LimitsFile, ModesFile, OracleFile, Provenance, SimulateFile,
    ThermalFile,
};
use crate::output::{self, fmt};
use crate::{
    CliError, Convention, Engine, Family, IsolinesArgs, Lift, LimitsArgs, ModesArgs, OracleArgs,
    SimulateArgs, ThermalArgs,
};

// ---------------------------------------------------------------------------
// modes

#[derive(Debug, Clone, Serialize)]
struct ResolvedModes {
    command: &'static str,
    family: Option<Family>,
    potential_file: Option<String>,
    potential_sha256: Option<String>,
    n_grid: usize,
    half_box: Option<f64>,
    barrier_height: Option<f64>,
    barrier_half_width: Option<f64>,
    sigma: Option<f64>,
    omega: Option<f64>,
    mass: f64,
    step: Option<f64>,
    unchecked: bool,
}

#[derive(Debug, Serialize)]
struct GridBlock {
    n: usize,
    dx: f64,
    x_min: f64,
    x_max: f64,
}

#[derive(Debug, Serialize)]
struct EnergyBlock {
    e0: f64,
    e1: f64,
    delta_e: f64,
    mean_energy: f64,
}

#[derive(Debug, Serialize)]
struct SidesBlock {
    epsilon: f64,
    side_overlap: f64,
    left_mode_side_probability: f64,
    right_mode_side_probability: f64,
}

#[derive(Debug, Serialize)]
struct PerturbedBlock {
    step: f64,
    e0: f64,
    e1: f64,
    delta_e: f64,
    mixing_amplitude: f64,
    step_caution: bool,
}

#[derive(Debug, Serialize)]
struct ModesReport {
    provenance: Provenance,
    config: ResolvedModes,
    grid: GridBlock,
    energies: EnergyBlock,
    sides: Option<SidesBlock>,
    two_mode: Option<TwoModeParams>,
    perturbed: Option<PerturbedBlock>,
    notes: Vec<String>,
}

pub fn modes(args: ModesArgs, file: &ModesFile, out: &Path) -> Result<u8, CliError> {
    let unchecked = args.unchecked || file.unchecked.unwrap_or(false);
    let step = args.step.or(file.step);
    let potential_file = args
        .potential_file
        .clone()
        .or_else(|| file.potential_file.clone());

    let (spec, resolved) = if let Some(path) = potential_file {
        let loaded = load_potential(&path)?;
        let mass = pick(args.mass, file.mass, loaded.header_mass.unwrap_or(1.0));
        let resolved = ResolvedModes {
            command: "modes",
            family: None,
            potential_file: Some(path.display().to_string()),
            potential_sha256: Some(loaded.sha256),
            n_grid: loaded.x.len(),
            half_box: None,
            barrier_height: None,
            barrier_half_width: None,
            sigma: None,
            omega: None,
            mass,
            step,
            unchecked,
        };
        let spec = PotentialSpec::from_samples(loaded.x, loaded.v, mass)?;
        (spec, resolved)
    } else {
        // The smooth family is the default: it clears the grid-quality gate
        // at the default resolution, while the discontinuous square barrier
        // needs either a much finer grid or --unchecked.
        let family = pick(args.family, file.family, Family::Gaussian);
        let n_grid = pick(args.n_grid, file.n_grid, 2049);
        let mass = pick(args.mass, file.mass, 1.0);
        match family {
            Family::Square => {
                let half_box = pick(args.half_box, file.half_box, 10.0);
                let barrier_half_width =
                    pick(args.barrier_half_width, file.barrier_half_width, 2.0);
                let barrier_height = pick(args.barrier_height, file.barrier_height, 0.5);
                let spec = PotentialSpec::square_double_well(
                    n_grid,
                    half_box,
                    barrier_half_width,
                    barrier_height,
                    mass,
                )?;
                let resolved = ResolvedModes {
                    command: "modes",
                    family: Some(family),
                    potential_file: None,
                    potential_sha256: None,
                    n_grid,
                    half_box: Some(half_box),
                    barrier_height: Some(barrier_height),
                    barrier_half_width: Some(barrier_half_width),
                    sigma: None,
                    omega: None,
                    mass,
                    step,
                    unchecked,
                };
                (spec, resolved)
            }
            Family::Gaussian => {
                let half_box = pick(args.half_box, file.half_box, 6.0);
                let omega = pick(args.omega, file.omega, 1.0);
                let barrier_height = pick(args.barrier_height, file.barrier_height, 5.0);
                let sigma = pick(args.sigma, file.sigma, 1.0);
                let spec = PotentialSpec::gaussian_barrier_trap(
                    n_grid,
                    half_box,
                    omega,
                    barrier_height,
                    sigma,
                    mass,
                )?;
                let resolved = ResolvedModes {
                    command: "modes",
                    family: Some(family),
                    potential_file: None,
                    potential_sha256: None,
                    n_grid,
                    half_box: Some(half_box),
                    barrier_height: Some(barrier_height),
                    barrier_half_width: None,
                    sigma: Some(sigma),
                    omega: Some(omega),
                    mass,
                    step,
                    unchecked,
                };
                (spec, resolved)
            }
        }
    };

    let prov = provenance(&resolved);
    let pair: ModePair = if resolved.unchecked {
        spec.solve_two_modes_unchecked()?
    } else {
        spec.solve_two_modes()?
    };

    let mut notes = Vec::new();
    let sides = match pair.left_right() {
        Ok(lr) => Some(SidesBlock {
            epsilon: lr.epsilon,
            side_overlap: pair.side_overlap(),
            left_mode_side_probability: pair.side_probability(&lr.phi_l),
            right_mode_side_probability: pair.side_probability(&lr.phi_r),
        }),
        Err(e) => {
            notes.push(format!("left/right analysis unavailable: {e}"));
            None
        }
    };
    let two_mode = match two_mode_params(&pair, resolved.step.unwrap_or(0.0)) {
        Ok(params) => Some(params),
        // A tilt was requested explicitly, so an unsuitable trap is an error;
        // without one the report simply omits the effective parameters.
        Err(e) if resolved.step.is_some() => return Err(e.into()),
        Err(e) => {
            notes.push(format!("effective two-mode parameters unavailable: {e}"));
            None
        }
    };
    let perturbed = match resolved.step {
        Some(height) => {
            let tilted = perturbed_modes(&pair, height)?;
            Some(PerturbedBlock {
                step: height,
                e0: tilted.e0,
                e1: tilted.e1,
                delta_e: tilted.e1 - tilted.e0,
                mixing_amplitude: tilted.eta,
                step_caution: tilted.step_caution,
            })
        }
        None => None,
    };

    let report = ModesReport {
        provenance: prov,
        config: resolved,
        grid: GridBlock {
            n: pair.x.len(),
            dx: pair.dx,
            x_min: pair.x[0],
            x_max: pair.x[pair.x.len() - 1],
        },
        energies: EnergyBlock {
            e0: pair.e0,
            e1: pair.e1,
            delta_e: pair.delta_e(),
            mean_energy: pair.mean_energy(),
        },
        sides,
        two_mode,
        perturbed,
        notes,
    };
    let path = output::prepare(out, "modes.json")?;
    output::write_json(&path, &report)?;
    match &report.sides {
        Some(sides) => println!(
            "modes: ΔE = {:.6e}, ε = {:.6e} → {}",
            report.energies.delta_e,
            sides.epsilon,
            path.display()
        ),
        None => println!(
            "modes: ΔE = {:.6e} (no left/right split) → {}",
            report.energies.delta_e,
            path.display()
        ),
    }
    Ok(0)
}

/// Potential samples read from a user file, before mass/scale resolution.
struct LoadedPotential {
    x: Vec<f64>,
    v: Vec<f64>,
    header_mass: Option<f64>,
    sha256: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialJson {
    x: Vec<f64>,
    v: Vec<f64>,
    mass: Option<f64>,
    length_scale: Option<f64>,
    energy_scale: Option<f64>,
}

/// Reads potential samples from JSON (`{"x": [...], "v": [...], "mass": m}`)
/// or CSV (`x,v` rows; `#` comment lines may carry `mass=`, `length_scale=`,
/// `energy_scale=` entries). Scales multiply the grid and the potential on
/// load, so the library always works in natural units.
fn load_potential(path: &Path) -> Result<LoadedPotential, CliError> {
    let bad = |detail: String| {
        CliError::Config(format!("potential file {}: {detail}", path.display()))
    };
    let bytes = fs::read(path)
        .map_err(|e| CliError::Config(format!("cannot read potential file {}: {e}", path.display())))?;
    let sha256 = format!("{:x}", Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|e| bad(e.to_string()))?;

    let json_like = path.extension().and_then(|e| e.to_str()) == Some("json")
        || text.trim_start().starts_with('{');
    let (mut x, mut v, header_mass, length_scale, energy_scale) = if json_like {
        let doc: PotentialJson = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        (
            doc.x,
            doc.v,
            doc.mass,
            doc.length_scale.unwrap_or(1.0),
            doc.energy_scale.unwrap_or(1.0),
        )
    } else {
        let mut x = Vec::new();
        let mut v = Vec::new();
        let mut header_mass = None;
        let mut length_scale = 1.0;
        let mut energy_scale = 1.0;
        for (index, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for token in rest.split_whitespace() {
                    let Some((key, value)) = token.split_once('=') else {
                        continue;
                    };
                    let value: f64 = value
                        .parse()
                        .map_err(|_| bad(format!("header entry {token:?} is not a number")))?;
                    match key.trim() {
                        "mass" => header_mass = Some(value),
                        "length_scale" => length_scale = value,
                        "energy_scale" => energy_scale = value,
                        other => return Err(bad(format!("unknown header key {other:?}"))),
                    }
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed = match fields.as_slice() {
                [a, b] => a.parse::<f64>().and_then(|a| b.parse::<f64>().map(|b| (a, b))),
                _ => {
                    return Err(bad(format!(
                        "line {} has {} fields, expected 2",
                        index + 1,
                        fields.len()
                    )))
                }
            };
            match parsed {
                Ok((xi, vi)) => {
                    x.push(xi);
                    v.push(vi);
                }
                // The first unparsable row is tolerated as a column header.
                Err(_) if x.is_empty() => continue,
                Err(e) => return Err(bad(format!("line {}: {e}", index + 1))),
            }
        }
        (x, v, header_mass, length_scale, energy_scale)
    };
    if x.is_empty() {
        return Err(bad("no potential samples found".into()));
    }
    if !(length_scale > 0.0 && length_scale.is_finite()) || !energy_scale.is_finite() {
        return Err(bad(format!(
            "scales must be finite and the length scale positive, got length_scale={length_scale}, energy_scale={energy_scale}"
        )));
    }
    for value in &mut x {
        *value *= length_scale;
    }
    for value in &mut v {
        *value *= energy_scale;
    }
    Ok(LoadedPotential {
        x,
        v,
        header_mass,
        sha256,
    })
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Debug, Clone, Serialize)]
struct ResolvedSimulate {
    command: &'static str,
    convention: Convention,
    engine: Engine,
    delta_e: f64,
    v0: f64,
    n_total: f64,
    z0: f64,
    theta0: f64,
    f: f64,
    periods: f64,
    samples: usize,
    steps_per_period: u32,
    name: String,
}

#[derive(Debug, Serialize)]
struct TrajectorySidecar {
    provenance: Provenance,
    config: ResolvedSimulate,
    params: TwoModeParams,
    initial_state: EffectiveDensityMatrixLR,
    conserved_f: f64,
    t_end: f64,
    rows: usize,
    integrator: IntegratorInfo<f64>,
}

pub fn simulate(
    args: SimulateArgs,
    file: &SimulateFile,
    out: &Path,
    convention: Convention,
    engine: Engine,
) -> Result<u8, CliError> {
    let resolved = ResolvedSimulate {
        command: "simulate",
        convention,
        engine,
        delta_e: pick(args.delta_e, file.delta_e, 1.0),
        v0: pick(args.v0, file.v0, 0.0),
        n_total: pick(args.n_total, file.n_total, 1000.0),
        z0: pick(args.z0, file.z0, 0.3),
        theta0: pick(args.theta0, file.theta0, 0.0),
        f: pick(args.f, file.f, 1.0),
        periods: pick(args.periods, file.periods, 10.0),
        samples: pick(args.samples, file.samples, 1000),
        steps_per_period: pick(
            args.steps_per_period,
            file.steps_per_period,
            DEFAULT_STEPS_PER_PERIOD,
        ),
        name: pick(args.name, file.name.clone(), "trajectory".to_string()),
    };
    let prov = provenance(&resolved);
    if resolved.samples == 0 {
        return Err(CliError::Config("simulate needs at least one sample".into()));
    }
    if resolved.steps_per_period == 0 {
        return Err(CliError::Config(
            "steps per period must be at least one".into(),
        ));
    }
    if !(resolved.periods > 0.0 && resolved.periods.is_finite()) {
        return Err(CliError::Config(format!(
            "duration must be a positive number of periods, got {}",
            resolved.periods
        )));
    }

    let params = two_mode_params_from(resolved.delta_e, resolved.v0, convention)?;
    let t_end = resolved.periods * params.period();
    let t_grid = sample_grid(t_end, resolved.samples);
    let trajectory: Trajectory = match engine {
        Engine::Standard => {
            if (resolved.f - 1.0).abs() > 1e-12 {
                return Err(CliError::Physics(format!(
                    "the standard engine integrates pure states only (f = 1), got f = {}",
                    resolved.f
                )));
            }
            integrate_standard_with_steps(
                &params,
                resolved.n_total,
                resolved.z0,
                resolved.theta0,
                &t_grid,
                resolved.steps_per_period,
            )?
        }
        Engine::Generalized => integrate_generalized_with_steps(
            &params,
            &initial_state(resolved.n_total, resolved.z0, resolved.theta0, resolved.f)?,
            &t_grid,
            resolved.steps_per_period,
        )?,
        Engine::Liouville => integrate_liouville_with_steps(
            &params,
            &initial_state(resolved.n_total, resolved.z0, resolved.theta0, resolved.f)?,
            &t_grid,
            resolved.steps_per_period,
        )?,
    };

    let csv_path = output::prepare(out, &format!("{}.csv", resolved.name))?;
    output::write_csv(
        &csv_path,
        &prov,
        &[
            "t",
            "Z",
            "theta_wrapped",
            "theta_unwrapped",
            "A",
            "NL",
            "NR",
            "f",
        ],
        trajectory
            .samples
            .iter()
            .zip(&trajectory.theta_unwrapped)
            .map(|((t, state), &unwrapped)| {
                vec![
                    fmt(*t),
                    fmt(state.z()),
                    fmt(state.theta),
                    fmt(unwrapped),
                    fmt(state.a),
                    fmt(state.n_l),
                    fmt(state.n_r),
                    fmt(state.f()),
                ]
            }),
    )?;

    let sidecar = TrajectorySidecar {
        provenance: prov,
        params: trajectory.params.clone(),
        initial_state: trajectory.samples[0].1,
        conserved_f: trajectory.f,
        t_end,
        rows: trajectory.samples.len(),
        integrator: trajectory.info.clone(),
        config: resolved,
    };
    let json_path = output::prepare(out, &format!("{}.json", sidecar.config.name))?;
    output::write_json(&json_path, &sidecar)?;
    println!(
        "simulate: {} rows via the {engine} engine → {} (+ {}); f drift {:.2e} per period",
        sidecar.rows,
        csv_path.display(),
        json_path.display(),
        sidecar.integrator.f_drift_per_period,
    );
    Ok(0)
}

/// Builds the two-mode parameters from frequency-like inputs, honouring the
/// unit convention and validating what the constructor would otherwise
/// reject.
fn two_mode_params_from(
    delta_e: f64,
    v0: f64,
    convention: Convention,
) -> Result<TwoModeParams, CliError> {
    let delta_e = delta_e * convention.factor();
    let v0 = v0 * convention.factor();
    if !(delta_e > 0.0 && delta_e.is_finite() && v0.is_finite()) {
        return Err(CliError::Physics(format!(
            "the mode splitting must be positive and finite (got ΔE/ħ = {delta_e}, V₀/ħ = {v0})"
        )));
    }
    Ok(TwoModeParams::direct(delta_e, v0))
}

/// Inclusive uniform time grid with `samples + 1` points from 0 to `t_end`.
fn sample_grid(t_end: f64, samples: usize) -> Vec<f64> {
    (0..=samples)
        .map(|i| t_end * i as f64 / samples as f64)
        .collect()
}

/// Left/right state with imbalance `z0`, phase `theta0`, and coherence `f`.
fn initial_state(
    n: f64,
    z0: f64,
    theta0: f64,
    f: f64,
) -> Result<EffectiveDensityMatrixLR, CliError> {
    let y_squared = f * f - z0 * z0;
    if y_squared < -1e-12 {
        return Err(CliError::Physics(format!(
            "no state has coherence f = {f} at imbalance |Z₀| = {}; f ≥ |Z₀| is required",
            z0.abs()
        )));
    }
    Ok(EffectiveDensityMatrixLR::new(
        0.5 * n * (1.0 + z0),
        0.5 * n * (1.0 - z0),
        0.5 * n * y_squared.max(0.0).sqrt(),
        theta0,
    )?)
}

// ---------------------------------------------------------------------------
// thermal

#[derive(Debug, Clone, Serialize)]
struct ResolvedThermal {
    command: &'static str,
    n: u64,
    x_lo: f64,
    x_hi: f64,
    points: usize,
}

pub fn thermal(args: ThermalArgs, file: &ThermalFile, out: &Path) -> Result<u8, CliError> {
    let range_text = pick(args.x_range, file.x_range.clone(), "0.001:10".to_string());
    let (x_lo, x_hi) = parse_range(&range_text)?;
    let resolved = ResolvedThermal {
        command: "thermal",
        n: pick(args.n, file.n, 100),
        x_lo,
        x_hi,
        points: pick(args.points, file.points, 200),
    };
    if resolved.points < 2 {
        return Err(CliError::Config(
            "a sweep needs at least two points".into(),
        ));
    }
    let prov = provenance(&resolved);

    let ratio = x_hi / x_lo;
    let ensembles: Result<Vec<ThermalEnsemble>, ThermalError> = (0..resolved.points)
        .into_par_iter()
        .map(|i| {
            let x = x_lo * ratio.powf(i as f64 / (resolved.points - 1) as f64);
            canonical_alphas(resolved.n, x)
        })
        .collect();
    let ensembles = ensembles?;

    let path = output::prepare(out, "thermal.csv")?;
    output::write_csv(
        &path,
        &prov,
        &["x", "coherence_fraction", "alpha00", "alpha11"],
        ensembles.iter().map(|ens| {
            vec![
                fmt(ens.x),
                fmt(ens.coherence_fraction()),
                fmt(ens.alpha00),
                fmt(ens.alpha11),
            ]
        }),
    )?;
    println!(
        "thermal: N = {}, {} points over x ∈ [{x_lo}, {x_hi}] → {}; f spans {:.4} … {:.4}",
        resolved.n,
        resolved.points,
        path.display(),
        ensembles[0].coherence_fraction(),
        ensembles[ensembles.len() - 1].coherence_fraction(),
    );
    Ok(0)
}

fn parse_range(text: &str) -> Result<(f64, f64), CliError> {
    let bad = || {
        CliError::Config(format!(
            "the splitting range must be LO:HI with 0 < LO < HI, got {text:?}"
        ))
    };
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(bad());
    }
    Ok((lo, hi))
}

// ---------------------------------------------------------------------------
// limits

#[derive(Debug, Clone, Serialize)]
struct ResolvedLimits {
    command: &'static str,
    convention: Convention,
    delta_e_over_hbar: f64,
    v: f64,
}

pub fn limits(
    args: LimitsArgs,
    file: &LimitsFile,
    out: &Path,
    convention: Convention,
) -> Result<u8, CliError> {
    let resolved = ResolvedLimits {
        command: "limits",
        convention,
        delta_e_over_hbar: pick(args.delta_e_over_hbar, file.delta_e_over_hbar, 1000.0),
        v: pick(args.v, file.v, 0.0),
    };
    let prov = provenance(&resolved);
    let splitting = resolved.delta_e_over_hbar * convention.factor();
    if !(splitting > 0.0 && splitting.is_finite()) {
        return Err(CliError::Physics(format!(
            "the mode splitting must be positive and finite, got {splitting} rad/s"
        )));
    }
    let rows = limits_table(&reference_scenarios::<f64>(), splitting, resolved.v)?;
    let path = output::prepare(out, "limits.csv")?;
    output::write_csv(
        &path,
        &prov,
        &[
            "label",
            "temperature_K",
            "N",
            "x",
            "coherence_fraction",
            "max_imbalance",
            "min_f",
        ],
        rows.iter().map(|row| {
            vec![
                row.label.clone(),
                fmt(row.temperature_k),
                row.n.to_string(),
                fmt(row.x),
                fmt(row.coherence_fraction),
                fmt(row.max_imbalance),
                fmt(row.min_f),
            ]
        }),
    )?;
    println!(
        "limits: {} scenario rows at ΔE/ħ = {splitting} rad/s, V₀/ΔE = {} → {}",
        rows.len(),
        resolved.v,
        path.display()
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// isolines

#[derive(Debug, Clone, Serialize)]
struct ResolvedIsolines {
    command: &'static str,
    f_values: Vec<f64>,
    v: f64,
    resolution: usize,
}

pub fn isolines(args: IsolinesArgs, file: &IsolinesFile, out: &Path) -> Result<u8, CliError> {
    let f_values = match args.f_values {
        Some(text) => parse_f_list(&text)?,
        None => file
            .f_values
            .clone()
            .unwrap_or_else(|| vec![0.25, 0.5, 0.75, 1.0]),
    };
    let resolved = ResolvedIsolines {
        command: "isolines",
        f_values,
        v: pick(args.v, file.v, 0.0),
        resolution: pick(args.resolution, file.resolution, 200),
    };
    let prov = provenance(&resolved);
    let contours =
        josephson_kit::thermal::isolines(&resolved.f_values, resolved.v, resolved.resolution)?;
    let path = output::prepare(out, "isolines.csv")?;
    output::write_csv(
        &path,
        &prov,
        &["f", "dN01_over_N", "dNLR_over_N"],
        contours.iter().flat_map(|contour| {
            contour
                .points
                .iter()
                .map(move |&(g, y)| vec![fmt(contour.f), fmt(g), fmt(y)])
        }),
    )?;
    let total: usize = contours.iter().map(|c| c.points.len()).sum();
    println!(
        "isolines: {} contours, {total} points → {}",
        contours.len(),
        path.display()
    );
    Ok(0)
}

fn parse_f_list(text: &str) -> Result<Vec<f64>, CliError> {
    let values: Result<Vec<f64>, _> = text
        .split(',')
        .map(|part| part.trim().parse::<f64>())
        .collect();
    match values {
        Ok(values) if !values.is_empty() => Ok(values),
        _ => Err(CliError::Config(format!(
            "contour levels must be a comma-separated list of numbers, got {text:?}"
        ))),
    }
}

// ---------------------------------------------------------------------------
// oracle

#[derive(Debug, Clone, Serialize)]
struct ResolvedOracle {
    command: &'static str,
    convention: Convention,
    n: usize,
    delta_e: f64,
    v0: f64,
    lift: Lift,
    x: f64,
    kick_frac: f64,
    c0: [f64; 2],
    c1: [f64; 2],
    periods: f64,
    samples: usize,
}

#[derive(Debug, Serialize)]
struct OracleDoc {
    provenance: Provenance,
    config: ResolvedOracle,
    initial_state: EffectiveDensityMatrixLR,
    max_residual_per_particle: f64,
    samples_compared: usize,
    residual_threshold: f64,
    pass: bool,
    f_drift_per_period: f64,
    trace_drift_per_period: f64,
}

pub fn oracle(
    args: OracleArgs,
    file: &OracleFile,
    out: &Path,
    convention: Convention,
) -> Result<u8, CliError> {
    let resolved = ResolvedOracle {
        command: "oracle",
        convention,
        n: pick(args.n, file.n, 8),
        delta_e: pick(args.delta_e, file.delta_e, 1.0),
        v0: pick(args.v0, file.v0, 0.1),
        lift: pick(args.lift, file.lift, Lift::Thermal),
        x: pick(args.x, file.x, 1.0),
        kick_frac: pick(args.kick_frac, file.kick_frac, 0.2),
        c0: [
            pick(args.c0_re, file.c0_re, 0.8),
            pick(args.c0_im, file.c0_im, 0.0),
        ],
        c1: [
            pick(args.c1_re, file.c1_re, 0.42),
            pick(args.c1_im, file.c1_im, 0.45),
        ],
        periods: pick(args.periods, file.periods, 10.0),
        samples: pick(args.samples, file.samples, 200),
    };
    let prov = provenance(&resolved);
    if resolved.samples == 0 {
        return Err(CliError::Config("oracle needs at least one sample".into()));
    }
    if !(resolved.periods > 0.0 && resolved.periods.is_finite()) {
        return Err(CliError::Config(format!(
            "duration must be a positive number of periods, got {}",
            resolved.periods
        )));
    }

    let params = two_mode_params_from(resolved.delta_e, resolved.v0, convention)?;
    let energies = mode_energies_for(&params);
    let transform = BasisTransform::new(params.xi);
    let (state, initial) = match resolved.lift {
        Lift::Product => {
            let c0 = Complex::new(resolved.c0[0], resolved.c0[1]);
            let c1 = Complex::new(resolved.c1[0], resolved.c1[1]);
            let state = lift_product(resolved.n, c0, c1, energies)?;
            let initial = to_left_right(&state.reduce()?, &transform)?;
            (state, initial)
        }
        Lift::Thermal => {
            let ensemble = canonical_alphas(resolved.n as u64, resolved.x)?;
            let equilibrium = equilibrium_state(&ensemble, params.v_ratio())?;
            let kicked = kicked_state(&equilibrium, resolved.kick_frac * resolved.n as f64)?;
            let rho01 = to_modes(&kicked, &transform)?;
            let state = lift_thermal_with_coherence(resolved.n, rho01.a11, rho01.a01, energies)?;
            (state, kicked)
        }
    };

    let t_grid = sample_grid(resolved.periods * params.period(), resolved.samples);
    let report = oracle_check(&params, &state, &t_grid)?;
    let trajectory = integrate_liouville(&params, &initial, &t_grid)?;

    const RESIDUAL_THRESHOLD: f64 = 1e-8;
    let doc = OracleDoc {
        provenance: prov,
        config: resolved,
        initial_state: initial,
        max_residual_per_particle: report.max_residual_per_particle,
        samples_compared: report.samples,
        residual_threshold: RESIDUAL_THRESHOLD,
        pass: report.max_residual_per_particle < RESIDUAL_THRESHOLD,
        f_drift_per_period: trajectory.info.f_drift_per_period,
        trace_drift_per_period: trajectory.info.trace_drift_per_period,
    };
    let text = output::render_json(&doc);
    print!("{text}");
    let path = output::prepare(out, "oracle.json")?;
    fs::write(&path, &text)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// reproduce

#[derive(Debug, Clone, Serialize)]
struct ResolvedReproduce {
    command: &'static str,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct CheckRow {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

#[derive(Debug, Serialize)]
struct ReproduceDoc {
    provenance: Provenance,
    config: ResolvedReproduce,
    passed: usize,
    failed: usize,
    checks: Vec<CheckRow>,
}

pub fn reproduce(out: &Path, seed: u64) -> Result<u8, CliError> {
    let resolved = ResolvedReproduce {
        command: "reproduce",
        seed,
    };
    let prov = provenance(&resolved);
    let results = run_all(seed);
    for result in &results {
        println!("{result}");
    }
    let passed = results.iter().filter(|r| r.pass).count();
    let failed = results.len() - passed;
    let doc = ReproduceDoc {
        provenance: prov,
        config: resolved,
        passed,
        failed,
        checks: results
            .into_iter()
            .map(|r| CheckRow {
                id: r.id,
                name: r.name,
                pass: r.pass,
                detail: r.detail,
            })
            .collect(),
    };
    let path = output::prepare(out, "reproduce.json")?;
    output::write_json(&path, &doc)?;
    println!(
        "reproduce: {passed} passed, {failed} failed → {}",
        path.display()
    );
    Ok(if failed == 0 { 0 } else { 3 })
}
