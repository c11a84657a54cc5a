//! End-to-end checks of the toolkit, each reporting one pass/fail line.
//!
//! The checks exercise the full stack the way a user would: the thermal
//! limits table against its frozen reference numbers, the integrators against
//! the closed-form solutions and against the brute-force many-body evolution,
//! conservation laws on randomised states, the convergence rates of the
//! first-order displays and of the grid eigensolver, and the
//! equation-of-state contours. [`run_all`] executes all ten in order; every
//! tolerance is written out at the comparison site.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::density::{to_modes, BasisTransform, EffectiveDensityMatrixLR};
use crate::dynamics::{
    analytic_generalized_asymmetric, analytic_standard, analytic_standard_linearized,
    integrate_generalized, integrate_liouville, integrate_standard,
    GeneralizedSolutionConstants, StandardSolutionConstants,
};
use crate::oracle::{lift_product, lift_thermal_with_coherence, mode_energies_for, oracle_check};
use crate::thermal::{
    canonical_alphas, equilibrium_state, f_equation_of_state, isolines,
    kicked_imbalance_first_order, kicked_state, limits_table, reference_scenarios,
};
use crate::wellmodes::{perturbed_modes, step_profile, ModePair, PotentialSpec, TwoModeParams};

/// Mode splitting of the reference trap behind the limits table, `ΔE/ħ` in
/// rad/s.
const REFERENCE_SPLITTING: f64 = 1000.0;

/// Frozen reference rows of the limits table at `ΔE/ħ = 1000 rad/s`, `v = 0`:
/// `(source, N, largest kick fraction, smallest fragmentation)`, printed to
/// the precision they are checked at.
const REFERENCE_LIMITS: [(&str, u64, f64, f64); 12] = [
    ("supersonic beam", 10_000, 1.000, 0.0000),
    ("supersonic beam", 100_000, 1.000, 0.0000),
    ("supersonic beam", 1_000_000, 1.000, 0.0001),
    ("magneto-optical trap", 10_000, 0.9987, 0.0506),
    ("magneto-optical trap", 100_000, 0.8967, 0.4426),
    ("magneto-optical trap", 1_000_000, 0.3567, 0.9342),
    ("collimated beam", 10_000, 0.2275, 0.9738),
    ("collimated beam", 100_000, 0.0724, 0.9974),
    ("collimated beam", 1_000_000, 0.0229, 0.9997),
    ("condensate", 10_000, 0.0187, 0.9998),
    ("condensate", 100_000, 0.0059, 1.0000),
    ("condensate", 1_000_000, 0.0019, 1.0000),
];

/// Outcome of one end-to-end check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    /// Position in the fixed check list (1-based).
    pub id: usize,
    /// Short name of what the check verifies.
    pub name: &'static str,
    /// Whether every assertion of the check held.
    pub pass: bool,
    /// One-line summary of the measured numbers, or of the failure.
    pub detail: String,
}

impl CheckResult {
    /// The canonical one-line report.
    pub fn line(&self) -> String {
        format!(
            "[{}] check {:2} — {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

impl std::fmt::Display for CheckResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.line())
    }
}

/// Runs all ten checks in their fixed order. `seed` feeds the randomised
/// state sweep of the conservation check.
pub fn run_all(seed: u64) -> Vec<CheckResult> {
    vec![
        check_reference_limits(),
        check_condensate_row(),
        check_oscillation_frequencies(),
        check_equilibrium_fixed_point(),
        check_kicked_first_order(),
        check_conservation_and_engine_agreement(seed),
        check_many_body_oracle(),
        check_first_order_convergence(),
        check_eigensolver_convergence(),
        check_equation_of_state_isolines(),
    ]
}

// ---------------------------------------------------------------------------
// Shared helpers.

fn seal(id: usize, name: &'static str, outcome: Result<(bool, String), String>) -> CheckResult {
    match outcome {
        Ok((pass, detail)) => CheckResult {
            id,
            name,
            pass,
            detail,
        },
        Err(e) => CheckResult {
            id,
            name,
            pass: false,
            detail: format!("aborted: {e}"),
        },
    }
}

fn time_grid(t_end: f64, count: usize) -> Vec<f64> {
    (0..=count)
        .map(|i| t_end * i as f64 / count as f64)
        .collect()
}

fn lr_state(
    n: f64,
    z: f64,
    y: f64,
    theta: f64,
) -> Result<EffectiveDensityMatrixLR<f64>, String> {
    EffectiveDensityMatrixLR::new(
        n * (1.0 + z) / 2.0,
        n * (1.0 - z) / 2.0,
        n * y / 2.0,
        theta,
    )
    .map_err(|e| e.to_string())
}

fn trapezoid_mean(t: &[f64], z: &[f64]) -> f64 {
    let mut area = 0.0;
    for i in 1..t.len() {
        area += 0.5 * (z[i] + z[i - 1]) * (t[i] - t[i - 1]);
    }
    area / (t[t.len() - 1] - t[0])
}

// ---------------------------------------------------------------------------
// Check 1 — the full limits table against its reference rows.

/// The twelve-row limits table (four particle sources at three sizes) must
/// reproduce the reference values of the largest admissible kick fraction to
/// `±2·10⁻³` and of the smallest reachable fragmentation to `±2·10⁻³`
/// (`±5·10⁻⁵` for the supersonic rows, whose values sit at the last printed
/// digit), evaluated in under a second.
pub fn check_reference_limits() -> CheckResult {
    let name = "limits table reproduces the reference rows";
    let body = || -> Result<(bool, String), String> {
        let start = Instant::now();
        let rows = limits_table(&reference_scenarios::<f64>(), REFERENCE_SPLITTING, 0.0)
            .map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        if rows.len() != REFERENCE_LIMITS.len() {
            return Err(format!("expected 12 rows, got {}", rows.len()));
        }
        let mut failures = String::new();
        let mut worst_y = 0.0f64;
        let mut worst_f = 0.0f64;
        for (row, &(label, n, y_ref, f_ref)) in rows.iter().zip(&REFERENCE_LIMITS) {
            if row.label != label || row.n != n {
                return Err(format!(
                    "row order mismatch: got {} N={}, expected {} N={}",
                    row.label, row.n, label, n
                ));
            }
            let y_tol = 2e-3;
            let f_tol = if label == "supersonic beam" { 5e-5 } else { 2e-3 };
            let dy = (row.max_imbalance - y_ref).abs();
            let df = (row.min_f - f_ref).abs();
            worst_y = worst_y.max(dy);
            worst_f = worst_f.max(df);
            if dy > y_tol {
                let _ = write!(
                    failures,
                    "; {label} N={n} kick fraction {:.6} vs reference {y_ref} (|Δ| = {dy:.2e} > {y_tol:.0e})",
                    row.max_imbalance
                );
            }
            if df > f_tol {
                let _ = write!(
                    failures,
                    "; {label} N={n} fragmentation {:.6e} vs reference {f_ref} (|Δ| = {df:.2e} > {f_tol:.0e})",
                    row.min_f
                );
            }
        }
        let in_time = elapsed < Duration::from_secs(1);
        if !in_time {
            let _ = write!(failures, "; table took {elapsed:.2?} (budget 1 s)");
        }
        let pass = failures.is_empty() && in_time;
        let detail = if pass {
            format!(
                "all 12 rows match (worst kick-fraction deviation {worst_y:.1e}, \
                 worst fragmentation deviation {worst_f:.1e}) in {elapsed:.2?}"
            )
        } else {
            format!("evaluated in {elapsed:.2?}{failures}")
        };
        Ok((pass, detail))
    };
    seal(1, name, body())
}

// ---------------------------------------------------------------------------
// Check 2 — the condensate row at ten thousand particles.

/// The coldest source at `N = 10⁴` must give a largest kick fraction of
/// `0.0187 ± 5·10⁻⁴` and a smallest fragmentation of `0.9998 ± 10⁻⁴`.
pub fn check_condensate_row() -> CheckResult {
    let name = "condensate source limits at N = 10⁴";
    let body = || -> Result<(bool, String), String> {
        let rows = limits_table(&reference_scenarios::<f64>(), REFERENCE_SPLITTING, 0.0)
            .map_err(|e| e.to_string())?;
        let row = rows
            .iter()
            .find(|r| r.label == "condensate" && r.n == 10_000)
            .ok_or("condensate row missing from the table")?;
        let dy = (row.max_imbalance - 0.0187).abs();
        let df = (row.min_f - 0.9998).abs();
        let pass = dy <= 5e-4 && df <= 1e-4;
        Ok((
            pass,
            format!(
                "kick fraction {:.6} (reference 0.0187 ± 5e-4), fragmentation {:.6} \
                 (reference 0.9998 ± 1e-4)",
                row.max_imbalance, row.min_f
            ),
        ))
    };
    seal(2, name, body())
}

// ---------------------------------------------------------------------------
// Check 3 — measured oscillation frequencies.

/// The frequency estimated from mean crossings of `Z(t)` over twenty periods
/// must match `√(ΔE² + V₀²)/ħ` for a tilted trap (pure-state engine) and
/// `ΔE/ħ` for a symmetric trap (polar engine), both to a relative `10⁻⁴`.
pub fn check_oscillation_frequencies() -> CheckResult {
    let name = "measured frequencies match the tilted splitting";
    let body = || -> Result<(bool, String), String> {
        // Tilted trap, pure state.
        let params = TwoModeParams::direct(1.0, 0.1);
        let t = time_grid(20.0 * params.period(), 256);
        let traj =
            integrate_standard(&params, 1000.0, 0.3, 0.4, &t).map_err(|e| e.to_string())?;
        let freq = traj
            .info
            .frequency_estimate
            .ok_or("no frequency estimate from the tilted run")?;
        let rel_tilted = ((freq - params.omega()) / params.omega()).abs();

        // Symmetric trap, fragmented state.
        let params_sym = TwoModeParams::direct(1.0, 0.0);
        let init = lr_state(1000.0, 0.3, 0.5, 0.2)?;
        let t2 = time_grid(20.0 * params_sym.period(), 256);
        let traj2 =
            integrate_generalized(&params_sym, &init, &t2).map_err(|e| e.to_string())?;
        let freq2 = traj2
            .info
            .frequency_estimate
            .ok_or("no frequency estimate from the symmetric run")?;
        let rel_sym = ((freq2 - params_sym.delta_e) / params_sym.delta_e).abs();

        let pass = rel_tilted <= 1e-4 && rel_sym <= 1e-4;
        Ok((
            pass,
            format!(
                "tilted trap √(ΔE²+V₀²) relative error {rel_tilted:.1e}, symmetric trap \
                 ΔE relative error {rel_sym:.1e} (budget 1e-4 each)"
            ),
        ))
    };
    seal(3, name, body())
}

// ---------------------------------------------------------------------------
// Check 4 — thermal equilibrium is a fixed point.

/// The equilibrium state — occupations `(N ∓ v·δN₀₁)/2` with coherence
/// `δN₀₁/2` at `θ = 0` — must stay put under the full dynamics: over ten
/// periods the left population may drift by at most `(10⁻⁹ + v²)·N`, for
/// tilt ratios `v ∈ {0, 0.05, π/20}`.
pub fn check_equilibrium_fixed_point() -> CheckResult {
    let name = "thermal equilibrium is a fixed point";
    let body = || -> Result<(bool, String), String> {
        let nf = 1000.0;
        let ens = canonical_alphas(1000u64, 0.004f64).map_err(|e| e.to_string())?;
        let d01 = ens.delta_n01();
        let mut pass = true;
        let mut parts = Vec::new();
        for v in [0.0, 0.05, PI / 20.0] {
            let params = TwoModeParams::direct(1.0, v);
            // The equilibrium direction is parallel to the rotation axis for
            // every tilt, so it is an exact stationary state; build it
            // directly (the first-order thermal helper gates its tilt at
            // 0.15, just below π/20).
            let state = EffectiveDensityMatrixLR::new(
                (nf - v * d01) / 2.0,
                (nf + v * d01) / 2.0,
                d01 / 2.0,
                0.0,
            )
            .map_err(|e| e.to_string())?;
            let t = time_grid(10.0 * params.period(), 400);
            let traj = integrate_liouville(&params, &state, &t).map_err(|e| e.to_string())?;
            let n_l0 = state.n_l;
            let drift = traj
                .samples
                .iter()
                .map(|(_, s)| (s.n_l - n_l0).abs())
                .fold(0.0, f64::max);
            let budget = (1e-9 + v * v) * nf;
            pass &= drift <= budget;
            parts.push(format!("v={v:.4}: N_L drift {drift:.1e} (budget {budget:.1e})"));
        }
        Ok((pass, parts.join("; ")))
    };
    seal(4, name, body())
}

// ---------------------------------------------------------------------------
// Check 5 — kicked imbalance follows the first-order closed form.

/// After a kick of `0.2·N` particles, the integrated imbalance must track
/// `Z(t) = −v·g + 0.2·cos(ΔE·t)` over five periods: both the worst pointwise
/// deviation and the deviation of the window averages (trapezoid on the same
/// grid) must stay within `10·v² + 10⁻⁹`, for `v ∈ {0, 0.05}`.
pub fn check_kicked_first_order() -> CheckResult {
    let name = "kicked imbalance follows the first-order form";
    let body = || -> Result<(bool, String), String> {
        let nf = 1000.0;
        let kick = 0.2 * nf;
        let ens = canonical_alphas(1000u64, 0.004f64).map_err(|e| e.to_string())?;
        let mut pass = true;
        let mut parts = Vec::new();
        for v in [0.0, 0.05] {
            let params = TwoModeParams::direct(1.0, v);
            let eq = equilibrium_state(&ens, v).map_err(|e| e.to_string())?;
            let kicked = kicked_state(&eq, kick).map_err(|e| e.to_string())?;
            let t = time_grid(5.0 * params.period(), 1000);
            let traj = integrate_liouville(&params, &kicked, &t).map_err(|e| e.to_string())?;
            let z_num = traj.imbalances();
            let z_ref = t
                .iter()
                .map(|&ti| {
                    kicked_imbalance_first_order(&ens, v, kick, params.delta_e, ti)
                        .map_err(|e| e.to_string())
                })
                .collect::<Result<Vec<f64>, String>>()?;
            let max_dev = z_num
                .iter()
                .zip(&z_ref)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let mean_dev = (trapezoid_mean(&t, &z_num) - trapezoid_mean(&t, &z_ref)).abs();
            let budget = 10.0 * v * v + 1e-9;
            pass &= max_dev <= budget && mean_dev <= budget;
            parts.push(format!(
                "v={v}: worst {max_dev:.1e}, window averages differ by {mean_dev:.1e} \
                 (budget {budget:.1e})"
            ));
        }
        Ok((pass, parts.join("; ")))
    };
    seal(5, name, body())
}

// ---------------------------------------------------------------------------
// Check 6 — conservation and engine agreement on random states.

/// Two hundred randomised states (`Z ∈ [−0.9, 0.9]`, coherence fraction up to
/// `0.999` of the pure-state bound, any phase, tilt ratio up to `0.12`) must
/// conserve the fragmentation to `10⁻⁹` per period in both the Bloch and the
/// polar engine; on fully coherent states the polar and pure-state engines
/// must agree on `Z(t)` to `10⁻⁸` over ten periods.
pub fn check_conservation_and_engine_agreement(seed: u64) -> CheckResult {
    let name = "conservation and engine agreement on random states";
    let body = || -> Result<(bool, String), String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nf = 100.0;
        let mut worst_drift = 0.0f64;
        for _ in 0..200 {
            let z: f64 = rng.gen_range(-0.9..0.9);
            let s = (1.0 - z * z).sqrt();
            let y = rng.gen_range(1e-4..0.999 * s);
            let theta = rng.gen_range(-PI..PI);
            let v = rng.gen_range(0.0..0.12);
            let params = TwoModeParams::direct(1.0, v);
            let init = lr_state(nf, z, y, theta)?;
            let t = [0.0, 3.0 * params.period()];
            let bloch = integrate_liouville(&params, &init, &t).map_err(|e| e.to_string())?;
            let polar =
                integrate_generalized(&params, &init, &t).map_err(|e| e.to_string())?;
            worst_drift = worst_drift
                .max(bloch.info.f_drift_per_period)
                .max(polar.info.f_drift_per_period);
        }
        let drift_ok = worst_drift <= 1e-9;

        let mut worst_gap = 0.0f64;
        for _ in 0..10 {
            let z: f64 = rng.gen_range(-0.6..0.6);
            let theta = rng.gen_range(-1.2..1.2);
            let v = rng.gen_range(0.0..0.12);
            let params = TwoModeParams::direct(1.0, v);
            let y = (1.0 - z * z).sqrt();
            let t = time_grid(10.0 * params.period(), 256);
            let pure =
                integrate_standard(&params, nf, z, theta, &t).map_err(|e| e.to_string())?;
            let polar = integrate_generalized(&params, &lr_state(nf, z, y, theta)?, &t)
                .map_err(|e| e.to_string())?;
            for (a, b) in pure.samples.iter().zip(&polar.samples) {
                worst_gap = worst_gap.max((a.1.z() - b.1.z()).abs());
            }
        }
        let gap_ok = worst_gap <= 1e-8;

        Ok((
            drift_ok && gap_ok,
            format!(
                "worst fragmentation drift {worst_drift:.1e}/period over 200 states \
                 (budget 1e-9); worst pure-state Z gap between engines {worst_gap:.1e} \
                 (budget 1e-8)"
            ),
        ))
    };
    seal(6, name, body())
}

// ---------------------------------------------------------------------------
// Check 7 — brute-force many-body evolution matches the reduced dynamics.

/// For `N ∈ {2, 4, 6, 8}` particles, both many-body lifts (product state and
/// thermal diagonal with a coherence band) evolved exactly in the Fock basis
/// must agree with the integrated effective matrix to `10⁻⁸` per particle
/// over ten periods, all within ten seconds.
pub fn check_many_body_oracle() -> CheckResult {
    let name = "many-body evolution matches the reduced dynamics";
    let body = || -> Result<(bool, String), String> {
        let start = Instant::now();
        let params = TwoModeParams::direct(1.0, 0.1);
        let energies = mode_energies_for(&params);
        let t = time_grid(10.0 * params.period(), 200);
        let transform = BasisTransform::new(params.xi);
        let mut worst = 0.0f64;
        for n in [2usize, 4, 6, 8] {
            // Product lift of a generic orbital.
            let product = lift_product(n, Complex::new(0.8, 0.0), Complex::new(0.42, 0.45), energies)
                .map_err(|e| e.to_string())?;
            let report = oracle_check(&params, &product, &t).map_err(|e| e.to_string())?;
            worst = worst.max(report.max_residual_per_particle);
            // Thermal lift of a kicked equilibrium at splitting x = 1.
            let ens = canonical_alphas(n as u64, 1.0f64).map_err(|e| e.to_string())?;
            let eq = equilibrium_state(&ens, params.v_ratio()).map_err(|e| e.to_string())?;
            let kicked = kicked_state(&eq, 0.2 * n as f64).map_err(|e| e.to_string())?;
            let rho01 = to_modes(&kicked, &transform).map_err(|e| e.to_string())?;
            let thermal = lift_thermal_with_coherence(n, rho01.a11, rho01.a01, energies)
                .map_err(|e| e.to_string())?;
            let report = oracle_check(&params, &thermal, &t).map_err(|e| e.to_string())?;
            worst = worst.max(report.max_residual_per_particle);
        }
        let elapsed = start.elapsed();
        let pass = worst < 1e-8 && elapsed < Duration::from_secs(10);
        Ok((
            pass,
            format!(
                "worst per-particle residual {worst:.1e} (budget 1e-8) across both lifts \
                 at N = 2, 4, 6, 8 in {elapsed:.2?} (budget 10 s)"
            ),
        ))
    };
    seal(7, name, body())
}

// ---------------------------------------------------------------------------
// Check 8 — first-order closed forms converge quadratically in the tilt.

/// Halving the tilt ratio from 0.08 to 0.04 must shrink the worst imbalance
/// error of the first-order displays by a factor in `[3.4, 4.6]` — for the
/// pure-state form against the exact solution, and for the fragmented-state
/// form against the integrated dynamics.
pub fn check_first_order_convergence() -> CheckResult {
    let name = "first-order displays converge quadratically in the tilt";
    let body = || -> Result<(bool, String), String> {
        let mut parts = Vec::new();
        let mut pass = true;

        for &(z0, th0) in &[(0.25, 0.5), (0.1, -0.4)] {
            let err_at = |v: f64| -> Result<f64, String> {
                let params = TwoModeParams::direct(1.0, v);
                let c = StandardSolutionConstants::from_init(&params, z0, th0)
                    .map_err(|e| e.to_string())?;
                let t_end = 2.0 * 2.0 * PI / params.delta_e;
                let mut worst = 0.0f64;
                for i in 0..=400 {
                    let ti = t_end * i as f64 / 400.0;
                    let exact = analytic_standard(&c, ti).map_err(|e| e.to_string())?;
                    let lin =
                        analytic_standard_linearized(&c, ti).map_err(|e| e.to_string())?;
                    worst = worst.max((exact.z - lin.z).abs());
                }
                Ok(worst)
            };
            let ratio = err_at(0.08)? / err_at(0.04)?;
            pass &= (3.4..=4.6).contains(&ratio);
            parts.push(format!("pure (Z₀={z0}, θ₀={th0}): ratio {ratio:.2}"));
        }

        for &(z0, th0, y0) in &[(0.25, 0.5, 0.5), (0.1, -0.4, 0.6)] {
            let err_at = |v: f64| -> Result<f64, String> {
                let params = TwoModeParams::direct(1.0, v);
                let init = lr_state(100.0, z0, y0, th0)?;
                let t = time_grid(2.0 * params.period(), 400);
                let truth =
                    integrate_liouville(&params, &init, &t).map_err(|e| e.to_string())?;
                let c = GeneralizedSolutionConstants::from_init(&init, &params)
                    .map_err(|e| e.to_string())?;
                let mut worst = 0.0f64;
                for (i, &ti) in t.iter().enumerate() {
                    let display = analytic_generalized_asymmetric(&c, &params, ti)
                        .map_err(|e| e.to_string())?;
                    worst = worst.max((display.z - truth.samples[i].1.z()).abs());
                }
                Ok(worst)
            };
            let ratio = err_at(0.08)? / err_at(0.04)?;
            pass &= (3.4..=4.6).contains(&ratio);
            parts.push(format!(
                "fragmented (Z₀={z0}, θ₀={th0}, 2A₀/N={y0}): ratio {ratio:.2}"
            ));
        }

        parts.push("window [3.4, 4.6]".into());
        Ok((pass, parts.join("; ")))
    };
    seal(8, name, body())
}

// ---------------------------------------------------------------------------
// Check 9 — grid eigensolver convergence and exact side splitting.

/// Doubling the grid resolution (161 → 321 points, against a 2561-point
/// reference) must shrink the mode-splitting error by a factor in
/// `[3.2, 4.8]` for both trap families; the left/right states of the
/// 321-point solves must carry side probabilities `1 − ε` and `ε` to `10⁻⁹`;
/// and halving the tilt step (4% → 2% of the mean energy) must shrink the
/// two-mode perturbation error by a factor in `[3.2, 4.8]`.
pub fn check_eigensolver_convergence() -> CheckResult {
    /// A trap family, parameterised by grid size.
    type FamilySolver<'a> = &'a dyn Fn(usize) -> Result<ModePair<f64>, String>;

    let name = "grid eigensolver converges quadratically and splits sides exactly";
    let body = || -> Result<(bool, String), String> {
        let square = |n: usize| -> Result<ModePair<f64>, String> {
            PotentialSpec::square_double_well(n, 10.0, 2.0, 0.5, 1.0)
                .and_then(|s| s.solve_two_modes_unchecked())
                .map_err(|e| e.to_string())
        };
        let gaussian = |n: usize| -> Result<ModePair<f64>, String> {
            PotentialSpec::gaussian_barrier_trap(n, 6.0, 1.0, 5.0, 1.0, 1.0)
                .and_then(|s| s.solve_two_modes_unchecked())
                .map_err(|e| e.to_string())
        };
        let families: [(&str, FamilySolver); 2] = [("square", &square), ("gaussian", &gaussian)];

        let mut parts = Vec::new();
        let mut pass = true;
        let mut worst_side = 0.0f64;
        for (label, solve) in families {
            let reference = solve(2561)?.delta_e();
            let mid = solve(321)?;
            let coarse_err = (solve(161)?.delta_e() - reference).abs();
            let mid_err = (mid.delta_e() - reference).abs();
            let ratio = coarse_err / mid_err;
            pass &= (3.2..=4.8).contains(&ratio);
            parts.push(format!("{label} splitting-error ratio {ratio:.2}"));

            let lr = mid.left_right().map_err(|e| e.to_string())?;
            let dl = (mid.side_probability(&lr.phi_l) - (1.0 - lr.epsilon)).abs();
            let dr = (mid.side_probability(&lr.phi_r) - lr.epsilon).abs();
            worst_side = worst_side.max(dl).max(dr);
        }
        pass &= worst_side <= 1e-9;
        parts.push(format!("side-probability identity to {worst_side:.1e}"));

        // Two-mode perturbation truncation: quadratic in the step height.
        let spec = PotentialSpec::gaussian_barrier_trap(1025, 6.0, 1.0, 5.0, 1.0, 1.0)
            .map_err(|e| e.to_string())?;
        let pair = spec.solve_two_modes_unchecked().map_err(|e| e.to_string())?;
        let ebar = pair.mean_energy();
        let err = |step: f64| -> Result<f64, String> {
            let pm = perturbed_modes(&pair, step).map_err(|e| e.to_string())?;
            let w = step_profile(&spec, step);
            let v_tilted: Vec<f64> = spec.v().iter().zip(&w).map(|(&v, &wi)| v + wi).collect();
            let tilted = PotentialSpec::from_samples(spec.x().to_vec(), v_tilted, spec.mass())
                .map_err(|e| e.to_string())?;
            let direct = tilted.solve_two_modes_unchecked().map_err(|e| e.to_string())?;
            Ok((pm.e0 - direct.e0).abs().max((pm.e1 - direct.e1).abs()))
        };
        let pert_ratio = err(0.04 * ebar)? / err(0.02 * ebar)?;
        pass &= (3.2..=4.8).contains(&pert_ratio);
        parts.push(format!(
            "tilt-perturbation error ratio {pert_ratio:.2}; windows [3.2, 4.8], \
             side budget 1e-9"
        ));

        Ok((pass, parts.join("; ")))
    };
    seal(9, name, body())
}

// ---------------------------------------------------------------------------
// Check 10 — equation-of-state isolines.

/// Every point of the `f ∈ {0.25, 0.5, 0.75, 1}` contours at `v = 0.1`
/// (resolution 200) must satisfy the equation of state to `10⁻⁹` when
/// re-evaluated externally, and at `v = 0` the `f = 1` contour must be the
/// unit quarter circle `g² + y² = 1` to `10⁻¹²`.
pub fn check_equation_of_state_isolines() -> CheckResult {
    let name = "equation-of-state isolines close on themselves";
    let body = || -> Result<(bool, String), String> {
        let v: f64 = 0.1;
        let curves =
            isolines(&[0.25f64, 0.5, 0.75, 1.0], v, 200).map_err(|e| e.to_string())?;
        let mut worst_eos = 0.0f64;
        for curve in &curves {
            for &(g, y) in &curve.points {
                worst_eos = worst_eos.max((f_equation_of_state(g, y, v) - curve.f).abs());
            }
        }
        let circle = isolines(&[1.0f64], 0.0, 200).map_err(|e| e.to_string())?;
        let mut worst_circle = 0.0f64;
        for &(g, y) in &circle[0].points {
            worst_circle = worst_circle.max((g * g + y * y - 1.0).abs());
        }
        let pass = worst_eos < 1e-9 && worst_circle <= 1e-12;
        Ok((
            pass,
            format!(
                "worst equation-of-state residual {worst_eos:.1e} over 4 contours \
                 (budget 1e-9); unit-circle residual {worst_circle:.1e} (budget 1e-12)"
            ),
        ))
    };
    seal(10, name, body())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn the_check_list_is_complete_and_ordered() {
        let results = run_all(42);
        assert_eq!(results.len(), 10);
        for (i, r) in results.iter().enumerate() {
            assert_eq!(r.id, i + 1);
            assert!(!r.detail.is_empty());
            // Every line renders with a verdict tag.
            assert!(r.line().starts_with("[PASS]") || r.line().starts_with("[FAIL]"));
        }
    }
}
