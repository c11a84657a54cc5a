//! Canonical (fixed-`N`) thermal ensembles of two-mode bosons and the
//! temperature/size limits they impose on Josephson-style experiments.
//!
//! For `N` non-interacting bosons in two modes split by `ΔE`, the canonical
//! occupation of the upper mode at `x = ΔE/(k_B T)` is
//!
//! ```text
//! α₁₁(N, x) = 1/(eˣ − 1) − (N + 1)/(e^{(N+1)x} − 1)
//! ```
//!
//! and `α₀₀ = N − α₁₁`. Everything downstream is controlled by the occupation
//! difference `δN₀₁ = α₀₀ − α₁₁`, or its fraction `g = δN₀₁/N`: the
//! equilibrium state of a slightly tilted trap, the response to a population
//! kick, and the trade-off between achievable imbalance and coherence `f`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{DensityError, EffectiveDensityMatrixLR};
use crate::Scalar;

/// Largest tilt ratio `|v| = |V₀/ΔE|` the first-order formulas accept.
pub const TILT_VALIDITY_LIMIT: f64 = 0.15;

/// Failures of the thermal-ensemble constructions.
#[derive(Debug, Error)]
pub enum ThermalError {
    /// Thermal splitting `x` must be positive and finite.
    #[error("thermal splitting x must be positive and finite, got {x:e}")]
    DomainError { x: f64 },
    /// At least one particle is required.
    #[error("particle number must be at least 1")]
    EmptyEnsemble,
    /// Tilt ratio outside the first-order validity window.
    #[error("tilt ratio |v| = {v:e} is outside the first-order validity window |v| < {limit}")]
    FirstOrderValidity { v: f64, limit: f64 },
    /// A kick that would push the state past `f = 1`.
    #[error(
        "kick δN_LR = {requested:e} would make the matrix unphysical (f > 1); \
         the largest admissible kick in that direction is {max_admissible:e}"
    )]
    UnphysicalImbalance { requested: f64, max_admissible: f64 },
    /// Isoline request outside `f ∈ (0, 1]`.
    #[error("isoline level f = {f:e} outside the physical range (0, 1]")]
    IsolineOutOfRange { f: f64 },
    /// Underlying density-matrix validation failure.
    #[error(transparent)]
    Density(#[from] DensityError),
}

/// Canonical two-mode ensemble: particle number, thermal splitting, and the
/// resulting mode occupations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalEnsemble<R> {
    /// Particle number `N`.
    pub n: u64,
    /// Thermal splitting `x = ΔE/(k_B T)`.
    pub x: R,
    /// Lower-mode occupation `α₀₀`.
    pub alpha00: R,
    /// Upper-mode occupation `α₁₁`.
    pub alpha11: R,
}

impl<R: Scalar> ThermalEnsemble<R> {
    /// Occupation difference `δN₀₁ = α₀₀ − α₁₁ = N − 2α₁₁`.
    pub fn delta_n01(&self) -> R {
        self.alpha00 - self.alpha11
    }

    /// Coherence fraction `g = δN₀₁/N ∈ (0, 1)`.
    pub fn coherence_fraction(&self) -> R {
        self.delta_n01() / R::from_u64(self.n).expect("N fits the scalar")
    }
}

/// Evaluates `t(y) = 1/(e^y − 1)` rewritten as a Laurent series
/// `1/y − 1/2 + y/12 − y³/720 + y⁵/30240`, accurate for `|y| < 1e-3`.
fn bose_laurent_tail<R: Scalar>(y: R) -> R {
    // The 1/y pole is handled by the caller; this returns t(y) − 1/y.
    let y2 = y * y;
    -R::lit(0.5) + y * (R::lit(1.0 / 12.0) + y2 * (-R::lit(1.0 / 720.0) + y2 * R::lit(1.0 / 30240.0)))
}

/// Canonical occupations for `N` bosons at thermal splitting `x > 0`.
///
/// Three evaluation regimes keep full relative precision everywhere:
///
/// * `(N+1)x < 1e-3`: both exponentials are in the small-argument regime; the
///   `1/x` poles cancel exactly and a Laurent expansion gives
///   `α₁₁ = N/2 − ((N+1)² − 1)·x/12 + ((N+1)⁴ − 1)·x³/720 − …`;
/// * `x < 1e-6` but `(N+1)x` not small: the poles still nearly cancel, so the
///   difference is assembled as `(e^y − 1 − y)/(x·(e^y − 1)) − 1/2 + x/12`
///   with `y = (N+1)x`, which avoids the `1/x − 1/x` subtraction entirely;
/// * otherwise the definition is evaluated directly through `exp_m1`, with
///   the second term flushed to zero once `(N+1)x` would overflow the
///   exponential.
pub fn canonical_alphas<R: Scalar>(n: u64, x: R) -> Result<ThermalEnsemble<R>, ThermalError> {
    if n == 0 {
        return Err(ThermalError::EmptyEnsemble);
    }
    if !(x > R::zero()) || !x.is_finite() {
        return Err(ThermalError::DomainError {
            x: x.to_f64().unwrap_or(f64::NAN),
        });
    }
    let nf = R::from_u64(n).expect("N fits the scalar");
    let np1 = nf + R::one();
    let y = np1 * x;
    let overflow_cap = R::max_value().ln() - R::lit(5.0);

    let alpha11 = if y < R::lit(1e-3) {
        // Laurent · Laurent: the poles cancel term by term.
        let np1_2 = np1 * np1;
        let np1_4 = np1_2 * np1_2;
        let np1_6 = np1_4 * np1_2;
        let x2 = x * x;
        nf * R::lit(0.5)
            - (np1_2 - R::one()) * x * R::lit(1.0 / 12.0)
            + (np1_4 - R::one()) * x * x2 * R::lit(1.0 / 720.0)
            - (np1_6 - R::one()) * x * x2 * x2 * R::lit(1.0 / 30240.0)
    } else if x < R::lit(1e-6) {
        // 1/(eˣ−1) ≈ 1/x − 1/2 + x/12; pair the 1/x pole with the second term.
        let pole_pair = if y > overflow_cap {
            R::one() / x
        } else {
            let em1 = y.exp_m1();
            (em1 - y) / (x * em1)
        };
        pole_pair + bose_laurent_tail(x)
    } else {
        let first = R::one() / x.exp_m1();
        let second = if y > overflow_cap {
            R::zero()
        } else {
            np1 / y.exp_m1()
        };
        first - second
    };
    Ok(ThermalEnsemble {
        n,
        x,
        alpha00: nf - alpha11,
        alpha11,
    })
}

/// Equilibrium effective density matrix of the tilted trap, first order in
/// the tilt ratio `v = V₀/ΔE`:
/// `N_L = (N − v·δN₀₁)/2`, `N_R = (N + v·δN₀₁)/2`, `A = δN₀₁/2`, `θ = 0`.
///
/// The positive-`v` convention raises the left well, so the equilibrium
/// imbalance `Z = −v·g` leans right.
pub fn equilibrium_state<R: Scalar>(
    ensemble: &ThermalEnsemble<R>,
    v: R,
) -> Result<EffectiveDensityMatrixLR<R>, ThermalError> {
    check_tilt(v)?;
    let nf = R::from_u64(ensemble.n).expect("N fits the scalar");
    let d01 = ensemble.delta_n01();
    let half = R::lit(0.5);
    Ok(EffectiveDensityMatrixLR::new(
        (nf - v * d01) * half,
        (nf + v * d01) * half,
        d01 * half,
        R::zero(),
    )?)
}

/// Instantaneously transfers `δN_LR` particles of population difference into
/// the left well: `N_L → N_L + δN_LR/2`, `N_R → N_R − δN_LR/2`, coherence
/// untouched. Rejects kicks that would push the state past `f = 1`, reporting
/// the largest admissible kick in the requested direction.
pub fn kicked_state<R: Scalar>(
    base: &EffectiveDensityMatrixLR<R>,
    delta_n_lr: R,
) -> Result<EffectiveDensityMatrixLR<R>, ThermalError> {
    let n = base.n();
    let half = R::lit(0.5);
    let z_new = base.z() + delta_n_lr / n;
    let y = R::lit(2.0) * base.a / n;
    let z_cap = (R::one() - y * y).max(R::zero()).sqrt();
    if z_new.abs() > z_cap + R::lit(1e-9) {
        let cap = if delta_n_lr > R::zero() {
            n * (z_cap - base.z())
        } else {
            n * (z_cap + base.z())
        };
        return Err(ThermalError::UnphysicalImbalance {
            requested: delta_n_lr.to_f64().unwrap_or(f64::NAN),
            max_admissible: cap.abs().to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(EffectiveDensityMatrixLR::new(
        base.n_l + delta_n_lr * half,
        base.n_r - delta_n_lr * half,
        base.a,
        base.theta,
    )?)
}

/// First-order closed form for the imbalance after a kick `δN_LR` on the
/// thermal equilibrium of a trap tilted by `v = V₀/ΔE` (`ħ = 1`):
///
/// ```text
/// Z(t) = −v·g + (δN_LR/N)·cos(ΔE·t)
/// ```
///
/// Exact through first order in `v`; the full dynamics adds `O(v²)`
/// corrections in amplitude, offset, and frequency.
pub fn kicked_imbalance_first_order<R: Scalar>(
    ensemble: &ThermalEnsemble<R>,
    v: R,
    delta_n_lr: R,
    delta_e: R,
    t: R,
) -> Result<R, ThermalError> {
    check_tilt(v)?;
    let equilibrium = equilibrium_state(ensemble, v)?;
    // Validates admissibility of the kick without keeping the state.
    kicked_state(&equilibrium, delta_n_lr)?;
    let nf = R::from_u64(ensemble.n).expect("N fits the scalar");
    Ok(-v * ensemble.coherence_fraction() + delta_n_lr / nf * (delta_e * t).cos())
}

/// Equation of state linking coherence fraction `g`, kick fraction
/// `y = δN_LR/N`, and fragmentation: `f(g, y, v) = √(g² + y² − 2vgy)`,
/// first order in the tilt `v`.
pub fn f_equation_of_state<R: Scalar>(g: R, y: R, v: R) -> R {
    (g * g + y * y - R::lit(2.0) * v * g * y).max(R::zero()).sqrt()
}

/// Largest kick fraction `y = δN_LR/N` that keeps the state physical
/// (`f ≤ 1`) at coherence fraction `g` and tilt `v`:
/// `y_max = v·g + √(1 − g²(1 − v²))`.
pub fn max_imbalance<R: Scalar>(g: R, v: R) -> R {
    v * g + (R::one() - g * g * (R::one() - v * v)).max(R::zero()).sqrt()
}

fn check_tilt<R: Scalar>(v: R) -> Result<(), ThermalError> {
    if v.abs() >= R::lit(TILT_VALIDITY_LIMIT) {
        return Err(ThermalError::FirstOrderValidity {
            v: v.to_f64().unwrap_or(f64::NAN),
            limit: TILT_VALIDITY_LIMIT,
        });
    }
    Ok(())
}

/// One experimental scenario for the limits table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scenario<R> {
    /// Human-readable source label.
    pub label: String,
    /// Temperature in kelvin.
    pub temperature_k: R,
    /// Particle number.
    pub n: u64,
}

/// One evaluated row of the limits table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioRow<R> {
    /// Scenario label.
    pub label: String,
    /// Temperature in kelvin.
    pub temperature_k: R,
    /// Particle number.
    pub n: u64,
    /// Thermal splitting `x = ΔE/(k_B T)`.
    pub x: R,
    /// Coherence fraction `g = δN₀₁/N`.
    pub coherence_fraction: R,
    /// Largest admissible kick fraction (`f = 1` boundary).
    pub max_imbalance: R,
    /// Fragmentation of the unkicked equilibrium (the smallest reachable).
    pub min_f: R,
}

/// Evaluates the achievable-imbalance/coherence limits for a set of source
/// scenarios at mode splitting `ΔE/ħ` (rad/s) and tilt ratio `v`.
pub fn limits_table<R: Scalar>(
    scenarios: &[Scenario<R>],
    delta_e_over_hbar: R,
    v: R,
) -> Result<Vec<ScenarioRow<R>>, ThermalError> {
    check_tilt(v)?;
    scenarios
        .iter()
        .map(|s| {
            let x = crate::constants::thermal_splitting(delta_e_over_hbar, s.temperature_k);
            let ens = canonical_alphas(s.n, x)?;
            let g = ens.coherence_fraction();
            Ok(ScenarioRow {
                label: s.label.clone(),
                temperature_k: s.temperature_k,
                n: s.n,
                x,
                coherence_fraction: g,
                max_imbalance: max_imbalance(g, v),
                min_f: f_equation_of_state(g, R::zero(), v),
            })
        })
        .collect()
}

/// The four reference cold-atom sources at three sizes each, for a trap with
/// `ΔE/ħ = 1000 rad/s`: a supersonic beam (8 K), a magneto-optical trap
/// (250 µK), a collimated beam (1 µK), and a condensate (10 nK).
pub fn reference_scenarios<R: Scalar>() -> Vec<Scenario<R>> {
    let sources: [(&str, f64); 4] = [
        ("supersonic beam", 8.0),
        ("magneto-optical trap", 2.5e-4),
        ("collimated beam", 1e-6),
        ("condensate", 1e-8),
    ];
    let sizes = [10_000u64, 100_000, 1_000_000];
    let mut out = Vec::with_capacity(12);
    for (label, t) in sources {
        for &n in &sizes {
            out.push(Scenario {
                label: label.to_string(),
                temperature_k: R::lit(t),
                n,
            });
        }
    }
    out
}

/// One constant-`f` contour in the `(g, y)` plane.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Isoline<R> {
    /// Fragmentation level of this contour.
    pub f: R,
    /// `(g, y)` samples, `g` ascending from 0 to the contour's edge.
    pub points: Vec<(R, R)>,
}

/// Constant-`f` contours of the equation of state: for each requested level,
/// `y(g) = v·g + √(f² − g²(1 − v²))` sampled on `resolution + 1` points from
/// `g = 0` to the largest admissible `g = f/√(1 − v²)` (capped at 1).
///
/// Every produced point is re-checked against the equation of state to
/// `1e-9`; at `v = 0` the `f = 1` contour is the unit quarter circle.
pub fn isolines<R: Scalar>(
    f_values: &[R],
    v: R,
    resolution: usize,
) -> Result<Vec<Isoline<R>>, ThermalError> {
    check_tilt(v)?;
    let resolution = resolution.max(2);
    let mut out = Vec::with_capacity(f_values.len());
    for &f in f_values {
        if !(f > R::zero() && f <= R::one()) {
            return Err(ThermalError::IsolineOutOfRange {
                f: f.to_f64().unwrap_or(f64::NAN),
            });
        }
        let one_minus_v2 = R::one() - v * v;
        let g_edge = (f / one_minus_v2.sqrt()).min(R::one());
        let mut points = Vec::with_capacity(resolution + 1);
        for i in 0..=resolution {
            let g = g_edge * R::from_count(i) / R::from_count(resolution);
            let y = v * g + (f * f - g * g * one_minus_v2).max(R::zero()).sqrt();
            let back = f_equation_of_state(g, y, v);
            debug_assert!(
                (back - f).abs() < R::lit(1e-9),
                "isoline point drifted off its contour"
            );
            if (back - f).abs() >= R::lit(1e-9) {
                return Err(ThermalError::IsolineOutOfRange {
                    f: back.to_f64().unwrap_or(f64::NAN),
                });
            }
            points.push((g, y));
        }
        out.push(Isoline { f, points });
    }
    Ok(out)
}
