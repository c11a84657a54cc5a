//! Exact many-body reference for the effective two-mode dynamics.
//!
//! `N` non-interacting bosons in two modes with energies `Ẽ₀, Ẽ₁` have an
//! `(N+1)`-dimensional occupation basis `|k⟩` (`k` particles in the upper
//! mode). The full density matrix evolves by pure phases,
//! `p_{ab}(t) = p_{ab}(0)·e^{−i(a−b)Ωt}` with `Ω = Ẽ₁ − Ẽ₀`, so arbitrary
//! states can be propagated exactly and reduced to the one-particle level.
//! [`oracle_check`] runs this exact reference against the trajectory
//! integrator and reports the worst per-particle deviation.
//!
//! Two lifts build many-body states with prescribed one-particle content:
//! [`lift_product`] (every particle in the same orbital — a pure, fully
//! coherent state) and [`lift_thermal_with_coherence`] (an exponential-family
//! diagonal with a geometric-mean coherence band, matching given occupation
//! and coherence targets).

use num_complex::Complex;
use thiserror::Error;

use crate::density::{
    alphas_from_manybody, to_left_right, BasisTransform, DensityError, EffectiveDensityMatrix01,
};
use crate::dynamics::{integrate_liouville, DynamicsError};
use crate::linalg::hermitian_min_eigenvalue;
use crate::wellmodes::TwoModeParams;
use crate::Scalar;

/// Largest particle number the dense many-body representation accepts.
pub const MAX_PARTICLES: usize = 64;

/// Failures of many-body state construction and checking.
#[derive(Debug, Error)]
pub enum OracleError {
    /// Requested one-particle content cannot be represented by the lift.
    #[error("inconsistent lift: {reason}")]
    InconsistentLift { reason: String },
    /// Malformed or unphysical many-body matrix.
    #[error("invalid many-body state: {reason}")]
    InvalidState { reason: String },
    /// Reduction failure.
    #[error(transparent)]
    Density(#[from] DensityError),
    /// Trajectory integration failure inside a check.
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Exact density matrix of `N` non-interacting bosons in two modes, stored
/// dense in the occupation basis (row-major, dimension `N+1`).
#[derive(Debug, Clone)]
pub struct ManyBodyState<R> {
    n: usize,
    p: Vec<Complex<R>>,
    etilde0: R,
    etilde1: R,
}

impl<R: Scalar> ManyBodyState<R> {
    /// Validating constructor: Hermitian, unit trace (±10⁻⁹), positive
    /// semidefinite (smallest eigenvalue ≥ −10⁻¹⁰), at most
    /// [`MAX_PARTICLES`] particles.
    pub fn new(
        n: usize,
        p: Vec<Complex<R>>,
        etilde0: R,
        etilde1: R,
    ) -> Result<Self, OracleError> {
        if n == 0 || n > MAX_PARTICLES {
            return Err(OracleError::InvalidState {
                reason: format!("particle number {n} outside 1..={MAX_PARTICLES}"),
            });
        }
        let dim = n + 1;
        if p.len() != dim * dim {
            return Err(OracleError::InvalidState {
                reason: format!(
                    "matrix buffer holds {} entries, expected {}",
                    p.len(),
                    dim * dim
                ),
            });
        }
        if !etilde0.is_finite() || !etilde1.is_finite() {
            return Err(OracleError::InvalidState {
                reason: "mode energies must be finite".into(),
            });
        }
        let mut scale = R::zero();
        for e in &p {
            if !e.re.is_finite() || !e.im.is_finite() {
                return Err(OracleError::InvalidState {
                    reason: "matrix entries must be finite".into(),
                });
            }
            scale = scale.max(e.norm_sqr().sqrt());
        }
        let herm_tol = scale.max(R::one()) * R::lit(1e-12);
        for a in 0..dim {
            for b in 0..=a {
                let diff = p[a * dim + b] - p[b * dim + a].conj();
                if diff.norm_sqr().sqrt() > herm_tol {
                    return Err(OracleError::InvalidState {
                        reason: format!("matrix is not Hermitian at entry ({a}, {b})"),
                    });
                }
            }
        }
        let mut trace = Complex::new(R::zero(), R::zero());
        for k in 0..dim {
            trace += p[k * dim + k];
        }
        if (trace.re - R::one()).abs() > R::lit(1e-9) || trace.im.abs() > R::lit(1e-9) {
            return Err(OracleError::InvalidState {
                reason: format!("trace {:e} must be 1", trace.re),
            });
        }
        let min_eig = hermitian_min_eigenvalue(&p, dim);
        if min_eig < -R::lit(1e-10) {
            return Err(OracleError::InvalidState {
                reason: format!(
                    "matrix is not positive semidefinite (smallest eigenvalue {:e})",
                    min_eig
                ),
            });
        }
        Ok(Self {
            n,
            p,
            etilde0,
            etilde1,
        })
    }

    /// Particle number `N`.
    pub fn particles(&self) -> usize {
        self.n
    }

    /// Dense matrix buffer (row-major, dimension `N+1`).
    pub fn matrix(&self) -> &[Complex<R>] {
        &self.p
    }

    /// Mode energies `(Ẽ₀, Ẽ₁)`.
    pub fn mode_energies(&self) -> (R, R) {
        (self.etilde0, self.etilde1)
    }

    /// Exact time evolution: entry `(a, b)` gains the phase
    /// `e^{−i(a−b)(Ẽ₁−Ẽ₀)t}`. Unitary, so no revalidation is needed.
    pub fn evolve(&self, t: R) -> Self {
        let dim = self.n + 1;
        let omega = self.etilde1 - self.etilde0;
        let mut p = self.p.clone();
        for (a, row) in p.chunks_exact_mut(dim).enumerate() {
            for (b, e) in row.iter_mut().enumerate() {
                let angle = -(R::from_count(a) - R::from_count(b)) * omega * t;
                let (s, c) = angle.sin_cos();
                *e *= Complex::new(c, s);
            }
        }
        Self {
            n: self.n,
            p,
            etilde0: self.etilde0,
            etilde1: self.etilde1,
        }
    }

    /// One-particle reduction to the effective mode-basis matrix.
    pub fn reduce(&self) -> Result<EffectiveDensityMatrix01<R>, OracleError> {
        Ok(alphas_from_manybody(&self.p, self.n)?)
    }
}

/// Lifts a one-particle orbital `c₀|0⟩ + c₁|1⟩` (normalised internally) to
/// the `N`-particle product state: amplitudes
/// `b_k = √C(N,k)·c₀^{N−k}·c₁^k`, density matrix `p = b b†`. The reduction
/// is fully coherent (`f = 1` exactly).
pub fn lift_product<R: Scalar>(
    n: usize,
    c0: Complex<R>,
    c1: Complex<R>,
    mode_energies: (R, R),
) -> Result<ManyBodyState<R>, OracleError> {
    let norm = (c0.norm_sqr() + c1.norm_sqr()).sqrt();
    if !(norm > R::zero()) || !norm.is_finite() {
        return Err(OracleError::InconsistentLift {
            reason: "orbital amplitudes must be normalisable".into(),
        });
    }
    if n == 0 || n > MAX_PARTICLES {
        return Err(OracleError::InconsistentLift {
            reason: format!("particle number {n} outside 1..={MAX_PARTICLES}"),
        });
    }
    let c0 = c0 / norm;
    let c1 = c1 / norm;
    let dim = n + 1;
    let mut binom = R::one();
    let mut b = Vec::with_capacity(dim);
    for k in 0..dim {
        b.push(c0.powu((n - k) as u32) * c1.powu(k as u32) * binom.sqrt());
        if k < n {
            binom = binom * R::from_count(n - k) / R::from_count(k + 1);
        }
    }
    let mut p = vec![Complex::new(R::zero(), R::zero()); dim * dim];
    for a in 0..dim {
        for bb in 0..dim {
            p[a * dim + bb] = b[a] * b[bb].conj();
        }
    }
    ManyBodyState::new(n, p, mode_energies.0, mode_energies.1)
}

/// Lifts occupation and coherence targets to a mixed `N`-particle state:
/// an exponential-family diagonal `w_k ∝ e^{−μk}` tuned (by bisection on
/// `μ`) so that `Σ k·w_k` matches the upper-mode occupation `a₁₁`, plus one
/// coherence band `p_{k+1,k} = s·√(w_k w_{k+1})` scaled to match the
/// one-particle coherence `a₀₁` exactly.
///
/// The band keeps the matrix positive semidefinite exactly when
/// `|s| ≤ 1/(2cos(π/(N+2)))`; a target beyond that capacity is reported as
/// an inconsistent lift.
pub fn lift_thermal_with_coherence<R: Scalar>(
    n: usize,
    a11: R,
    a01: Complex<R>,
    mode_energies: (R, R),
) -> Result<ManyBodyState<R>, OracleError> {
    if n == 0 || n > MAX_PARTICLES {
        return Err(OracleError::InconsistentLift {
            reason: format!("particle number {n} outside 1..={MAX_PARTICLES}"),
        });
    }
    let nf = R::from_count(n);
    if !(a11 > R::zero()) || !(a11 < nf) {
        return Err(OracleError::InconsistentLift {
            reason: format!(
                "upper-mode occupation target {:e} must lie strictly between 0 and N",
                a11.to_f64().unwrap_or(f64::NAN)
            ),
        });
    }
    let dim = n + 1;
    // Occupation of the exponential family at slope mu (softmax-stable).
    let weights = |mu: R| -> Vec<R> {
        let mut exps = Vec::with_capacity(dim);
        let mut max_e = R::neg_infinity();
        for k in 0..dim {
            let e = -mu * R::from_count(k);
            max_e = max_e.max(e);
            exps.push(e);
        }
        let mut z = R::zero();
        let mut w: Vec<R> = exps.into_iter().map(|e| (e - max_e).exp()).collect();
        for &wk in &w {
            z += wk;
        }
        for wk in w.iter_mut() {
            *wk /= z;
        }
        w
    };
    let occupation = |w: &[R]| -> R {
        w.iter()
            .enumerate()
            .fold(R::zero(), |acc, (k, &wk)| acc + R::from_count(k) * wk)
    };
    let (mut lo, mut hi) = (R::lit(-700.0), R::lit(700.0));
    // occupation(lo) ≈ N, occupation(hi) ≈ 0: strictly decreasing in mu.
    for _ in 0..200 {
        let mid = (lo + hi) * R::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if occupation(&weights(mid)) > a11 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = weights((lo + hi) * R::lit(0.5));
    // Band scale from the coherence target: the one-particle coherence of
    // the band is s·Σ√((k+1)(N−k)·w_k·w_{k+1}) (lower entry).
    let mut band_sum = R::zero();
    let mut geo = Vec::with_capacity(n);
    for k in 0..n {
        let g = (w[k] * w[k + 1]).sqrt();
        geo.push(g);
        band_sum += (R::from_count(k + 1) * R::from_count(n - k)).sqrt() * g;
    }
    let lower_target = a01.conj();
    let s = if band_sum > R::zero() {
        lower_target / band_sum
    } else {
        Complex::new(R::zero(), R::zero())
    };
    if band_sum == R::zero() && lower_target.norm_sqr() > R::zero() {
        return Err(OracleError::InconsistentLift {
            reason: "diagonal weights carry no adjacent support for a coherence band".into(),
        });
    }
    let s_cap = R::one() / (R::lit(2.0) * (R::PI() / R::from_count(n + 2)).cos());
    let s_mag = s.norm_sqr().sqrt();
    if s_mag > s_cap * (R::one() + R::lit(1e-12)) {
        return Err(OracleError::InconsistentLift {
            reason: format!(
                "coherence target needs band scale |s| = {:e}, beyond the positive \
                 semidefinite capacity {:e} of a single-band lift",
                s_mag.to_f64().unwrap_or(f64::NAN),
                s_cap.to_f64().unwrap_or(f64::NAN)
            ),
        });
    }
    let mut p = vec![Complex::new(R::zero(), R::zero()); dim * dim];
    for k in 0..dim {
        p[k * dim + k] = Complex::new(w[k], R::zero());
    }
    for k in 0..n {
        let lower = s * geo[k];
        p[(k + 1) * dim + k] = lower;
        p[k * dim + (k + 1)] = lower.conj();
    }
    ManyBodyState::new(n, p, mode_energies.0, mode_energies.1)
}

/// Symmetric choice of mode energies for given trap parameters:
/// `(−Ω/2, +Ω/2)`. Only the difference enters any observable.
pub fn mode_energies_for<R: Scalar>(params: &TwoModeParams<R>) -> (R, R) {
    let half = params.omega() * R::lit(0.5);
    (-half, half)
}

/// Outcome of an oracle comparison.
#[derive(Debug, Clone)]
pub struct OracleReport<R> {
    /// Worst deviation between the exactly evolved reduction and the
    /// integrated trajectory, per particle: components compared are both
    /// occupations and the complex coherence.
    pub max_residual_per_particle: R,
    /// Number of time samples compared.
    pub samples: usize,
}

/// Runs the exact many-body evolution against [`integrate_liouville`] on the
/// given time grid and reports the worst per-particle deviation of the
/// reduced one-particle matrices (compared in the left/right basis).
///
/// Fails fast if the state's mode splitting `Ẽ₁ − Ẽ₀` does not match the
/// trap's oscillation rate `Ω` to a relative 10⁻¹².
pub fn oracle_check<R: Scalar>(
    params: &TwoModeParams<R>,
    state: &ManyBodyState<R>,
    t_grid: &[R],
) -> Result<OracleReport<R>, OracleError> {
    let omega = params.omega();
    let split = state.etilde1 - state.etilde0;
    if (split - omega).abs() > R::lit(1e-12) * omega.abs() {
        return Err(OracleError::InconsistentLift {
            reason: format!(
                "many-body mode splitting {:e} does not match the trap rate {:e}",
                split.to_f64().unwrap_or(f64::NAN),
                omega.to_f64().unwrap_or(f64::NAN)
            ),
        });
    }
    let transform = BasisTransform::new(params.xi);
    let lr0 = to_left_right(&state.reduce()?, &transform)?;
    let traj = integrate_liouville(params, &lr0, t_grid)?;
    let nf = R::from_count(state.n);
    let mut worst = R::zero();
    for (i, &t) in t_grid.iter().enumerate() {
        let exact = to_left_right(&state.evolve(t).reduce()?, &transform)?;
        let num = &traj.samples[i].1;
        let d_nl = (exact.n_l - num.n_l).abs();
        let d_nr = (exact.n_r - num.n_r).abs();
        let coh_exact = Complex::new(exact.theta.cos(), exact.theta.sin()).scale(exact.a);
        let coh_num = Complex::new(num.theta.cos(), num.theta.sin()).scale(num.a);
        let d_coh = (coh_exact - coh_num).norm_sqr().sqrt();
        worst = worst.max(d_nl.max(d_nr).max(d_coh) / nf);
    }
    Ok(OracleReport {
        max_residual_per_particle: worst,
        samples: t_grid.len(),
    })
}
