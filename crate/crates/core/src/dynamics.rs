//! Time evolution of the effective two-mode density matrix (`ħ = 1`).
//!
//! For non-interacting bosons the effective matrix evolves linearly, which in
//! the left/right polar variables `(Z, θ, A)` — imbalance, relative phase,
//! coherence magnitude — is equivalent to rigid rotation of the Bloch-like
//! vector `r = (A cos θ, A sin θ, NZ/2)` about the fixed axis
//! `h = (K, 0, V₀/2)`:
//!
//! ```text
//! ṙ = 2 h × r      ⇒      ẋ = −V₀ y,   ẏ = V₀ x − 2K z,   ż = 2K y
//! ```
//!
//! with tunnelling element `K = −ΔE/2` and tilt `V₀ = E_L − E_R`. Three
//! integrators expose this:
//!
//! * [`integrate_liouville`] — RK4 directly on `r`; valid for every state,
//!   conserves the trace exactly by construction.
//! * [`integrate_generalized`] — RK4 on the polar variables, matching the
//!   amplitude–phase form of the equations of motion; it hands individual
//!   steps to the Bloch form whenever `|cos θ| < 0.1` or `A/N < 10⁻⁶`, where
//!   the polar right-hand side loses accuracy.
//! * [`integrate_standard`] — the pure-state (`f = 1`) system in `(Z, θ)`.
//!
//! The closed-form solutions come in two families:
//! [`StandardSolutionConstants`] solves the pure-state system exactly for any
//! tilt (and carries its first-order-in-tilt linearisation), while
//! [`GeneralizedSolutionConstants`] solves arbitrary fragmented states —
//! exactly for a symmetric trap, and to first order in the tilt ratio
//! `v = V₀/ΔE` otherwise.

use serde::Serialize;
use thiserror::Error;

use crate::density::{wrap_angle, DensityError, EffectiveDensityMatrixLR};
use crate::wellmodes::TwoModeParams;
use crate::Scalar;

/// Default integrator resolution. Fine enough that the coherence-measure
/// drift of RK4 stays well below 10⁻⁹ per oscillation period.
pub const DEFAULT_STEPS_PER_PERIOD: u32 = 1024;

/// Largest tilt ratio the first-order closed forms accept.
pub const TILT_VALIDITY_LIMIT: f64 = 0.15;

/// Failures of integrators and closed-form evaluations.
#[derive(Debug, Error)]
pub enum DynamicsError {
    /// Initial state outside an integrator's domain.
    #[error("invalid initial state: {reason}")]
    InvalidInitialState { reason: String },
    /// Sample-time grid is empty, unsorted, or starts before t = 0.
    #[error("invalid time grid: {reason}")]
    InvalidTimeGrid { reason: String },
    /// A closed-form constant left its real domain.
    #[error("domain error: {context} (offending value {value:e})")]
    DomainError { context: String, value: f64 },
    /// A constant-extraction map cannot be inverted from this state.
    #[error("constants not recoverable: {reason}")]
    NonInvertible { reason: String },
    /// Tilt ratio outside the first-order validity window.
    #[error("tilt ratio |v| = {v:e} is outside the first-order validity window |v| < {limit}")]
    FirstOrderValidity { v: f64, limit: f64 },
    /// Constant-`f` phase equation evaluated at or past a turning point.
    #[error("turning point: |Z| = {z:e} reaches the admissible limit f = {f:e}")]
    TurningPoint { z: f64, f: f64 },
    /// Underlying density-matrix validation failure.
    #[error(transparent)]
    Density(#[from] DensityError),
}

/// One point of a pure-state trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JosephsonState<R> {
    /// Population imbalance `Z = (N_L − N_R)/N`.
    pub z: R,
    /// Relative phase, wrapped to `(-π, π]`.
    pub theta: R,
    /// Time (`ħ = 1` units).
    pub time: R,
}

/// One point of a fragmented-state trajectory in polar variables. Produced by
/// the first-order closed forms, which may overshoot `f = 1` by `O(v²)`, so
/// this deliberately does not enforce the density-matrix invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarSample<R> {
    /// Population imbalance `Z`.
    pub z: R,
    /// Relative phase.
    pub theta: R,
    /// Coherence magnitude `A`.
    pub a: R,
    /// Time.
    pub time: R,
}

/// Integration metadata attached to every trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct IntegratorInfo<R> {
    /// Scheme label.
    pub scheme: &'static str,
    /// Formal order of the stepper.
    pub order: u8,
    /// Step size actually used.
    pub step: R,
    /// Steps per oscillation period `2π/Ω`.
    pub steps_per_period: u32,
    /// Worst observed drift of the coherence measure `f`, normalised per
    /// oscillation period.
    pub f_drift_per_period: R,
    /// Worst observed relative trace drift per period. The Bloch and polar
    /// representations carry the trace as an exact constant, so this is zero
    /// by construction; it is reported for symmetry with other schemes.
    pub trace_drift_per_period: R,
    /// Oscillation frequency estimated from mean crossings of `Z(t)`, when
    /// enough crossings exist.
    pub frequency_estimate: Option<R>,
    /// How many steps of the polar scheme were delegated to the Bloch form
    /// (zero for the other engines).
    pub polar_fallback_steps: u64,
}

/// A sampled trajectory of the effective density matrix.
#[derive(Debug, Clone)]
pub struct Trajectory<R> {
    /// Trap parameters that generated the trajectory.
    pub params: TwoModeParams<R>,
    /// `(time, state)` samples on the requested grid.
    pub samples: Vec<(R, EffectiveDensityMatrixLR<R>)>,
    /// Continuously unwrapped relative phase at the sample times.
    pub theta_unwrapped: Vec<R>,
    /// Coherence measure of the initial state (conserved by the dynamics).
    pub f: R,
    /// Integrator metadata.
    pub info: IntegratorInfo<R>,
}

impl<R: Scalar> Trajectory<R> {
    /// Imbalance column `Z(t_i)`.
    pub fn imbalances(&self) -> Vec<R> {
        self.samples.iter().map(|(_, s)| s.z()).collect()
    }

    /// Sample times.
    pub fn times(&self) -> Vec<R> {
        self.samples.iter().map(|(t, _)| *t).collect()
    }
}

// ---------------------------------------------------------------------------
// Small fixed-dimension RK4 kernel.

fn axpy<R: Scalar, const D: usize>(y: [R; D], k: [R; D], h: R) -> [R; D] {
    let mut out = y;
    for i in 0..D {
        out[i] += h * k[i];
    }
    out
}

/// One classical Runge–Kutta step; returns the new state.
fn rk4_step<R: Scalar, const D: usize>(
    rhs: &impl Fn([R; D]) -> [R; D],
    y: [R; D],
    h: R,
) -> [R; D] {
    let half = h * R::lit(0.5);
    let k1 = rhs(y);
    let k2 = rhs(axpy(y, k1, half));
    let k3 = rhs(axpy(y, k2, half));
    let k4 = rhs(axpy(y, k3, h));
    let sixth = h / R::lit(6.0);
    let mut out = y;
    for i in 0..D {
        out[i] += sixth * (k1[i] + R::lit(2.0) * (k2[i] + k3[i]) + k4[i]);
    }
    out
}

// ---------------------------------------------------------------------------
// Node storage and dense output shared by all engines.

/// Uniform-step trajectory nodes in Bloch coordinates with stored derivatives
/// (for cubic Hermite dense output) and the unwrapped phase.
struct BlochNodes<R> {
    h: R,
    n: R,
    r: Vec<[R; 3]>,
    dr: Vec<[R; 3]>,
    theta_cont: Vec<R>,
}

impl<R: Scalar> BlochNodes<R> {
    /// Cubic Hermite interpolation of the Bloch vector plus the unwrapped
    /// phase at an arbitrary time inside the integrated range.
    fn sample(&self, t: R) -> ([R; 3], R) {
        let last = self.r.len() - 1;
        if last == 0 {
            return (self.r[0], self.theta_cont[0]);
        }
        let raw = (t / self.h).floor();
        let mut i = raw.to_usize().unwrap_or(0).min(last - 1);
        // Guard against rounding placing t marginally outside [i, i+1].
        if t < R::from_count(i) * self.h && i > 0 {
            i -= 1;
        }
        let s = (t - R::from_count(i) * self.h) / self.h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = R::lit(2.0) * s3 - R::lit(3.0) * s2 + R::one();
        let h10 = s3 - R::lit(2.0) * s2 + s;
        let h01 = -R::lit(2.0) * s3 + R::lit(3.0) * s2;
        let h11 = s3 - s2;
        let mut r = [R::zero(); 3];
        for d in 0..3 {
            r[d] = h00 * self.r[i][d]
                + h10 * self.h * self.dr[i][d]
                + h01 * self.r[i + 1][d]
                + h11 * self.h * self.dr[i + 1][d];
        }
        let wrapped = r[1].atan2(r[0]);
        let base = self.theta_cont[i];
        let theta = base + wrap_angle(wrapped - base);
        (r, theta)
    }

    /// Worst drift of `f = 2|r|/N` across the nodes, normalised per period.
    fn f_drift_per_period(&self, period: R) -> R {
        let f0 = self.f_at(0);
        let mut worst = R::zero();
        for i in 1..self.r.len() {
            worst = worst.max((self.f_at(i) - f0).abs());
        }
        let t_end = R::from_count(self.r.len() - 1) * self.h;
        if t_end > R::zero() {
            worst * (period / t_end).min(R::one())
        } else {
            R::zero()
        }
    }

    fn f_at(&self, i: usize) -> R {
        let [x, y, z] = self.r[i];
        let norm = x.hypot(y).hypot(z);
        R::lit(2.0) * norm / self.n
    }
}

fn bloch_rhs<R: Scalar>(params: &TwoModeParams<R>) -> impl Fn([R; 3]) -> [R; 3] {
    let v0 = params.v0;
    let k2 = R::lit(2.0) * params.k;
    move |[x, y, z]| [-v0 * y, v0 * x - k2 * z, k2 * y]
}

fn validate_grid<R: Scalar>(t_grid: &[R]) -> Result<(), DynamicsError> {
    if t_grid.is_empty() {
        return Err(DynamicsError::InvalidTimeGrid {
            reason: "no sample times requested".into(),
        });
    }
    if !(t_grid[0] >= R::zero()) {
        return Err(DynamicsError::InvalidTimeGrid {
            reason: "sample times must start at or after t = 0".into(),
        });
    }
    for w in t_grid.windows(2) {
        if !(w[1] >= w[0]) || !w[1].is_finite() {
            return Err(DynamicsError::InvalidTimeGrid {
                reason: "sample times must be finite and non-decreasing".into(),
            });
        }
    }
    Ok(())
}

fn step_plan<R: Scalar>(params: &TwoModeParams<R>, t_end: R, steps_per_period: u32) -> (R, usize) {
    let period = params.period();
    let h_target = period / R::from_u32(steps_per_period).expect("step count fits scalar");
    if t_end <= R::zero() {
        return (h_target, 0);
    }
    let n = (t_end / h_target).ceil().to_usize().unwrap_or(1).max(1);
    (t_end / R::from_count(n), n)
}

/// Mean-crossing frequency estimate: finds crossings of `Z(t)` through its
/// time average via linear interpolation, then regresses crossing time on
/// crossing index (slope = half period). Needs at least four crossings.
pub fn measure_frequency<R: Scalar>(times: &[R], z: &[R]) -> Option<R> {
    if times.len() != z.len() || times.len() < 8 {
        return None;
    }
    // Trapezoid time average.
    let mut area = R::zero();
    for i in 1..z.len() {
        area += (z[i] + z[i - 1]) * (times[i] - times[i - 1]) * R::lit(0.5);
    }
    let span = *times.last().unwrap() - times[0];
    if !(span > R::zero()) {
        return None;
    }
    let mean = area / span;
    // A flat signal has no oscillation to measure.
    let amplitude = z
        .iter()
        .fold(R::zero(), |acc, &v| acc.max((v - mean).abs()));
    if amplitude < R::lit(1e-12) * mean.abs().max(R::one()) {
        return None;
    }
    let mut crossings: Vec<R> = Vec::new();
    for i in 1..z.len() {
        let a = z[i - 1] - mean;
        let b = z[i] - mean;
        if (a < R::zero() && b > R::zero()) || (a > R::zero() && b < R::zero()) {
            let frac = a / (a - b);
            crossings.push(times[i - 1] + frac * (times[i] - times[i - 1]));
        }
    }
    if crossings.len() < 4 {
        return None;
    }
    // Least squares slope of crossing time vs index.
    let m = crossings.len();
    let mf = R::from_count(m);
    let kbar = (mf - R::one()) * R::lit(0.5);
    let tbar = crossings.iter().fold(R::zero(), |s, &t| s + t) / mf;
    let mut num = R::zero();
    let mut den = R::zero();
    for (k, &t) in crossings.iter().enumerate() {
        let dk = R::from_count(k) - kbar;
        num += dk * (t - tbar);
        den += dk * dk;
    }
    if den == R::zero() || num == R::zero() {
        return None;
    }
    let half_period = num / den;
    Some(R::PI() / half_period)
}

fn assemble<R: Scalar>(
    params: &TwoModeParams<R>,
    nodes: BlochNodes<R>,
    t_grid: &[R],
    scheme: &'static str,
    steps_per_period: u32,
    polar_fallback_steps: u64,
) -> Result<Trajectory<R>, DynamicsError> {
    let n = nodes.n;
    let period = params.period();
    let f0 = nodes.f_at(0);
    let half = R::lit(0.5);
    let mut samples = Vec::with_capacity(t_grid.len());
    let mut theta_unwrapped = Vec::with_capacity(t_grid.len());
    let mut node_times = Vec::with_capacity(nodes.r.len());
    let mut node_z = Vec::with_capacity(nodes.r.len());
    for i in 0..nodes.r.len() {
        node_times.push(R::from_count(i) * nodes.h);
        node_z.push(R::lit(2.0) * nodes.r[i][2] / n);
    }
    for &t in t_grid {
        let (r, theta_cont) = nodes.sample(t);
        let a = r[0].hypot(r[1]);
        let state = EffectiveDensityMatrixLR::new(
            n * half + r[2],
            n * half - r[2],
            a,
            r[1].atan2(r[0]),
        )?;
        samples.push((t, state));
        theta_unwrapped.push(theta_cont);
    }
    let info = IntegratorInfo {
        scheme,
        order: 4,
        step: nodes.h,
        steps_per_period,
        f_drift_per_period: nodes.f_drift_per_period(period),
        trace_drift_per_period: R::zero(),
        frequency_estimate: measure_frequency(&node_times, &node_z),
        polar_fallback_steps,
    };
    Ok(Trajectory {
        params: params.clone(),
        samples,
        theta_unwrapped,
        f: f0,
        info,
    })
}

// ---------------------------------------------------------------------------
// Engines.

/// Integrates an arbitrary (possibly fragmented) state by RK4 on the Bloch
/// vector. Valid for every physical state; the trace is carried exactly by
/// the representation.
pub fn integrate_liouville<R: Scalar>(
    params: &TwoModeParams<R>,
    init: &EffectiveDensityMatrixLR<R>,
    t_grid: &[R],
) -> Result<Trajectory<R>, DynamicsError> {
    integrate_liouville_with_steps(params, init, t_grid, DEFAULT_STEPS_PER_PERIOD)
}

/// [`integrate_liouville`] with explicit step resolution.
pub fn integrate_liouville_with_steps<R: Scalar>(
    params: &TwoModeParams<R>,
    init: &EffectiveDensityMatrixLR<R>,
    t_grid: &[R],
    steps_per_period: u32,
) -> Result<Trajectory<R>, DynamicsError> {
    validate_grid(t_grid)?;
    let n = init.n();
    let rhs = bloch_rhs(params);
    let (h, n_steps) = step_plan(params, *t_grid.last().unwrap(), steps_per_period);
    let r0 = [
        init.a * init.theta.cos(),
        init.a * init.theta.sin(),
        n * init.z() * R::lit(0.5),
    ];
    let mut r = Vec::with_capacity(n_steps + 1);
    let mut dr = Vec::with_capacity(n_steps + 1);
    let mut theta_cont = Vec::with_capacity(n_steps + 1);
    r.push(r0);
    dr.push(rhs(r0));
    theta_cont.push(init.theta);
    for i in 0..n_steps {
        let next = rk4_step(&rhs, r[i], h);
        dr.push(rhs(next));
        let wrapped = next[1].atan2(next[0]);
        let prev = theta_cont[i];
        theta_cont.push(prev + wrap_angle(wrapped - prev));
        r.push(next);
    }
    let nodes = BlochNodes {
        h,
        n,
        r,
        dr,
        theta_cont,
    };
    assemble(params, nodes, t_grid, "rk4-bloch", steps_per_period, 0)
}

/// Integrates in the polar amplitude–phase variables `(Z, θ, A)`:
///
/// ```text
/// Ż = (4K/N)·A·sin θ
/// θ̇ = (E_L − E_R) − (K N Z / A)·cos θ
/// Ȧ = A·tan θ·(θ̇ − (E_L − E_R))
/// ```
///
/// Steps that start with `|cos θ| < 0.1` or `A/N < 10⁻⁶` are delegated to the
/// Bloch form, where the right-hand side stays regular; the count of such
/// steps is reported in the metadata.
pub fn integrate_generalized<R: Scalar>(
    params: &TwoModeParams<R>,
    init: &EffectiveDensityMatrixLR<R>,
    t_grid: &[R],
) -> Result<Trajectory<R>, DynamicsError> {
    integrate_generalized_with_steps(params, init, t_grid, DEFAULT_STEPS_PER_PERIOD)
}

/// [`integrate_generalized`] with explicit step resolution.
pub fn integrate_generalized_with_steps<R: Scalar>(
    params: &TwoModeParams<R>,
    init: &EffectiveDensityMatrixLR<R>,
    t_grid: &[R],
    steps_per_period: u32,
) -> Result<Trajectory<R>, DynamicsError> {
    validate_grid(t_grid)?;
    if !(init.a > R::zero()) {
        return Err(DynamicsError::InvalidInitialState {
            reason: "the polar scheme needs a nonzero coherence magnitude A(0) > 0".into(),
        });
    }
    let n = init.n();
    let v0 = params.v0;
    let kk = params.k;
    let polar_rhs = move |[z, theta, a]: [R; 3]| {
        let (st, ct) = theta.sin_cos();
        let zdot = R::lit(4.0) * kk / n * a * st;
        let thetadot = v0 - kk * n * z / a * ct;
        let adot = a * (st / ct) * (thetadot - v0);
        [zdot, thetadot, adot]
    };
    let bloch = bloch_rhs(params);
    let (h, n_steps) = step_plan(params, *t_grid.last().unwrap(), steps_per_period);
    let cos_guard = R::lit(0.1);
    let amp_guard = n * R::lit(1e-6);
    // Polar rates beyond this phase advance per step mark a coherence-trough
    // crossing — the (x, y) point swings past the origin faster than a fixed
    // step can track — so those steps are delegated as well.
    let rate_guard = R::lit(0.01);

    let mut r = Vec::with_capacity(n_steps + 1);
    let mut dr = Vec::with_capacity(n_steps + 1);
    let mut theta_cont = Vec::with_capacity(n_steps + 1);
    let mut fallback_steps = 0u64;
    // Polar state with continuous phase.
    let mut u = [init.z(), init.theta, init.a];
    let to_bloch = |[z, theta, a]: [R; 3]| {
        [a * theta.cos(), a * theta.sin(), n * z * R::lit(0.5)]
    };
    let push_node =
        |r: &mut Vec<[R; 3]>, dr: &mut Vec<[R; 3]>, bloch: &dyn Fn([R; 3]) -> [R; 3], rv: [R; 3]| {
            dr.push(bloch(rv));
            r.push(rv);
        };
    push_node(&mut r, &mut dr, &bloch, to_bloch(u));
    theta_cont.push(u[1]);
    for _ in 0..n_steps {
        let use_fallback = u[1].cos().abs() < cos_guard || u[2] < amp_guard || {
            // Safe to evaluate here: the seam cases are already delegated.
            let [_, thetadot, adot] = polar_rhs(u);
            (thetadot - v0).abs() * h > rate_guard || adot.abs() * h > rate_guard * u[2]
        };
        if use_fallback {
            fallback_steps += 1;
            let rv = to_bloch(u);
            let next = rk4_step(&bloch, rv, h);
            let a = next[0].hypot(next[1]);
            let wrapped = next[1].atan2(next[0]);
            let theta = u[1] + wrap_angle(wrapped - u[1]);
            u = [R::lit(2.0) * next[2] / n, theta, a];
        } else {
            u = rk4_step(&polar_rhs, u, h);
        }
        push_node(&mut r, &mut dr, &bloch, to_bloch(u));
        theta_cont.push(u[1]);
    }
    let nodes = BlochNodes {
        h,
        n,
        r,
        dr,
        theta_cont,
    };
    assemble(
        params,
        nodes,
        t_grid,
        "rk4-polar-hybrid",
        steps_per_period,
        fallback_steps,
    )
}

/// Integrates the pure-state (`f = 1`) system in `(Z, θ)` for `N` particles:
/// `Ż = 2K√(1−Z²) sin θ`, `θ̇ = V₀ − 2KZ cos θ/√(1−Z²)`.
pub fn integrate_standard<R: Scalar>(
    params: &TwoModeParams<R>,
    n: R,
    z0: R,
    theta0: R,
    t_grid: &[R],
) -> Result<Trajectory<R>, DynamicsError> {
    integrate_standard_with_steps(params, n, z0, theta0, t_grid, DEFAULT_STEPS_PER_PERIOD)
}

/// [`integrate_standard`] with explicit step resolution.
pub fn integrate_standard_with_steps<R: Scalar>(
    params: &TwoModeParams<R>,
    n: R,
    z0: R,
    theta0: R,
    t_grid: &[R],
    steps_per_period: u32,
) -> Result<Trajectory<R>, DynamicsError> {
    validate_grid(t_grid)?;
    if z0.abs() > R::one() {
        return Err(DynamicsError::InvalidInitialState {
            reason: format!("|Z₀| = {} exceeds 1", z0.abs()),
        });
    }
    if !(n > R::zero()) {
        return Err(DynamicsError::InvalidInitialState {
            reason: "particle number must be positive".into(),
        });
    }
    let v0 = params.v0;
    let kk = params.k;
    let rhs = move |[z, theta]: [R; 2]| {
        let s2 = (R::one() - z * z).max(R::zero());
        let s = s2.sqrt().max(R::lit(1e-300));
        let (st, ct) = theta.sin_cos();
        [
            R::lit(2.0) * kk * s * st,
            v0 - R::lit(2.0) * kk * z * ct / s,
        ]
    };
    let (h, n_steps) = step_plan(params, *t_grid.last().unwrap(), steps_per_period);
    let mut u = [z0, theta0];
    let half = R::lit(0.5);
    let to_bloch = |[z, theta]: [R; 2]| {
        let a = n * half * (R::one() - z * z).max(R::zero()).sqrt();
        [a * theta.cos(), a * theta.sin(), n * z * half]
    };
    let bloch = bloch_rhs(params);
    let mut r = Vec::with_capacity(n_steps + 1);
    let mut dr = Vec::with_capacity(n_steps + 1);
    let mut theta_cont = Vec::with_capacity(n_steps + 1);
    r.push(to_bloch(u));
    dr.push(bloch(to_bloch(u)));
    theta_cont.push(theta0);
    for _ in 0..n_steps {
        u = rk4_step(&rhs, u, h);
        let rv = to_bloch(u);
        dr.push(bloch(rv));
        r.push(rv);
        theta_cont.push(u[1]);
    }
    let nodes = BlochNodes {
        h,
        n,
        r,
        dr,
        theta_cont,
    };
    assemble(
        params,
        nodes,
        t_grid,
        "rk4-pure-state",
        steps_per_period,
        0,
    )
}

// ---------------------------------------------------------------------------
// Closed-form solutions: pure-state family.

/// Constants of the exact pure-state solution.
///
/// With `δ = (E_L − E_R)/(2K) = −V₀/ΔE`, the combination
/// `P = √(1 − Z₀²) cos θ₀ + δ Z₀` is conserved and the imbalance is an exact
/// sinusoid:
///
/// ```text
/// Z(t) = Z̄ + R·sin(ω̃ t + Φ),   Z̄ = δP/(1+δ²),
/// R = √(1+δ²−P²)/(1+δ²),        ω̃ = (2K/ħ)√(1+δ²)  (< 0)
/// ```
///
/// The redundant constant set `(Δρ_s, φ₀ₛ, c₂, δα)` is fixed canonically:
/// the phase split `δα` is set to zero (all phase lives in `φ₀ₛ = Φ`), which
/// pins `c₂ = P·δ/(√(1+δ²)(1+√(1+δ²)))` and `Δρ_s = R√(1+δ²)`.
///
/// Construction requires `0 < P ≤ 1`. `P ≤ 0` or `P > 1` (beyond rounding)
/// leaves the amplitude map without a real solution in this anchoring —
/// re-anchor time zero on the other side of the orbit (shift `t = 0` by half
/// a period, i.e. start from `(Z, −θ)` mapped through the turning point).
/// At `P = 1` exactly, `D = 1 − P² = 0` makes `β̄` and `γ̄` infinite; they are
/// diagnostic fields only and the evaluator never divides by `D`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StandardSolutionConstants<R> {
    /// Tilt constant `δ = −V₀/ΔE`.
    pub delta: R,
    /// Oscillation amplitude constant `Δρ_s = R√(1+δ²) ∈ [0, 1]`.
    pub drho_s: R,
    /// Initial phase `φ₀ₛ` (canonical: the full phase `Φ`).
    pub phi0s: R,
    /// Offset constant `c₂` (vanishes with the tilt).
    pub c2: R,
    /// Phase-split constant `δα` (zero in the canonical anchoring).
    pub delta_alpha: R,
    /// Rate constant `ᾱ = (2K/ħ)√D`, `D = 1 − P²` (signed, ≤ 0).
    pub alpha_bar: R,
    /// Offset rate `β̄ = 2δP/D` (infinite at `P = 1`).
    pub beta_bar: R,
    /// Curvature `γ̄ = (1+δ²)/D` (infinite at `P = 1`).
    pub gamma_bar: R,
    /// Conserved projection `P ∈ (0, 1]`.
    pub p_conserved: R,
    /// Mean imbalance `Z̄`.
    pub z_bar: R,
    /// Sinusoid amplitude `R`.
    pub r_amp: R,
    /// Signed angular frequency `ω̃ = −(ΔE/ħ)√(1+δ²)`.
    pub omega_tilde: R,
    /// Mode splitting `ΔE` (sets the clock).
    pub delta_e: R,
}

impl<R: Scalar> StandardSolutionConstants<R> {
    /// Extracts the constants from an initial pure state `(Z₀, θ₀)`.
    pub fn from_init(
        params: &TwoModeParams<R>,
        z0: R,
        theta0: R,
    ) -> Result<Self, DynamicsError> {
        if z0.abs() > R::one() {
            return Err(DynamicsError::InvalidInitialState {
                reason: format!("|Z₀| = {} exceeds 1", z0.abs()),
            });
        }
        let delta = -params.v_ratio();
        let s0 = (R::one() - z0 * z0).max(R::zero()).sqrt();
        let mut p = s0 * theta0.cos() + delta * z0;
        let tol = R::lit(1e-12);
        if p <= tol {
            return Err(DynamicsError::DomainError {
                context: "conserved projection P = √(1−Z₀²)cosθ₀ + δZ₀ must be positive; \
                          re-anchor time zero half a period away (the mirrored state \
                          (Z₀, −θ₀±π) starts the same orbit with P > 0)"
                    .into(),
                value: p.to_f64().unwrap_or(f64::NAN),
            });
        }
        if p > R::one() {
            if p <= R::one() + tol {
                p = R::one();
            } else {
                return Err(DynamicsError::DomainError {
                    context: "conserved projection P exceeds 1: the amplitude square root \
                              turns negative in this anchoring; re-anchor time zero at a \
                              turning point of the orbit"
                        .into(),
                    value: p.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let one_d2 = R::one() + delta * delta;
        let root = one_d2.sqrt();
        let d_cap = (R::one() - p * p).max(R::zero());
        let z_bar = delta * p / one_d2;
        let r_amp = (one_d2 - p * p).max(R::zero()).sqrt() / one_d2;
        let omega_tilde = -params.delta_e * root;
        let drho_s = (r_amp * root).min(R::one());
        let phi0s = if r_amp < R::lit(1e-15) {
            R::zero()
        } else {
            (z0 - z_bar).atan2(s0 * theta0.sin() / root)
        };
        // c₂ = (P − √(1−Δρ²))/δ in the rationalised form that stays finite
        // as δ → 0 (uses √(1−Δρ²) = P/√(1+δ²) exactly).
        let c2 = p * delta / (root * (R::one() + root));
        Ok(Self {
            delta,
            drho_s,
            phi0s,
            c2,
            delta_alpha: R::zero(),
            alpha_bar: R::lit(2.0) * params.k * d_cap.sqrt(),
            beta_bar: R::lit(2.0) * delta * p / d_cap,
            gamma_bar: one_d2 / d_cap,
            p_conserved: p,
            z_bar,
            r_amp,
            omega_tilde,
            delta_e: params.delta_e,
        })
    }

    /// Full oscillation phase at time `t`.
    fn phase(&self, t: R) -> R {
        self.omega_tilde * t + self.phi0s + self.delta_alpha
    }
}

/// Exact pure-state solution at time `t`:
/// `Z(t) = Z̄ + R sin(ω̃t + Φ)` and
/// `θ(t) = atan2(−Ż/ΔE, P − δZ)` (both components share the positive factor
/// `1/√(1−Z²)`, which cancels in the angle).
///
/// Fails with a domain error if the phase reconstruction argument
/// `(P − δZ)/√(1−Z²)` leaves `[−1−10⁻⁹, 1+10⁻⁹]`, which signals inconsistent
/// constants rather than a legal state.
pub fn analytic_standard<R: Scalar>(
    c: &StandardSolutionConstants<R>,
    t: R,
) -> Result<JosephsonState<R>, DynamicsError> {
    let psi = c.phase(t);
    let z = c.z_bar + c.r_amp * psi.sin();
    let zdot = c.r_amp * c.omega_tilde * psi.cos();
    let cos_num = c.p_conserved - c.delta * z;
    let sin_num = -zdot / c.delta_e;
    let s2 = (R::one() - z * z).max(R::zero());
    if s2 > R::zero() {
        let ratio = cos_num / s2.sqrt();
        if ratio.abs() > R::one() + R::lit(1e-9) {
            return Err(DynamicsError::DomainError {
                context: "phase reconstruction argument (P − δZ)/√(1−Z²) left [−1, 1]"
                    .into(),
                value: ratio.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(JosephsonState {
        z,
        theta: sin_num.atan2(cos_num),
        time: t,
    })
}

/// First-order-in-tilt form of the pure-state solution, written in the
/// constants `(Δρ_s, φ₀ₛ, c₂, δα)` with `v = V₀/ΔE` and phase
/// `ψ = φ₀ₛ + δα − (ΔE/ħ)t`:
///
/// ```text
/// Z = −v√(1−Δρ²) + (Δρ + c₂v√(1−Δρ²)/Δρ)·sinψ − v·δα·Δρ·cosψ
/// θ = atan2(Δρ cosψ, √(1−Δρ²))
///     − v·[Δρ³ sinψ cosψ − c₂ cosψ − δα·Δρ²√(1−Δρ²) sinψ] / [Δρ(1−Δρ² sin²ψ)]
/// ```
///
/// Exact at `v = 0`; the error is `O(v²)` uniformly on the orbit. Needs
/// `Δρ_s ≥ 10⁻⁹` (the formula linearises around a finite-amplitude symmetric
/// orbit and degenerates at a fixed point).
pub fn analytic_standard_linearized<R: Scalar>(
    c: &StandardSolutionConstants<R>,
    t: R,
) -> Result<JosephsonState<R>, DynamicsError> {
    let v = -c.delta;
    let drho = c.drho_s;
    if drho < R::lit(1e-9) {
        return Err(DynamicsError::DomainError {
            context: "first-order form needs a finite oscillation amplitude Δρ_s ≥ 1e-9"
                .into(),
            value: drho.to_f64().unwrap_or(f64::NAN),
        });
    }
    let psi = c.phi0s + c.delta_alpha - c.delta_e * t;
    let (sp, cp) = psi.sin_cos();
    let root = (R::one() - drho * drho).max(R::zero()).sqrt();
    let alpha = c.delta_alpha;
    let z = -v * root + (drho + c.c2 * v * root / drho) * sp - v * alpha * drho * cp;
    let theta0 = (drho * cp).atan2(root);
    let denom = drho * (R::one() - drho * drho * sp * sp);
    let theta1 = -v
        * (drho * drho * drho * sp * cp - c.c2 * cp - alpha * drho * drho * root * sp)
        / denom;
    Ok(JosephsonState {
        z,
        theta: theta0 + theta1,
        time: t,
    })
}

// ---------------------------------------------------------------------------
// Closed-form solutions: fragmented-state family.

/// Constants of the fragmented-state closed form.
///
/// For a symmetric trap the exact solution of the polar system is
///
/// ```text
/// Z(t) = Δρ_s·sin ψ,   θ(t) = −arctan(C_m cos ψ),   A(t) = e^{B_s}·ζ(t),
/// ψ = (ΔE/ħ)t + φ₀ₛ,   C_m = N Δρ_s e^{−B_s}/2,    ζ = √(1 + C_m² cos²ψ)
/// ```
///
/// with the log-scale fixed by inversion `e^{B_s} = A₀ cos θ₀` (requires
/// `cos θ₀ > 0`; otherwise re-anchor time zero a half period away). The
/// fragmentation is `f = √((2e^{B_s}/N)² + Δρ_s²)`, and the state is pure
/// exactly when `1 − Δρ_s² = (2e^{B_s}/N)²`.
///
/// A small tilt adds first-order corrections parameterised by the constant
/// pair `(c₁, δφ₀)` — stored in magnitude/phase form, with Cartesian
/// components `u₁ = c₁ cos δφ₀`, `u₂ = c₁ sin δφ₀` — and a log-scale shift
/// `δB`, all recovered from the initial state by an affine 3×3 solve.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GeneralizedSolutionConstants<R> {
    /// Log-scale `B_s` of the coherence: `e^{B_s} = A₀ cos θ₀ > 0`.
    pub b_s: R,
    /// Imbalance amplitude `Δρ_s ∈ [0, 1]`.
    pub drho_s: R,
    /// Initial phase `φ₀ₛ` in the symmetric-display convention
    /// (`Z₀ = Δρ_s sin φ₀ₛ`, `−(2A₀/N) sin θ₀ = Δρ_s cos φ₀ₛ`).
    pub phi0s: R,
    /// Magnitude of the first-order constant pair.
    pub c1: R,
    /// Phase of the first-order constant pair.
    pub delta_phi0: R,
    /// First-order log-scale shift (identically zero when recovered from an
    /// initial state; kept as an explicit degree of freedom).
    pub delta_b: R,
    /// Particle number the constants were built for.
    pub n: R,
    /// Tilt ratio `v = V₀/ΔE` at construction; first-order displays are
    /// trustworthy for `|v| < 0.15`.
    pub v_ratio: R,
}

impl<R: Scalar> GeneralizedSolutionConstants<R> {
    /// Coherence scale `e^{B_s}`.
    pub fn e_b_s(&self) -> R {
        self.b_s.exp()
    }

    /// Phase-modulation depth `C_m = N Δρ_s e^{−B_s}/2`.
    pub fn c_m(&self) -> R {
        self.n * self.drho_s * (-self.b_s).exp() * R::lit(0.5)
    }

    /// Amplitude modulation `ζ(t) = √(1 + C_m² cos²ψ)` on the symmetric
    /// phase `ψ = (ΔE/ħ)t + φ₀ₛ`.
    pub fn zeta(&self, delta_e: R, t: R) -> R {
        let c = (delta_e * t + self.phi0s).cos() * self.c_m();
        (R::one() + c * c).sqrt()
    }

    /// Fragmentation of the symmetric-trap solution (a constant of motion).
    pub fn fragmentation(&self) -> R {
        let scale = R::lit(2.0) * self.e_b_s() / self.n;
        scale.hypot(self.drho_s)
    }

    /// Whether the first-order asymmetric display is inside its validity
    /// window `|V₀/ΔE| < 0.15`.
    pub fn first_order_valid(&self) -> bool {
        self.v_ratio.abs() < R::lit(TILT_VALIDITY_LIMIT)
    }

    /// Extracts the constants from an initial fragmented state.
    ///
    /// The zeroth-order (symmetric) constants come from the exact inversion;
    /// for a tilted trap the first-order constants `(u₁, u₂, δB)` are the
    /// solution of the affine 3×3 system that makes the first-order display
    /// reproduce `(Z₀, θ₀, A₀)` at `t = 0` exactly.
    pub fn from_init(
        init: &EffectiveDensityMatrixLR<R>,
        params: &TwoModeParams<R>,
    ) -> Result<Self, DynamicsError> {
        let n = init.n();
        let a0 = init.a;
        let theta0 = init.theta;
        let z0 = init.z();
        let e_b = a0 * theta0.cos();
        if !(e_b > R::zero()) {
            return Err(DynamicsError::NonInvertible {
                reason: format!(
                    "scale inversion needs A₀ cos θ₀ > 0 (got {e_b:e}); re-anchor time \
                     zero half a period away where the phase returns to (−π/2, π/2)"
                ),
            });
        }
        let sin_part = z0;
        let cos_part = -(R::lit(2.0) * a0 / n) * theta0.sin();
        let drho_s = sin_part.hypot(cos_part).min(R::one());
        let phi0s = if drho_s < R::lit(1e-300) {
            R::zero()
        } else {
            sin_part.atan2(cos_part)
        };
        let mut constants = Self {
            b_s: e_b.ln(),
            drho_s,
            phi0s,
            c1: R::zero(),
            delta_phi0: R::zero(),
            delta_b: R::zero(),
            n,
            v_ratio: params.v_ratio(),
        };
        if params.v0 == R::zero() {
            return Ok(constants);
        }
        // First-order constants: the display is affine in (u₁, u₂, δB), so
        // four evaluations at t = 0 give the residual and the three columns.
        let phi_c = wrap_angle(R::PI() - phi0s);
        let display = |u1: R, u2: R, db: R| {
            asym_display(
                n,
                params.delta_e,
                params.v0,
                e_b,
                drho_s,
                phi_c,
                u1,
                u2,
                db,
                R::zero(),
            )
        };
        let base = display(R::zero(), R::zero(), R::zero());
        let target = [z0, theta0, a0];
        let mut rhs = [R::zero(); 3];
        for i in 0..3 {
            rhs[i] = target[i] - base[i];
        }
        let one = R::one();
        let cols = [
            display(one, R::zero(), R::zero()),
            display(R::zero(), one, R::zero()),
            display(R::zero(), R::zero(), one),
        ];
        let mut m = [[R::zero(); 3]; 3];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..3 {
                m[i][j] = col[i] - base[i];
            }
        }
        let sol = solve3(m, rhs).ok_or_else(|| DynamicsError::NonInvertible {
            reason: "first-order constant system is singular for this state".into(),
        })?;
        constants.c1 = sol[0].hypot(sol[1]);
        constants.delta_phi0 = if constants.c1 == R::zero() {
            R::zero()
        } else {
            sol[1].atan2(sol[0])
        };
        constants.delta_b = sol[2];
        Ok(constants)
    }

    /// The constant choice that embeds a pure state (`f = 1`): with the
    /// pure-state constants `(Δρ_s, Φ, c₂, δα)` the fragmented-family display
    /// reduces to the pure-state solution through first order when
    ///
    /// ```text
    /// e^{B_s} = (N/2)√(1−Δρ_s²),   u₁ = 2·δα·Δρ/√(1−Δρ²),
    /// u₂ = 2c₂/(Δρ(1−Δρ²)),        δB = 2(Δρ sin φ − c₂)/√(1−Δρ²)
    /// ```
    ///
    /// (phases mapped between the two display conventions).
    pub fn pure_state_choice(
        std_constants: &StandardSolutionConstants<R>,
        n: R,
    ) -> Result<Self, DynamicsError> {
        let drho = std_constants.drho_s;
        if drho < R::lit(1e-9) || drho > R::one() - R::lit(1e-12) {
            return Err(DynamicsError::NonInvertible {
                reason: format!(
                    "pure-state embedding needs 0 < Δρ_s < 1 bounded away from both ends \
                     (got {drho:e})"
                ),
            });
        }
        let root = (R::one() - drho * drho).sqrt();
        let phi_c = std_constants.phi0s + std_constants.delta_alpha;
        let u1 = R::lit(2.0) * std_constants.delta_alpha * drho / root;
        let u2 = R::lit(2.0) * std_constants.c2 / (drho * (R::one() - drho * drho));
        let db = R::lit(2.0) * (drho * phi_c.sin() - std_constants.c2) / root;
        let c1 = u1.hypot(u2);
        Ok(Self {
            b_s: (n * R::lit(0.5) * root).ln(),
            drho_s: drho,
            phi0s: wrap_angle(R::PI() - phi_c),
            c1,
            delta_phi0: if c1 == R::zero() {
                R::zero()
            } else {
                u2.atan2(u1)
            },
            delta_b: db,
            n,
            v_ratio: -std_constants.delta,
        })
    }
}

/// Gaussian elimination with partial pivoting for a 3×3 system.
fn solve3<R: Scalar>(mut m: [[R; 3]; 3], mut b: [R; 3]) -> Option<[R; 3]> {
    let mut scale = R::zero();
    for row in &m {
        for &v in row {
            scale = scale.max(v.abs());
        }
    }
    if scale == R::zero() {
        return None;
    }
    for col in 0..3 {
        let mut piv = col;
        for row in col + 1..3 {
            if m[row][col].abs() > m[piv][col].abs() {
                piv = row;
            }
        }
        if m[piv][col].abs() < scale * R::epsilon() * R::lit(16.0) {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= factor * m[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [R::zero(); 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in row + 1..3 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// The first-order tilted display in the phase convention natural to the
/// tilt expansion, `ψ = φᶜ − (ΔE/ħ)t` with `φᶜ = π − φ₀ₛ`. Returns
/// `(Z, θ, A)`; affine in `(u₁, u₂, δB)`.
#[allow(clippy::too_many_arguments)]
fn asym_display<R: Scalar>(
    n: R,
    delta_e: R,
    v0: R,
    e_b: R,
    drho: R,
    phi_c: R,
    u1: R,
    u2: R,
    db: R,
    t: R,
) -> [R; 3] {
    let vp = v0 / (R::lit(2.0) * delta_e);
    let psi = phi_c - delta_e * t;
    let (sp, cp) = psi.sin_cos();
    let s2p = (psi + psi).sin();
    let c_m = n * drho / (R::lit(2.0) * e_b);
    let zeta2 = R::one() + c_m * c_m * cp * cp;
    let zeta = zeta2.sqrt();
    let sin_phi_c = phi_c.sin();

    let g = u1 * sp + u2 * cp - c_m * c_m * s2p;
    let theta = (c_m * cp).atan() + vp * g / zeta2;

    let half_nd = drho * n * R::lit(0.5);
    let a = e_b * zeta
        + vp * (n * drho * zeta * (sp - sin_phi_c))
        - vp * (half_nd * half_nd * half_nd) * cp * s2p / (e_b * e_b * zeta)
        + vp * (half_nd / zeta) * cp * (u1 * sp + u2 * cp)
        + vp * e_b * zeta * db;

    let z_coeff = drho
        - vp / (e_b * n)
            * ((drho * n) * (drho * n) * sin_phi_c
                - R::lit(2.0) * e_b * e_b * u2
                - e_b * db * drho * n);
    let z = z_coeff * sp
        - R::lit(4.0) * vp * e_b / n
        - R::lit(2.0) * vp * (e_b / n) * u1 * cp;
    [z, theta, a]
}

/// Exact symmetric-trap evaluation of the fragmented-family solution.
/// The result is always a valid state: `f = √((2e^{B_s}/N)² + Δρ_s²)` is a
/// constant of the motion.
pub fn analytic_generalized_symmetric<R: Scalar>(
    c: &GeneralizedSolutionConstants<R>,
    delta_e: R,
    t: R,
) -> Result<EffectiveDensityMatrixLR<R>, DynamicsError> {
    let psi = delta_e * t + c.phi0s;
    let (sp, cp) = psi.sin_cos();
    let z = c.drho_s * sp;
    let c_m = c.c_m();
    let theta = -(c_m * cp).atan();
    let a = c.e_b_s() * (R::one() + c_m * c_m * cp * cp).sqrt();
    let n = c.n;
    let half = R::lit(0.5);
    Ok(EffectiveDensityMatrixLR::new(
        n * (R::one() + z) * half,
        n * (R::one() - z) * half,
        a,
        theta,
    )?)
}

/// First-order evaluation of the fragmented-family solution for a tilted
/// trap. Returns a [`PolarSample`] rather than a validated density matrix:
/// the neglected `O(v²)` terms can push `f` past 1 by that margin.
///
/// Errors when the constants sit outside the validity window `|v| < 0.15`.
pub fn analytic_generalized_asymmetric<R: Scalar>(
    c: &GeneralizedSolutionConstants<R>,
    params: &TwoModeParams<R>,
    t: R,
) -> Result<PolarSample<R>, DynamicsError> {
    if !c.first_order_valid() {
        return Err(DynamicsError::FirstOrderValidity {
            v: c.v_ratio.to_f64().unwrap_or(f64::NAN),
            limit: TILT_VALIDITY_LIMIT,
        });
    }
    let phi_c = wrap_angle(R::PI() - c.phi0s);
    let (u1, u2) = (
        c.c1 * c.delta_phi0.cos(),
        c.c1 * c.delta_phi0.sin(),
    );
    let [z, theta, a] = asym_display(
        c.n,
        params.delta_e,
        params.v0,
        c.e_b_s(),
        c.drho_s,
        phi_c,
        u1,
        u2,
        c.delta_b,
        t,
    );
    Ok(PolarSample { z, theta, a, time: t })
}

/// Right-hand side of the constant-`f` phase-plane system,
/// `Ż = 2K√(f²−Z²) sin θ`, `θ̇ = V₀ − 2KZ cos θ/√(f²−Z²)`, returned as
/// `(Ż, θ̇)`. Errors at a turning point `|Z| ≥ f − 10⁻¹²`, where the phase
/// equation is singular.
pub fn f_form_rhs<R: Scalar>(
    params: &TwoModeParams<R>,
    f: R,
    z: R,
    theta: R,
) -> Result<(R, R), DynamicsError> {
    if z.abs() >= f - R::lit(1e-12) {
        return Err(DynamicsError::TurningPoint {
            z: z.to_f64().unwrap_or(f64::NAN),
            f: f.to_f64().unwrap_or(f64::NAN),
        });
    }
    let s = (f * f - z * z).sqrt();
    let (st, ct) = theta.sin_cos();
    let two_k = R::lit(2.0) * params.k;
    Ok((two_k * s * st, params.v0 - two_k * z * ct / s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::EffectiveDensityMatrixLR;
    use crate::wellmodes::TwoModeParams;
    use approx::assert_abs_diff_eq;

    fn grid(t_end: f64, count: usize) -> Vec<f64> {
        (0..=count).map(|i| t_end * i as f64 / count as f64).collect()
    }

    fn state(n: f64, z: f64, two_a_over_n: f64, theta: f64) -> EffectiveDensityMatrixLR<f64> {
        EffectiveDensityMatrixLR::new(
            n * (1.0 + z) / 2.0,
            n * (1.0 - z) / 2.0,
            n * two_a_over_n / 2.0,
            theta,
        )
        .unwrap()
    }

    #[test]
    fn liouville_conserves_f_and_trace() {
        let params = TwoModeParams::direct(1.0, 0.08);
        let init = state(100.0, 0.3, 0.5, 0.7);
        let t = grid(10.0 * params.period(), 500);
        let traj = integrate_liouville(&params, &init, &t).unwrap();
        assert!(traj.info.f_drift_per_period < 1e-9, "{}", traj.info.f_drift_per_period);
        assert_eq!(traj.info.trace_drift_per_period, 0.0);
        for (_, s) in &traj.samples {
            assert_abs_diff_eq!(s.n(), 100.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn pure_state_engines_agree() {
        let params = TwoModeParams::direct(1.0, 0.05);
        let (z0, theta0) = (0.3, 0.4);
        let n = 50.0;
        let t = grid(10.0 * params.period(), 400);
        let st = integrate_standard(&params, n, z0, theta0, &t).unwrap();
        let init = state(n, z0, (1.0 - z0 * z0).sqrt(), theta0);
        let gen = integrate_generalized(&params, &init, &t).unwrap();
        let li = integrate_liouville(&params, &init, &t).unwrap();
        for i in 0..t.len() {
            let a = st.samples[i].1.z();
            let b = gen.samples[i].1.z();
            let c = li.samples[i].1.z();
            assert!((a - b).abs() < 1e-8, "standard vs polar at {}: {} {}", t[i], a, b);
            assert!((a - c).abs() < 1e-8, "standard vs bloch at {}: {} {}", t[i], a, c);
        }
    }

    #[test]
    fn integration_matches_exact_pure_state_solution() {
        let params = TwoModeParams::direct(1.0, 0.09);
        let (z0, theta0) = (0.4, 1.1);
        let c = StandardSolutionConstants::from_init(&params, z0, theta0).unwrap();
        let t = grid(5.0 * params.period(), 300);
        let traj = integrate_standard(&params, 1.0, z0, theta0, &t).unwrap();
        for (i, &ti) in t.iter().enumerate() {
            let exact = analytic_standard(&c, ti).unwrap();
            assert!(
                (traj.samples[i].1.z() - exact.z).abs() < 2e-9,
                "Z mismatch at t={ti}: {} vs {}",
                traj.samples[i].1.z(),
                exact.z
            );
            let dtheta = wrap_angle(traj.samples[i].1.theta - exact.theta);
            assert!(dtheta.abs() < 2e-8, "θ mismatch at t={ti}: {dtheta}");
        }
        // And the constants reproduce the anchor point exactly.
        let at0 = analytic_standard(&c, 0.0).unwrap();
        assert_abs_diff_eq!(at0.z, z0, epsilon = 1e-13);
        assert_abs_diff_eq!(at0.theta, theta0, epsilon = 1e-13);
    }

    #[test]
    fn exact_solution_frequency_is_the_tilted_rate() {
        let params = TwoModeParams::direct(1.0, 0.12);
        let t = grid(20.0 * params.period(), 2000);
        let traj = integrate_standard(&params, 1.0, 0.35, 0.9, &t).unwrap();
        let measured = traj.info.frequency_estimate.expect("enough crossings");
        let expected = params.omega();
        assert!(
            ((measured - expected) / expected).abs() < 1e-5,
            "{measured} vs {expected}"
        );
    }

    #[test]
    fn linearized_form_converges_at_first_order() {
        // Halving the tilt must cut the O(v²) error by about 4.
        let err = |v: f64| -> f64 {
            let params = TwoModeParams::direct(1.0, v);
            let c = StandardSolutionConstants::from_init(&params, 0.25, 0.5).unwrap();
            let t = grid(3.0 * params.period(), 200);
            let mut worst = 0.0f64;
            for &ti in &t {
                let exact = analytic_standard(&c, ti).unwrap();
                let lin = analytic_standard_linearized(&c, ti).unwrap();
                worst = worst.max((exact.z - lin.z).abs());
            }
            worst
        };
        let ratio = err(0.08) / err(0.04);
        assert!(
            (3.4..=4.6).contains(&ratio),
            "first-order convergence ratio {ratio}"
        );
    }

    #[test]
    fn domain_errors_guide_re_anchoring() {
        let params = TwoModeParams::direct(1.0, 0.1);
        // cos θ₀ = −1 makes P negative.
        let err = StandardSolutionConstants::from_init(&params, 0.0, std::f64::consts::PI);
        assert!(matches!(err, Err(DynamicsError::DomainError { .. })));
        // The sliver between 0 and 2δ/(1+δ²) at θ₀ = 0 pushes P above 1
        // (δ = −0.1 here, so the sliver sits at negative Z₀).
        let err = StandardSolutionConstants::from_init(&params, -0.05, 0.0);
        assert!(matches!(err, Err(DynamicsError::DomainError { .. })));
    }

    #[test]
    fn generalized_constants_reproduce_the_anchor() {
        let params = TwoModeParams::direct(1.0, 0.06);
        let init = state(80.0, 0.2, 0.45, -0.5);
        let c = GeneralizedSolutionConstants::from_init(&init, &params).unwrap();
        let s0 = analytic_generalized_asymmetric(&c, &params, 0.0).unwrap();
        assert_abs_diff_eq!(s0.z, init.z(), epsilon = 1e-12);
        assert_abs_diff_eq!(s0.theta, init.theta, epsilon = 1e-12);
        assert_abs_diff_eq!(s0.a, init.a, epsilon = 1e-10);
        // δB recovered from an initial state is zero.
        assert_abs_diff_eq!(c.delta_b, 0.0, epsilon = 1e-9);
    }

    #[test]
    fn generalized_symmetric_matches_integration_exactly() {
        let params = TwoModeParams::direct(1.0, 0.0);
        let init = state(60.0, 0.25, 0.5, 0.3);
        let c = GeneralizedSolutionConstants::from_init(&init, &params).unwrap();
        let t = grid(10.0 * params.period(), 350);
        let traj = integrate_generalized(&params, &init, &t).unwrap();
        for (i, &ti) in t.iter().enumerate() {
            let exact = analytic_generalized_symmetric(&c, params.delta_e, ti).unwrap();
            assert!(
                (traj.samples[i].1.z() - exact.z()).abs() < 1e-8,
                "Z at t={ti}"
            );
            assert!((traj.samples[i].1.a - exact.a).abs() < 1e-7 * 60.0, "A at t={ti}");
        }
        // Fragmentation constant of the closed form matches the state.
        assert_abs_diff_eq!(c.fragmentation(), init.f(), epsilon = 1e-12);
    }

    #[test]
    fn generalized_asymmetric_converges_at_first_order() {
        let err = |v: f64| -> f64 {
            let params = TwoModeParams::direct(1.0, v);
            let init = state(40.0, 0.25, 0.5, 0.5);
            let c = GeneralizedSolutionConstants::from_init(&init, &params).unwrap();
            let t = grid(3.0 * params.period(), 150);
            let traj = integrate_liouville(&params, &init, &t).unwrap();
            let mut worst = 0.0f64;
            for (i, &ti) in t.iter().enumerate() {
                let approx_state = analytic_generalized_asymmetric(&c, &params, ti).unwrap();
                worst = worst.max((traj.samples[i].1.z() - approx_state.z).abs());
            }
            worst
        };
        let ratio = err(0.08) / err(0.04);
        assert!(
            (3.4..=4.6).contains(&ratio),
            "first-order convergence ratio {ratio}"
        );
    }

    #[test]
    fn polar_guard_delegates_steps_near_the_seam() {
        // θ₀ close to π/2 forces |cos θ| below the guard at the start.
        let params = TwoModeParams::direct(1.0, 0.0);
        let init = state(60.0, 0.1, 0.4, std::f64::consts::FRAC_PI_2 - 0.01);
        let t = grid(2.0 * params.period(), 100);
        let gen = integrate_generalized(&params, &init, &t).unwrap();
        assert!(gen.info.polar_fallback_steps > 0);
        let li = integrate_liouville(&params, &init, &t).unwrap();
        for i in 0..t.len() {
            assert!(
                (gen.samples[i].1.z() - li.samples[i].1.z()).abs() < 1e-8,
                "hybrid vs bloch at {}",
                t[i]
            );
        }
    }

    #[test]
    fn pure_state_choice_embeds_the_standard_solution() {
        let v = 0.05;
        let params = TwoModeParams::direct(1.0, v);
        let (z0, theta0) = (0.3, 0.8);
        let sc = StandardSolutionConstants::from_init(&params, z0, theta0).unwrap();
        let n = 30.0;
        let gc = GeneralizedSolutionConstants::pure_state_choice(&sc, n).unwrap();
        let t = grid(4.0 * params.period(), 160);
        for &ti in &t {
            let exact = analytic_standard(&sc, ti).unwrap();
            let emb = analytic_generalized_asymmetric(&gc, &params, ti).unwrap();
            // Both are first-order accurate around the same orbit: they must
            // agree to O(v²).
            assert!(
                (exact.z - emb.z).abs() < 10.0 * v * v,
                "embedding drifts at t={ti}: {} vs {}",
                exact.z,
                emb.z
            );
        }
    }

    #[test]
    fn turning_point_is_reported() {
        let params = TwoModeParams::direct(1.0, 0.0);
        assert!(matches!(
            f_form_rhs(&params, 0.5, 0.5, 0.3),
            Err(DynamicsError::TurningPoint { .. })
        ));
        let (dz, _) = f_form_rhs(&params, 0.5, 0.0, std::f64::consts::FRAC_PI_2).unwrap();
        // Ż = 2K f sin θ = −ΔE·f at this point.
        assert_abs_diff_eq!(dz, -0.5, epsilon = 1e-14);
    }

    #[test]
    fn time_grid_validation() {
        let params = TwoModeParams::direct(1.0, 0.0);
        let init = state(10.0, 0.1, 0.5, 0.0);
        assert!(matches!(
            integrate_liouville(&params, &init, &[]),
            Err(DynamicsError::InvalidTimeGrid { .. })
        ));
        assert!(matches!(
            integrate_liouville(&params, &init, &[0.0, 2.0, 1.0]),
            Err(DynamicsError::InvalidTimeGrid { .. })
        ));
        assert!(matches!(
            integrate_liouville(&params, &init, &[-1.0, 2.0]),
            Err(DynamicsError::InvalidTimeGrid { .. })
        ));
    }
}
