//! Effective one-body density matrices for two-mode bosons.
//!
//! A system of `N` bosons restricted to two single-particle modes carries all
//! of its one-body information in a 2×2 Hermitian matrix with trace `N`. Two
//! bases matter here:
//!
//! * the **energy-mode basis** `(ψ₀, ψ₁)` of the (possibly tilted) trap —
//!   [`EffectiveDensityMatrix01`];
//! * the **left/right basis** `(ψ_L, ψ_R)` localised in the wells —
//!   [`EffectiveDensityMatrixLR`], stored as populations `N_L`, `N_R` and the
//!   polar off-diagonal `A·e^{iθ}` (our convention: the `(R,L)` entry carries
//!   `+iθ`, so `ρ_LR = [[N_L, A e^{-iθ}], [A e^{iθ}, N_R]]`).
//!
//! The two are conjugate under the one-parameter orthogonal
//! [`BasisTransform`] built from the trap's mixing angle. The key scalar is
//! the coherence measure `f = √(Z² + (2A/N)²)` with `Z = (N_L − N_R)/N`:
//! the matrix eigenvalues are `N(1 ± f)/2`, so `f = 1` is a pure
//! (fully condensed) one-body state, `f < 1` is fragmented, and `f > 1` is
//! unphysical (the matrix stops being positive semidefinite).

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Scalar;

/// Relative tolerance for trace and positivity checks on construction.
const CHECK_TOL: f64 = 1e-9;

/// Validation and analysis failures for effective density matrices.
#[derive(Debug, Error)]
pub enum DensityError {
    /// Diagonal does not sum to the declared particle number.
    #[error("trace {trace:e} differs from particle number {n:e} by more than {tol:e}")]
    TraceMismatch { trace: f64, n: f64, tol: f64 },
    /// A mode population is negative beyond rounding tolerance.
    #[error("negative occupation {value:e} (tolerance -{tol:e})")]
    NegativeOccupation { value: f64, tol: f64 },
    /// Determinant is negative beyond tolerance: the matrix is not a state.
    #[error("matrix is not positive semidefinite: det = {det:e} < -{tol:e}")]
    NotPositiveSemidefinite { det: f64, tol: f64 },
    /// Coherence measure exceeds 1: more coherence than the populations allow.
    #[error("coherence measure f = {f} exceeds 1 beyond tolerance; state is unphysical")]
    ExcessCoherence { f: f64 },
    /// Both natural occupations coincide; the natural orbitals are arbitrary.
    #[error("f = {f:e} < {tol:e}: natural orbitals are degenerate and not defined")]
    DegenerateState { f: f64, tol: f64 },
    /// A many-body input matrix does not have unit trace.
    #[error("many-body matrix trace {trace:e} is not 1 within 1e-9")]
    NotNormalized { trace: f64 },
    /// A many-body input buffer has the wrong dimensions.
    #[error("many-body matrix for {n} particles needs ({n}+1)^2 entries, got {len}")]
    BadShape { n: usize, len: usize },
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle<R: Scalar>(theta: R) -> R {
    if !theta.is_finite() {
        return theta;
    }
    let two_pi = R::PI() + R::PI();
    let mut t = theta % two_pi;
    if t > R::PI() {
        t -= two_pi;
    } else if t <= -R::PI() {
        t += two_pi;
    }
    // The boundary itself belongs to +π.
    if t == -R::PI() {
        t = R::PI();
    }
    t
}

/// Effective density matrix in the energy-mode basis `(ψ₀, ψ₁)`:
/// `[[a00, a01], [conj(a01), a11]]`, trace `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveDensityMatrix01<R> {
    /// Occupation of the lower mode `ψ₀`.
    pub a00: R,
    /// Occupation of the upper mode `ψ₁`.
    pub a11: R,
    /// Upper off-diagonal entry `⟨ψ₀|ρ|ψ₁⟩`.
    pub a01: Complex<R>,
    /// Particle number `N` (the trace).
    #[serde(rename = "N")]
    pub n: R,
}

impl<R: Scalar> EffectiveDensityMatrix01<R> {
    /// Validating constructor. Tolerance on the trace is `1e-9·N`, on the
    /// occupations `-1e-9·N`, and on the determinant `-1e-9·N²`.
    pub fn new(a00: R, a11: R, a01: Complex<R>, n: R) -> Result<Self, DensityError> {
        let tol = R::lit(CHECK_TOL) * n;
        if n <= R::zero() || !n.is_finite() {
            return Err(DensityError::TraceMismatch {
                trace: (a00 + a11).to_f64().unwrap_or(f64::NAN),
                n: n.to_f64().unwrap_or(f64::NAN),
                tol: 0.0,
            });
        }
        if (a00 + a11 - n).abs() > tol {
            return Err(DensityError::TraceMismatch {
                trace: (a00 + a11).to_f64().unwrap_or(f64::NAN),
                n: n.to_f64().unwrap_or(f64::NAN),
                tol: tol.to_f64().unwrap_or(f64::NAN),
            });
        }
        for occ in [a00, a11] {
            if occ < -tol {
                return Err(DensityError::NegativeOccupation {
                    value: occ.to_f64().unwrap_or(f64::NAN),
                    tol: tol.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let det = a00 * a11 - a01.norm_sqr();
        if det < -tol * n {
            return Err(DensityError::NotPositiveSemidefinite {
                det: det.to_f64().unwrap_or(f64::NAN),
                tol: (tol * n).to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { a00, a11, a01, n })
    }

    /// Trace (should equal `n` within tolerance).
    pub fn trace(&self) -> R {
        self.a00 + self.a11
    }

    /// Determinant `a00·a11 − |a01|²`.
    pub fn det(&self) -> R {
        self.a00 * self.a11 - self.a01.norm_sqr()
    }

    /// Basis-independent coherence measure `f = √(1 − 4·det/N²) ∈ [0, 1]`
    /// (clamped against rounding).
    pub fn f(&self) -> R {
        let arg = R::one() - R::lit(4.0) * self.det() / (self.n * self.n);
        arg.max(R::zero()).sqrt().min(R::one())
    }
}

/// Effective density matrix in the left/right basis, in polar form:
/// `ρ_LR = [[N_L, A e^{-iθ}], [A e^{iθ}, N_R]]` with `A ≥ 0`, `θ ∈ (-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveDensityMatrixLR<R> {
    /// Left-well population.
    pub n_l: R,
    /// Right-well population.
    pub n_r: R,
    /// Off-diagonal magnitude.
    pub a: R,
    /// Off-diagonal phase of the `(R, L)` entry, wrapped to `(-π, π]`.
    pub theta: R,
}

impl<R: Scalar> EffectiveDensityMatrixLR<R> {
    /// Validating constructor: normalises `θ` into `(-π, π]`, forces `θ = 0`
    /// when `A = 0`, and checks occupations, `A ≥ 0`, and `f ≤ 1 + 1e-9`
    /// (equivalently the smaller eigenvalue is `≥ -1e-9·N/2`).
    pub fn new(n_l: R, n_r: R, a: R, theta: R) -> Result<Self, DensityError> {
        let n = n_l + n_r;
        let tol = R::lit(CHECK_TOL) * n;
        if n <= R::zero() || !n.is_finite() {
            return Err(DensityError::TraceMismatch {
                trace: n.to_f64().unwrap_or(f64::NAN),
                n: n.to_f64().unwrap_or(f64::NAN),
                tol: 0.0,
            });
        }
        for occ in [n_l, n_r] {
            if occ < -tol {
                return Err(DensityError::NegativeOccupation {
                    value: occ.to_f64().unwrap_or(f64::NAN),
                    tol: tol.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        if a < -tol {
            return Err(DensityError::NegativeOccupation {
                value: a.to_f64().unwrap_or(f64::NAN),
                tol: tol.to_f64().unwrap_or(f64::NAN),
            });
        }
        let a = a.max(R::zero());
        let state = Self {
            n_l,
            n_r,
            a,
            theta: if a == R::zero() {
                R::zero()
            } else {
                wrap_angle(theta)
            },
        };
        let f = state.f();
        if f > R::one() + R::lit(CHECK_TOL) {
            return Err(DensityError::ExcessCoherence {
                f: f.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(state)
    }

    /// Total particle number `N = N_L + N_R`.
    pub fn n(&self) -> R {
        self.n_l + self.n_r
    }

    /// Population imbalance `Z = (N_L − N_R)/N ∈ [-1, 1]`.
    pub fn z(&self) -> R {
        (self.n_l - self.n_r) / self.n()
    }

    /// Coherence measure `f = √(Z² + (2A/N)²)`; the matrix eigenvalues are
    /// `N(1 ± f)/2`.
    pub fn f(&self) -> R {
        let n = self.n();
        self.z().hypot(R::lit(2.0) * self.a / n)
    }

    /// The matrix itself: `[[N_L, A e^{-iθ}], [A e^{iθ}, N_R]]`.
    pub fn matrix(&self) -> [[Complex<R>; 2]; 2] {
        let phase = Complex::new(self.theta.cos(), self.theta.sin());
        let off = phase * self.a;
        [
            [Complex::new(self.n_l, R::zero()), off.conj()],
            [off, Complex::new(self.n_r, R::zero())],
        ]
    }
}

/// Serialized shape: plain JSON object with the conventional field names.
#[derive(Serialize, Deserialize)]
struct LrJson<R> {
    #[serde(rename = "nL")]
    n_l: R,
    #[serde(rename = "nR")]
    n_r: R,
    #[serde(rename = "A")]
    a: R,
    theta: R,
    #[serde(rename = "N")]
    n: R,
}

impl<R: Scalar + Serialize> Serialize for EffectiveDensityMatrixLR<R> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        LrJson {
            n_l: self.n_l,
            n_r: self.n_r,
            a: self.a,
            theta: self.theta,
            n: self.n(),
        }
        .serialize(serializer)
    }
}

impl<'de, R: Scalar + Deserialize<'de>> Deserialize<'de> for EffectiveDensityMatrixLR<R> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = LrJson::<R>::deserialize(deserializer)?;
        let state = Self::new(raw.n_l, raw.n_r, raw.a, raw.theta)
            .map_err(serde::de::Error::custom)?;
        let tol = R::lit(CHECK_TOL) * raw.n;
        if (state.n() - raw.n).abs() > tol {
            return Err(serde::de::Error::custom(format!(
                "redundant N field {} disagrees with nL + nR = {}",
                raw.n,
                state.n()
            )));
        }
        Ok(state)
    }
}

/// Orthogonal change of basis between the energy modes and the left/right
/// states, parameterised by the mixing angle `ξ`:
/// `T = [[cos ξ, sin ξ], [sin ξ, -cos ξ]]` (its own inverse).
///
/// `ξ = π/4` is the symmetric trap; a tilt pushes `ξ` toward `π/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisTransform<R> {
    /// Mixing angle in radians.
    pub xi: R,
}

impl<R: Scalar> BasisTransform<R> {
    /// Builds the transform from a mixing angle.
    pub fn new(xi: R) -> Self {
        Self { xi }
    }

    /// The transform matrix `[[c, s], [s, -c]]`.
    pub fn matrix(&self) -> [[R; 2]; 2] {
        let (s, c) = self.xi.sin_cos();
        [[c, s], [s, -c]]
    }
}

/// Conjugates a Hermitian 2×2 `[[x00, conj(x10)], [x10, x11]]` by
/// `T = [[c, s], [s, -c]]` (involutive), returning `(y00, y11, y10)`.
fn conjugate_by_transform<R: Scalar>(
    x00: R,
    x11: R,
    x10: Complex<R>,
    c: R,
    s: R,
) -> (R, R, Complex<R>) {
    let cs = c * s;
    let two_re = x10.re + x10.re;
    let y00 = c * c * x00 + s * s * x11 + cs * two_re;
    let y11 = s * s * x00 + c * c * x11 - cs * two_re;
    let y10 = x10.conj().scale(s * s) - x10.scale(c * c)
        + Complex::new(cs * (x00 - x11), R::zero());
    (y00, y11, y10)
}

/// Transforms a mode-basis matrix into the left/right basis: `ρ_LR = T ρ T`.
pub fn to_left_right<R: Scalar>(
    rho: &EffectiveDensityMatrix01<R>,
    transform: &BasisTransform<R>,
) -> Result<EffectiveDensityMatrixLR<R>, DensityError> {
    let (s, c) = transform.xi.sin_cos();
    let x10 = rho.a01.conj(); // lower entry of the mode-basis matrix
    let (n_l, n_r, off) = conjugate_by_transform(rho.a00, rho.a11, x10, c, s);
    EffectiveDensityMatrixLR::new(n_l, n_r, off.norm(), off.arg())
}

/// Transforms a left/right matrix back into the mode basis: `ρ = T ρ_LR T`
/// (the transform is involutive, so this is the exact inverse of
/// [`to_left_right`]).
pub fn to_modes<R: Scalar>(
    rho: &EffectiveDensityMatrixLR<R>,
    transform: &BasisTransform<R>,
) -> Result<EffectiveDensityMatrix01<R>, DensityError> {
    let (s, c) = transform.xi.sin_cos();
    let phase = Complex::new(rho.theta.cos(), rho.theta.sin());
    let x10 = phase.scale(rho.a); // lower entry A e^{iθ}
    let (a00, a11, y10) = conjugate_by_transform(rho.n_l, rho.n_r, x10, c, s);
    EffectiveDensityMatrix01::new(a00, a11, y10.conj(), rho.n())
}

/// Coherence measure `f` of a left/right matrix (free function form).
pub fn fragmentation_f<R: Scalar>(rho: &EffectiveDensityMatrixLR<R>) -> R {
    rho.f()
}

/// Natural orbitals of a left/right matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<R> {
    /// Natural occupations `[N(1+f)/2, N(1-f)/2]`, descending.
    pub occupations: [R; 2],
    /// Orthonormal natural orbitals as `(L, R)` component pairs;
    /// `orbitals[i]` belongs to `occupations[i]`.
    pub orbitals: [[Complex<R>; 2]; 2],
}

/// Diagonalises a left/right matrix into natural orbitals, choosing the
/// algebraic branch that stays numerically stable for either sign of the
/// imbalance (no catastrophic cancellation as `A → 0`).
///
/// Fails with [`DensityError::DegenerateState`] when `f < 1e-12`: both
/// occupations coincide and the orbitals are arbitrary.
pub fn eigen_decompose<R: Scalar>(
    rho: &EffectiveDensityMatrixLR<R>,
) -> Result<EigenDecomposition<R>, DensityError> {
    let n = rho.n();
    let f = rho.f();
    let tol = R::lit(1e-12);
    if f < tol {
        return Err(DensityError::DegenerateState {
            f: f.to_f64().unwrap_or(f64::NAN),
            tol: 1e-12,
        });
    }
    let half = R::lit(0.5);
    let occupations = [n * (R::one() + f) * half, n * (R::one() - f) * half];
    let z = rho.z();
    let phase = Complex::new(rho.theta.cos(), rho.theta.sin());

    // With a (near-)diagonal matrix the orbitals are the basis states.
    if rho.a < n * R::lit(1e-150) {
        let one = Complex::new(R::one(), R::zero());
        let zero = Complex::new(R::zero(), R::zero());
        let orbitals = if z >= R::zero() {
            [[one, zero], [zero, one]]
        } else {
            [[zero, one], [one, zero]]
        };
        return Ok(EigenDecomposition {
            occupations,
            orbitals,
        });
    }

    let two_a_over_n = R::lit(2.0) * rho.a / n;
    // Ratios r = second/first component of the (1, r) eigenvector form. Each
    // sign of Z gets the algebraically equivalent expression that avoids the
    // cancellation f − |Z| = (2A/N)²/(f + |Z|).
    let (r1, r2) = if z >= R::zero() {
        (
            phase.scale(two_a_over_n / (f + z)),
            -phase.scale((z + f) / two_a_over_n),
        )
    } else {
        (
            phase.scale((f - z) / two_a_over_n),
            -phase.scale(two_a_over_n / (f - z)),
        )
    };
    let normalized = |r: Complex<R>| {
        let norm = R::one().hypot(r.norm());
        [
            Complex::new(R::one() / norm, R::zero()),
            r.scale(R::one() / norm),
        ]
    };
    Ok(EigenDecomposition {
        occupations,
        orbitals: [normalized(r1), normalized(r2)],
    })
}

/// Reduces a normalised many-body matrix in the symmetric Fock basis
/// `|N₁ = k⟩, k = 0..N` (row-major `(N+1)×(N+1)`, unit trace) to the
/// effective one-body matrix in the mode basis, scaled to trace `N`:
///
/// * `a11 = Σ_k k·p_kk` (upper-mode occupation),
/// * `a00 = N − a11`,
/// * lower entry `Σ_k √((k+1)(N−k))·p_{k+1,k}`.
pub fn alphas_from_manybody<R: Scalar>(
    p: &[Complex<R>],
    n_particles: usize,
) -> Result<EffectiveDensityMatrix01<R>, DensityError> {
    let dim = n_particles + 1;
    if p.len() != dim * dim {
        return Err(DensityError::BadShape {
            n: n_particles,
            len: p.len(),
        });
    }
    let mut trace = R::zero();
    for k in 0..dim {
        trace += p[k * dim + k].re;
    }
    if (trace - R::one()).abs() > R::lit(CHECK_TOL) {
        return Err(DensityError::NotNormalized {
            trace: trace.to_f64().unwrap_or(f64::NAN),
        });
    }
    let n = R::from_count(n_particles);
    let mut a11 = R::zero();
    for k in 1..dim {
        a11 += R::from_count(k) * p[k * dim + k].re;
    }
    let mut lower = Complex::new(R::zero(), R::zero());
    for k in 0..n_particles {
        let weight = (R::from_count(k + 1) * R::from_count(n_particles - k)).sqrt();
        lower += p[(k + 1) * dim + k].scale(weight);
    }
    EffectiveDensityMatrix01::new(n - a11, a11, lower.conj(), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    type C = Complex<f64>;

    fn mat_mul(a: &[[C; 2]; 2], b: &[[C; 2]; 2]) -> [[C; 2]; 2] {
        let mut out = [[C::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }

    #[test]
    fn angle_wrapping_hits_the_half_open_interval() {
        assert_abs_diff_eq!(wrap_angle(3.0 * std::f64::consts::PI / 2.0),
            -std::f64::consts::PI / 2.0, epsilon = 1e-15);
        assert_eq!(wrap_angle(std::f64::consts::PI), std::f64::consts::PI);
        assert_eq!(wrap_angle(-std::f64::consts::PI), std::f64::consts::PI);
        assert_abs_diff_eq!(wrap_angle(-0.25), -0.25, epsilon = 1e-15);
    }

    #[test]
    fn trace_mismatch_is_rejected() {
        let err = EffectiveDensityMatrix01::new(60.0, 41.0, C::new(0.0, 0.0), 100.0);
        assert!(matches!(err, Err(DensityError::TraceMismatch { .. })));
    }

    #[test]
    fn excess_coherence_is_rejected() {
        // Z = 0.8 and 2A/N = 0.8 gives f ≈ 1.13 > 1.
        let err = EffectiveDensityMatrixLR::new(90.0, 10.0, 40.0, 0.0);
        assert!(matches!(err, Err(DensityError::ExcessCoherence { .. })));
    }

    #[test]
    fn transform_matches_explicit_matrix_conjugation() {
        let rho = EffectiveDensityMatrix01::new(70.0, 30.0, C::new(10.0, -7.0), 100.0).unwrap();
        let t = BasisTransform::new(0.5f64 * f64::atan2(1.0, -0.3));
        let lr = to_left_right(&rho, &t).unwrap();

        let (s, c) = t.xi.sin_cos();
        let tm = [
            [C::new(c, 0.0), C::new(s, 0.0)],
            [C::new(s, 0.0), C::new(-c, 0.0)],
        ];
        let m = [
            [C::new(rho.a00, 0.0), rho.a01],
            [rho.a01.conj(), C::new(rho.a11, 0.0)],
        ];
        let explicit = mat_mul(&tm, &mat_mul(&m, &tm));
        assert_abs_diff_eq!(lr.n_l, explicit[0][0].re, epsilon = 1e-12);
        assert_abs_diff_eq!(lr.n_r, explicit[1][1].re, epsilon = 1e-12);
        let off = C::new(lr.theta.cos(), lr.theta.sin()) * lr.a;
        assert_abs_diff_eq!(off.re, explicit[1][0].re, epsilon = 1e-12);
        assert_abs_diff_eq!(off.im, explicit[1][0].im, epsilon = 1e-12);
    }

    #[test]
    fn transform_is_involutive() {
        let rho = EffectiveDensityMatrix01::new(55.0, 45.0, C::new(12.0, 9.0), 100.0).unwrap();
        let t = BasisTransform::new(std::f64::consts::FRAC_PI_4 + 0.2);
        let lr = to_left_right(&rho, &t).unwrap();
        let back = to_modes(&lr, &t).unwrap();
        assert_abs_diff_eq!(back.a00, rho.a00, epsilon = 1e-12 * rho.n);
        assert_abs_diff_eq!(back.a11, rho.a11, epsilon = 1e-12 * rho.n);
        assert_abs_diff_eq!(back.a01.re, rho.a01.re, epsilon = 1e-12 * rho.n);
        assert_abs_diff_eq!(back.a01.im, rho.a01.im, epsilon = 1e-12 * rho.n);
    }

    #[test]
    fn pure_state_has_unit_f() {
        // One-body projector scaled by N: NL·NR = A² exactly.
        let lr = EffectiveDensityMatrixLR::new(64.0, 36.0, 48.0, 1.1).unwrap();
        assert_abs_diff_eq!(lr.f(), 1.0, epsilon = 1e-14);
        let eig = eigen_decompose(&lr).unwrap();
        assert_abs_diff_eq!(eig.occupations[0], 100.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig.occupations[1], 0.0, epsilon = 1e-12);
    }

    fn check_eigenpairs(lr: &EffectiveDensityMatrixLR<f64>) {
        let eig = eigen_decompose(lr).unwrap();
        let m = lr.matrix();
        for (occ, orb) in eig.occupations.iter().zip(eig.orbitals.iter()) {
            for row in 0..2 {
                let mv = m[row][0] * orb[0] + m[row][1] * orb[1];
                let rv = orb[row] * *occ;
                assert!(
                    (mv - rv).norm() < 1e-12 * lr.n(),
                    "eigen residual {} for occupation {occ}",
                    (mv - rv).norm()
                );
            }
        }
        // Orthonormality.
        let dot = eig.orbitals[0][0].conj() * eig.orbitals[1][0]
            + eig.orbitals[0][1].conj() * eig.orbitals[1][1];
        assert!(dot.norm() < 1e-13);
        for orb in &eig.orbitals {
            let norm = orb[0].norm_sqr() + orb[1].norm_sqr();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn eigen_branches_are_stable_for_tiny_coherence() {
        // A ≪ |Z|, both signs of Z: the naive f − |Z| expression would lose
        // all precision here.
        let up = EffectiveDensityMatrixLR::new(75.0, 25.0, 1e-8, 0.7).unwrap();
        let down = EffectiveDensityMatrixLR::new(25.0, 75.0, 1e-8, -2.9).unwrap();
        check_eigenpairs(&up);
        check_eigenpairs(&down);
        // And at the diagonal limit the orbitals are the basis states.
        let diag = EffectiveDensityMatrixLR::new(75.0, 25.0, 0.0, 0.0).unwrap();
        let eig = eigen_decompose(&diag).unwrap();
        assert_abs_diff_eq!(eig.orbitals[0][0].re, 1.0, epsilon = 0.0);
        assert_abs_diff_eq!(eig.occupations[0], 75.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_matrix_is_reported() {
        let lr = EffectiveDensityMatrixLR::new(50.0, 50.0, 0.0, 0.0).unwrap();
        assert!(matches!(
            eigen_decompose(&lr),
            Err(DensityError::DegenerateState { .. })
        ));
    }

    #[test]
    fn manybody_reduction_of_a_product_state() {
        // (c0 ψ0 + c1 ψ1)^N for N = 3: p = b b† with binomial amplitudes.
        let n = 3usize;
        let c0 = C::new(0.8, 0.0);
        let c1 = C::new(0.36, 0.48); // |c0|² + |c1|² = 1
        let binom = [1.0f64, 3.0, 3.0, 1.0];
        let b: Vec<C> = (0..=n)
            .map(|k| binom[k].sqrt() * c0.powu((n - k) as u32) * c1.powu(k as u32))
            .collect();
        let dim = n + 1;
        let mut p = vec![C::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                p[i * dim + j] = b[i] * b[j].conj();
            }
        }
        let rho = alphas_from_manybody(&p, n).unwrap();
        let nf = n as f64;
        assert_abs_diff_eq!(rho.a11, nf * c1.norm_sqr(), epsilon = 1e-12);
        assert_abs_diff_eq!(rho.a00, nf * c0.norm_sqr(), epsilon = 1e-12);
        let expect = (c0 * c1.conj()).scale(nf); // upper entry
        assert_abs_diff_eq!(rho.a01.re, expect.re, epsilon = 1e-12);
        assert_abs_diff_eq!(rho.a01.im, expect.im, epsilon = 1e-12);
        // A product state is pure: f = 1 exactly.
        assert_abs_diff_eq!(rho.f(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn manybody_reduction_rejects_unnormalised_input() {
        let p = vec![C::new(0.7, 0.0); 4]; // trace 1.4 for N = 1
        assert!(matches!(
            alphas_from_manybody(&p, 1),
            Err(DensityError::NotNormalized { .. })
        ));
    }

    #[test]
    fn lr_json_round_trips_field_names_and_values() {
        let lr = EffectiveDensityMatrixLR::new(60.25, 39.75, 12.5, -1.25).unwrap();
        let text = serde_json::to_string(&lr).unwrap();
        assert!(text.contains("\"nL\""), "{text}");
        assert!(text.contains("\"nR\""), "{text}");
        assert!(text.contains("\"A\""), "{text}");
        assert!(text.contains("\"theta\""), "{text}");
        assert!(text.contains("\"N\""), "{text}");
        let back: EffectiveDensityMatrixLR<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, lr, "shortest-roundtrip floats must come back exact");
    }

    proptest! {
        // States drawn uniformly from the physical ball f ≤ 1.
        #[test]
        fn random_states_round_trip_and_diagonalise(
            z in -1.0f64..1.0,
            y in 0.0f64..1.0,
            theta in (-0.999 * std::f64::consts::PI)..(0.999 * std::f64::consts::PI),
            xi in 0.8f64..1.5,
        ) {
            prop_assume!(z * z + y * y <= 1.0);
            let n = 100.0;
            let lr = EffectiveDensityMatrixLR::new(
                n * (1.0 + z) / 2.0,
                n * (1.0 - z) / 2.0,
                n * y / 2.0,
                theta,
            ).unwrap();
            prop_assert!(lr.f() <= 1.0 + 1e-9);

            // Basis change round trip.
            let t = BasisTransform::new(xi);
            let modes = to_modes(&lr, &t).unwrap();
            let back = to_left_right(&modes, &t).unwrap();
            prop_assert!((back.n_l - lr.n_l).abs() < 1e-10 * n);
            prop_assert!((back.n_r - lr.n_r).abs() < 1e-10 * n);
            prop_assert!((back.a - lr.a).abs() < 1e-10 * n);
            // f is basis independent.
            prop_assert!((modes.f() - lr.f()).abs() < 1e-10);

            // JSON round trip is exact for f64.
            let text = serde_json::to_string(&lr).unwrap();
            let parsed: EffectiveDensityMatrixLR<f64> = serde_json::from_str(&text).unwrap();
            prop_assert!((parsed.n_l - lr.n_l).abs() <= 1e-15 * n);
            prop_assert!((parsed.theta - lr.theta).abs() <= 1e-15);

            // Spectral decomposition whenever it is well defined.
            if lr.f() > 1e-9 {
                let eig = eigen_decompose(&lr).unwrap();
                prop_assert!((eig.occupations[0] + eig.occupations[1] - n).abs() < 1e-10);
            }
        }
    }
}
