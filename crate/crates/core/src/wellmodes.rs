//! Single-particle modes of a one-dimensional double-well trap (`ħ = 1`).
//!
//! A [`PotentialSpec`] holds a uniformly sampled potential on a symmetric
//! interval with hard (Dirichlet) walls. [`PotentialSpec::solve_two_modes`]
//! returns the lowest two modes by second-order finite differences: for a
//! reflection-symmetric potential the problem splits into even and odd
//! sectors on the half grid (one lowest eigenpair each); otherwise the full
//! tridiagonal problem is diagonalised directly.
//!
//! From the mode pair the left/right well states are
//! `φ_{L,R} = (φ₀ ± φ₁)/√2`, with the side leakage
//! `ε = 1/2 − ∫_{x<0} φ₀ φ₁ dx` measuring how much of the "left" state
//! lives in the right well. A potential-energy step across the centre acts
//! as the tilt; [`perturbed_modes`] diagonalises it exactly within the
//! two-mode subspace, and [`two_mode_params`] packages the resulting
//! effective parameters (on-site energies, tunnelling element, mixing angle)
//! for the dynamics layer.

use serde::Serialize;
use thiserror::Error;

use crate::linalg::SymTridiag;
use crate::Scalar;

/// Fraction of the mean mode energy above which the tilt step invalidates
/// the two-mode truncation.
pub const STEP_LIMIT_RATIO: f64 = 0.1;
/// Tilt fraction above which results should be treated with caution.
pub const STEP_CAUTION_RATIO: f64 = 0.01;
/// Side-leakage bound: beyond this the lowest mode pair no longer describes
/// one state per well.
pub const DOUBLE_WELL_EPSILON_LIMIT: f64 = 0.25;

/// Failures of potential construction and mode solving.
#[derive(Debug, Error)]
pub enum WellModesError {
    /// Operation requires a reflection-symmetric potential.
    #[error("potential is not symmetric under x → −x: {detail}")]
    NonSymmetricPotential { detail: String },
    /// Discretisation too coarse for trustworthy modes.
    #[error("grid too coarse: {detail}")]
    GridTooCoarse { detail: String },
    /// The lowest mode pair does not describe one state per well.
    #[error("not a double well: side leakage ε = {epsilon:e} is at or above 0.25")]
    NotADoubleWell { epsilon: f64 },
    /// Tilt step outside the two-mode truncation's validity.
    #[error(
        "tilt step too large: |V₀|/Ē = {ratio:e} ≥ 0.1 invalidates the two-mode truncation"
    )]
    StepTooLarge { ratio: f64 },
    /// Malformed potential specification.
    #[error("invalid potential specification: {reason}")]
    InvalidSpec { reason: String },
}

/// A uniformly sampled 1-D potential on `[−L, L]` with Dirichlet walls.
#[derive(Debug, Clone)]
pub struct PotentialSpec<R> {
    x: Vec<R>,
    v: Vec<R>,
    mass: R,
    dx: R,
}

/// The lowest two modes of a trap.
#[derive(Debug, Clone)]
pub struct ModePair<R> {
    /// Grid the modes live on.
    pub x: Vec<R>,
    /// Grid spacing.
    pub dx: R,
    /// Particle mass.
    pub mass: R,
    /// Ground-mode energy.
    pub e0: R,
    /// First-excited-mode energy.
    pub e1: R,
    /// Ground mode, trapezoid-normalised, positive.
    pub phi0: Vec<R>,
    /// First excited mode, normalised, signed so that `∫_{x<0} φ₀φ₁ ≥ 0`.
    pub phi1: Vec<R>,
    /// Whether the generating potential was reflection-symmetric.
    pub symmetric: bool,
}

/// Left/right well states built from a symmetric mode pair.
#[derive(Debug, Clone)]
pub struct LeftRightModes<R> {
    /// `φ_L = (φ₀ + φ₁)/√2`, concentrated at `x < 0`.
    pub phi_l: Vec<R>,
    /// `φ_R = (φ₀ − φ₁)/√2`, concentrated at `x > 0`.
    pub phi_r: Vec<R>,
    /// Side leakage `ε = 1/2 − ∫_{x<0} φ₀φ₁ dx ∈ [0, 1/2]`.
    pub epsilon: R,
}

/// Exact two-mode diagonalisation of a tilted trap.
#[derive(Debug, Clone)]
pub struct PerturbedModes<R> {
    /// Lower tilted eigenenergy.
    pub e0: R,
    /// Upper tilted eigenenergy.
    pub e1: R,
    /// Lower tilted mode `ψ₀ = (φ₀ − ηφ₁)/√(1+η²)`.
    pub psi0: Vec<R>,
    /// Upper tilted mode `ψ₁ = (ηφ₀ + φ₁)/√(1+η²)`.
    pub psi1: Vec<R>,
    /// Mixing amplitude `η = v₀ᵉᶠᶠ/(ΔE + Ω)`.
    pub eta: R,
    /// Tilted splitting `Ω = √(ΔE² + (v₀ᵉᶠᶠ)²) = Ẽ₁ − Ẽ₀`.
    pub omega: R,
    /// Effective two-mode parameters of the same trap.
    pub params: TwoModeParams<R>,
    /// Set when `0.01 ≤ |V₀|/Ē < 0.1`: inside the validity window but close
    /// enough to its edge that quadratic corrections may be visible.
    pub step_caution: bool,
}

/// Effective parameters of the two-mode model: on-site energies, tunnelling
/// element, and the basis rotation between tilted eigenmodes and left/right
/// states.
#[derive(Debug, Clone, Serialize)]
pub struct TwoModeParams<R> {
    /// Left on-site energy.
    pub e_l: R,
    /// Right on-site energy.
    pub e_r: R,
    /// Tunnelling element `K = −ΔE/2 < 0`.
    pub k: R,
    /// Symmetric-trap mode splitting `ΔE = −2K > 0`.
    pub delta_e: R,
    /// Tilt `V₀ = E_L − E_R`.
    pub v0: R,
    /// Mixing angle of the eigenmode ↔ left/right transform,
    /// `ξ = ½·atan2(ΔE, −V₀) ∈ [π/4, π/2)` for `V₀ ≥ 0`.
    pub xi: R,
}

impl<R: Scalar> TwoModeParams<R> {
    /// Builds parameters directly from a splitting `ΔE > 0` and tilt `V₀`
    /// (the right on-site energy is taken as the zero of energy).
    pub fn direct(delta_e: R, v0: R) -> Self {
        assert!(
            delta_e > R::zero() && delta_e.is_finite() && v0.is_finite(),
            "two-mode parameters need a positive finite splitting"
        );
        Self {
            e_l: v0,
            e_r: R::zero(),
            k: -delta_e * R::lit(0.5),
            delta_e,
            v0,
            xi: mixing_angle(delta_e, v0),
        }
    }

    /// Oscillation rate `Ω = √(ΔE² + V₀²)` of every observable.
    pub fn omega(&self) -> R {
        self.delta_e.hypot(self.v0)
    }

    /// Oscillation period `2π/Ω`.
    pub fn period(&self) -> R {
        R::lit(2.0) * R::PI() / self.omega()
    }

    /// Tilt ratio `v = V₀/ΔE`.
    pub fn v_ratio(&self) -> R {
        self.v0 / self.delta_e
    }
}

/// Mixing angle `ξ = ½·atan2(ΔE, −V₀)` of the orthogonal transform
/// `T = [[cos ξ, sin ξ], [sin ξ, −cos ξ]]` taking tilted-eigenmode
/// coefficients to left/right coefficients. Conjugating `diag(Ẽ₀, Ẽ₁)` by
/// `T` reproduces the tilt `V₀` on the diagonal and `K = −ΔE/2` off it.
pub fn mixing_angle<R: Scalar>(delta_e: R, v0: R) -> R {
    delta_e.atan2(-v0) * R::lit(0.5)
}

impl<R: Scalar> PotentialSpec<R> {
    /// Wraps explicit samples. The grid must be uniform, symmetric about
    /// zero, with an odd number (at least five) of points so a centre node
    /// exists.
    pub fn from_samples(x: Vec<R>, v: Vec<R>, mass: R) -> Result<Self, WellModesError> {
        if x.len() != v.len() {
            return Err(WellModesError::InvalidSpec {
                reason: format!("{} grid points but {} potential samples", x.len(), v.len()),
            });
        }
        if x.len() < 5 || x.len() % 2 == 0 {
            return Err(WellModesError::InvalidSpec {
                reason: "need an odd number of grid points (≥ 5) so the centre is a node"
                    .into(),
            });
        }
        if !(mass > R::zero()) || !mass.is_finite() {
            return Err(WellModesError::InvalidSpec {
                reason: "mass must be positive and finite".into(),
            });
        }
        if v.iter().any(|vi| !vi.is_finite()) || x.iter().any(|xi| !xi.is_finite()) {
            return Err(WellModesError::InvalidSpec {
                reason: "grid and potential samples must be finite".into(),
            });
        }
        let n = x.len();
        let dx = (x[n - 1] - x[0]) / R::from_count(n - 1);
        if !(dx > R::zero()) {
            return Err(WellModesError::InvalidSpec {
                reason: "grid must be strictly increasing".into(),
            });
        }
        let tol = dx * R::lit(1e-9);
        for i in 1..n {
            if ((x[i] - x[i - 1]) - dx).abs() > tol {
                return Err(WellModesError::InvalidSpec {
                    reason: "grid must be uniform".into(),
                });
            }
        }
        if (x[0] + x[n - 1]).abs() > tol {
            return Err(WellModesError::InvalidSpec {
                reason: "grid must be symmetric about x = 0".into(),
            });
        }
        Ok(Self { x, v, mass, dx })
    }

    /// Square double well inside a hard box: `V = barrier_height` for
    /// `|x| < barrier_half_width`, zero elsewhere in `[−half_box, half_box]`.
    /// A node that lands exactly on a barrier edge takes the mean of the two
    /// sides — the sampling of a jump that keeps the eigenvalues second-order
    /// accurate in the grid spacing. `n ≡ 1 (mod 4)` so the half-resolution
    /// consistency check can run.
    pub fn square_double_well(
        n: usize,
        half_box: R,
        barrier_half_width: R,
        barrier_height: R,
        mass: R,
    ) -> Result<Self, WellModesError> {
        if n % 4 != 1 || n < 9 {
            return Err(WellModesError::InvalidSpec {
                reason: "point count must be ≡ 1 (mod 4) and at least 9".into(),
            });
        }
        if !(half_box > R::zero())
            || !(barrier_half_width > R::zero())
            || barrier_half_width >= half_box
            || barrier_height < R::zero()
        {
            return Err(WellModesError::InvalidSpec {
                reason: "need 0 < barrier_half_width < half_box and barrier_height ≥ 0"
                    .into(),
            });
        }
        let grid = symmetric_grid(n, half_box);
        let dx = R::lit(2.0) * half_box / R::from_count(n - 1);
        let edge_tol = dx * R::lit(1e-9);
        let v = grid
            .iter()
            .map(|&xi| {
                if (xi.abs() - barrier_half_width).abs() <= edge_tol {
                    barrier_height * R::lit(0.5)
                } else if xi.abs() < barrier_half_width {
                    barrier_height
                } else {
                    R::zero()
                }
            })
            .collect();
        Self::from_samples(grid, v, mass)
    }

    /// Harmonic trap of frequency `omega` with a Gaussian barrier of the
    /// given height and width at the centre:
    /// `V = ½mω²x² + h·exp(−x²/2σ²)`.
    pub fn gaussian_barrier_trap(
        n: usize,
        half_box: R,
        omega: R,
        barrier_height: R,
        barrier_sigma: R,
        mass: R,
    ) -> Result<Self, WellModesError> {
        if n % 4 != 1 || n < 9 {
            return Err(WellModesError::InvalidSpec {
                reason: "point count must be ≡ 1 (mod 4) and at least 9".into(),
            });
        }
        if !(half_box > R::zero())
            || !(omega > R::zero())
            || barrier_height < R::zero()
            || !(barrier_sigma > R::zero())
        {
            return Err(WellModesError::InvalidSpec {
                reason: "need positive half_box, omega and barrier_sigma, and \
                         barrier_height ≥ 0"
                    .into(),
            });
        }
        let grid = symmetric_grid(n, half_box);
        let half = R::lit(0.5);
        let v = grid
            .iter()
            .map(|&xi| {
                half * mass * omega * omega * xi * xi
                    + barrier_height * (-(xi * xi) / (R::lit(2.0) * barrier_sigma * barrier_sigma)).exp()
            })
            .collect();
        Self::from_samples(grid, v, mass)
    }

    /// Grid.
    pub fn x(&self) -> &[R] {
        &self.x
    }

    /// Potential samples.
    pub fn v(&self) -> &[R] {
        &self.v
    }

    /// Particle mass.
    pub fn mass(&self) -> R {
        self.mass
    }

    /// Grid spacing.
    pub fn dx(&self) -> R {
        self.dx
    }

    /// Whether the samples are reflection-symmetric.
    pub fn is_symmetric(&self) -> bool {
        let n = self.v.len();
        let scale = self
            .v
            .iter()
            .fold(R::zero(), |acc, &vi| acc.max(vi.abs()))
            .max(R::one());
        let tol = scale * R::lit(1e-12);
        (0..n / 2).all(|i| (self.v[i] - self.v[n - 1 - i]).abs() <= tol)
    }

    /// Every second sample: same interval at half resolution. Defined only
    /// when `n ≡ 1 (mod 4)`, which keeps the centre node.
    fn decimate(&self) -> Option<Self> {
        if self.x.len() % 4 != 1 {
            return None;
        }
        let x: Vec<R> = self.x.iter().step_by(2).copied().collect();
        let v: Vec<R> = self.v.iter().step_by(2).copied().collect();
        Some(Self {
            x,
            v,
            mass: self.mass,
            dx: self.dx * R::lit(2.0),
        })
    }

    /// Lowest two modes with grid-quality checks: the result must be
    /// resolution-consistent (splitting stable to 10⁻⁶ against a
    /// half-resolution solve, when decimation is possible) and the grid must
    /// carry at least eight points per local de Broglie wavelength at `E₁`.
    pub fn solve_two_modes(&self) -> Result<ModePair<R>, WellModesError> {
        let pair = self.solve_two_modes_unchecked()?;
        // de Broglie resolution at the upper mode energy.
        let vmin = self
            .v
            .iter()
            .fold(R::infinity(), |acc, &vi| acc.min(vi));
        let kinetic = pair.e1 - vmin;
        if kinetic > R::zero() {
            let lambda = R::lit(2.0) * R::PI() / (R::lit(2.0) * self.mass * kinetic).sqrt();
            if self.dx > lambda / R::lit(8.0) {
                return Err(WellModesError::GridTooCoarse {
                    detail: format!(
                        "spacing {:e} exceeds an eighth of the local de Broglie wavelength \
                         {:e} at the upper mode energy",
                        self.dx, lambda
                    ),
                });
            }
        }
        // Half-resolution consistency of the splitting.
        if let Some(half) = self.decimate() {
            if half.x.len() >= 9 {
                let coarse = half.solve_two_modes_unchecked()?;
                let fine_split = pair.e1 - pair.e0;
                let coarse_split = coarse.e1 - coarse.e0;
                let scale = fine_split.abs().max(R::lit(1e-13) * pair.e1.abs());
                let rel = (fine_split - coarse_split).abs() / scale;
                if rel > R::lit(1e-6) {
                    return Err(WellModesError::GridTooCoarse {
                        detail: format!(
                            "mode splitting changes by a relative {:e} (> 1e-6) between \
                             this grid and half resolution",
                            rel
                        ),
                    });
                }
            }
        }
        Ok(pair)
    }

    /// Lowest two modes without the grid-quality checks — for convergence
    /// studies that deliberately visit coarse grids.
    pub fn solve_two_modes_unchecked(&self) -> Result<ModePair<R>, WellModesError> {
        let n = self.x.len();
        let t = R::one() / (R::lit(2.0) * self.mass * self.dx * self.dx);
        let symmetric = self.is_symmetric();
        let (e0, mut phi0, e1, mut phi1) = if symmetric {
            self.solve_parity_split(t)?
        } else {
            self.solve_direct(t)?
        };
        // Trapezoid normalisation (endpoints vanish, so the plain sum is
        // already the trapezoid rule).
        for phi in [&mut phi0, &mut phi1] {
            let norm = (self.dx * phi.iter().fold(R::zero(), |s, &p| s + p * p)).sqrt();
            for p in phi.iter_mut() {
                *p /= norm;
            }
        }
        // Ground mode positive (it is nodeless).
        let mut idx_max = 0;
        for (i, p) in phi0.iter().enumerate() {
            if p.abs() > phi0[idx_max].abs() {
                idx_max = i;
            }
        }
        if phi0[idx_max] < R::zero() {
            for p in phi0.iter_mut() {
                *p = -*p;
            }
        }
        let mut pair = ModePair {
            x: self.x.clone(),
            dx: self.dx,
            mass: self.mass,
            e0,
            e1,
            phi0,
            phi1,
            symmetric,
        };
        // Excited mode signed so the left-side overlap is non-negative.
        if pair.side_overlap() < R::zero() {
            for p in pair.phi1.iter_mut() {
                *p = -*p;
            }
        }
        let _ = n;
        Ok(pair)
    }

    /// Even/odd sector solve for a symmetric potential. Returns
    /// `(E₀, φ₀, E₁, φ₁)` on the full grid.
    fn solve_parity_split(&self, t: R) -> Result<(R, Vec<R>, R, Vec<R>), WellModesError> {
        let n = self.x.len();
        let c = (n - 1) / 2;
        let two_t = R::lit(2.0) * t;
        // Even sector: unknowns at the centre and to its right (interior).
        // A √2 similarity at the centre row keeps the matrix symmetric; the
        // physical amplitude at the centre is √2 times the sector entry.
        let m_even = n - 1 - c;
        let mut diag_even = Vec::with_capacity(m_even);
        let mut off_even = Vec::with_capacity(m_even - 1);
        for j in 0..m_even {
            diag_even.push(two_t + self.v[c + j]);
            if j + 1 < m_even {
                off_even.push(if j == 0 { -t * R::lit(2.0).sqrt() } else { -t });
            }
        }
        let even = SymTridiag::new(diag_even, off_even);
        let e_even = even.lowest_eigenvalues(1)[0];
        let vec_even = even.eigenvector(e_even, &[]);
        // Odd sector: centre amplitude is zero; unknowns strictly right of it.
        let m_odd = n - 2 - c;
        let mut diag_odd = Vec::with_capacity(m_odd);
        let mut off_odd = Vec::with_capacity(m_odd - 1);
        for j in 0..m_odd {
            diag_odd.push(two_t + self.v[c + 1 + j]);
            if j + 1 < m_odd {
                off_odd.push(-t);
            }
        }
        let odd = SymTridiag::new(diag_odd, off_odd);
        let e_odd = odd.lowest_eigenvalues(1)[0];
        let vec_odd = odd.eigenvector(e_odd, &[]);

        let sqrt2 = R::lit(2.0).sqrt();
        let mut phi0 = vec![R::zero(); n];
        phi0[c] = sqrt2 * vec_even[0];
        for j in 1..m_even {
            phi0[c + j] = vec_even[j];
            phi0[c - j] = vec_even[j];
        }
        let mut phi1 = vec![R::zero(); n];
        for j in 0..m_odd {
            phi1[c + 1 + j] = vec_odd[j];
            phi1[c - 1 - j] = -vec_odd[j];
        }
        Ok((e_even, phi0, e_odd, phi1))
    }

    /// Direct full-grid solve (general potentials).
    fn solve_direct(&self, t: R) -> Result<(R, Vec<R>, R, Vec<R>), WellModesError> {
        let n = self.x.len();
        let m = n - 2;
        let two_t = R::lit(2.0) * t;
        let diag: Vec<R> = (0..m).map(|i| two_t + self.v[i + 1]).collect();
        let off = vec![-t; m - 1];
        let tri = SymTridiag::new(diag, off);
        let eigs = tri.lowest_eigenvalues(2);
        let v0 = tri.eigenvector(eigs[0], &[]);
        let v1 = tri.eigenvector(eigs[1], &[&v0]);
        let embed = |interior: Vec<R>| {
            let mut full = vec![R::zero(); n];
            full[1..n - 1].copy_from_slice(&interior);
            full
        };
        Ok((eigs[0], embed(v0), eigs[1], embed(v1)))
    }
}

fn symmetric_grid<R: Scalar>(n: usize, half_box: R) -> Vec<R> {
    let dx = R::lit(2.0) * half_box / R::from_count(n - 1);
    (0..n)
        .map(|i| -half_box + dx * R::from_count(i))
        .collect()
}

impl<R: Scalar> ModePair<R> {
    /// Symmetric-trap mode splitting `ΔE = E₁ − E₀`.
    pub fn delta_e(&self) -> R {
        self.e1 - self.e0
    }

    /// Mean mode energy `Ē = (E₀ + E₁)/2`.
    pub fn mean_energy(&self) -> R {
        (self.e0 + self.e1) * R::lit(0.5)
    }

    /// Left-side overlap `∫_{x<0} φ₀ φ₁ dx` (trapezoid; the centre node
    /// contributes half its weight to each side).
    pub fn side_overlap(&self) -> R {
        let c = (self.x.len() - 1) / 2;
        let mut acc = R::zero();
        for i in 0..c {
            acc += self.phi0[i] * self.phi1[i];
        }
        acc += self.phi0[c] * self.phi1[c] * R::lit(0.5);
        acc * self.dx
    }

    /// Probability of finding the mode `phi` on the left (`x < 0`) side,
    /// with the centre node half-weighted.
    pub fn side_probability(&self, phi: &[R]) -> R {
        let c = (self.x.len() - 1) / 2;
        let mut acc = R::zero();
        for i in 0..c {
            acc += phi[i] * phi[i];
        }
        acc += phi[c] * phi[c] * R::lit(0.5);
        acc * self.dx
    }

    /// Side leakage `ε = 1/2 − ∫_{x<0} φ₀φ₁ dx`, clamped at zero.
    pub fn epsilon(&self) -> R {
        (R::lit(0.5) - self.side_overlap()).max(R::zero())
    }

    /// Left/right well states. Requires a symmetric trap whose lowest pair
    /// really is one state per well (`ε < 0.25`).
    pub fn left_right(&self) -> Result<LeftRightModes<R>, WellModesError> {
        if !self.symmetric {
            return Err(WellModesError::NonSymmetricPotential {
                detail: "left/right well states need a symmetric trap".into(),
            });
        }
        let epsilon = self.epsilon();
        if epsilon.to_f64().unwrap_or(1.0) >= DOUBLE_WELL_EPSILON_LIMIT {
            return Err(WellModesError::NotADoubleWell {
                epsilon: epsilon.to_f64().unwrap_or(f64::NAN),
            });
        }
        let inv_sqrt2 = R::one() / R::lit(2.0).sqrt();
        let phi_l: Vec<R> = self
            .phi0
            .iter()
            .zip(&self.phi1)
            .map(|(&a, &b)| (a + b) * inv_sqrt2)
            .collect();
        let phi_r: Vec<R> = self
            .phi0
            .iter()
            .zip(&self.phi1)
            .map(|(&a, &b)| (a - b) * inv_sqrt2)
            .collect();
        Ok(LeftRightModes {
            phi_l,
            phi_r,
            epsilon,
        })
    }
}

/// Effective two-mode parameters of a symmetric trap with a tilt step of the
/// given height applied to the left half. The effective tilt is
/// `V₀ = step·(1 − 2ε)` — the true on-site energy difference of the
/// left/right states — and the tunnelling element is untouched by the step.
pub fn two_mode_params<R: Scalar>(
    pair: &ModePair<R>,
    step_height: R,
) -> Result<TwoModeParams<R>, WellModesError> {
    if !pair.symmetric {
        return Err(WellModesError::NonSymmetricPotential {
            detail: "effective two-mode parameters need a symmetric base trap".into(),
        });
    }
    let epsilon = pair.epsilon();
    if epsilon.to_f64().unwrap_or(1.0) >= DOUBLE_WELL_EPSILON_LIMIT {
        return Err(WellModesError::NotADoubleWell {
            epsilon: epsilon.to_f64().unwrap_or(f64::NAN),
        });
    }
    let delta_e = pair.delta_e();
    let ebar = pair.mean_energy();
    let v0 = step_height * (R::one() - R::lit(2.0) * epsilon);
    Ok(TwoModeParams {
        e_l: ebar + step_height * (R::one() - epsilon),
        e_r: ebar + step_height * epsilon,
        k: -delta_e * R::lit(0.5),
        delta_e,
        v0,
        xi: mixing_angle(delta_e, v0),
    })
}

/// Exact diagonalisation of a tilt step within the two-mode subspace of a
/// symmetric trap.
///
/// In the `{φ₀, φ₁}` basis the step contributes `step/2` on both diagonal
/// entries (by parity) and `step·(1/2 − ε)` off-diagonally, so
///
/// ```text
/// Ẽ_{0,1} = Ē + step/2 ∓ Ω/2,   Ω = √(ΔE² + v₀²),   v₀ = step(1−2ε),
/// ψ₀ = (φ₀ − ηφ₁)/√(1+η²),      η = v₀/(ΔE + Ω).
/// ```
///
/// Fails with a step-size error when `|step|/Ē ≥ 0.1` (two-mode truncation
/// unreliable); sets a caution flag for `0.01 ≤ |step|/Ē < 0.1`.
pub fn perturbed_modes<R: Scalar>(
    pair: &ModePair<R>,
    step_height: R,
) -> Result<PerturbedModes<R>, WellModesError> {
    let params = two_mode_params(pair, step_height)?;
    let ebar = pair.mean_energy();
    let ratio = (step_height / ebar).abs().to_f64().unwrap_or(f64::INFINITY);
    if ratio >= STEP_LIMIT_RATIO {
        return Err(WellModesError::StepTooLarge { ratio });
    }
    // Exact matrix elements on the grid (parity makes the diagonal ones
    // step/2 up to rounding; the computed values keep the algebra honest).
    let w00 = step_height * pair.side_probability(&pair.phi0);
    let w11 = step_height * pair.side_probability(&pair.phi1);
    let coupling = step_height * pair.side_overlap();
    let mean = (pair.e0 + w00 + pair.e1 + w11) * R::lit(0.5);
    let half_diff = (pair.e1 + w11 - pair.e0 - w00) * R::lit(0.5);
    let half_omega = half_diff.hypot(coupling);
    let eta = if half_omega + half_diff == R::zero() {
        R::zero()
    } else {
        coupling / (half_omega + half_diff)
    };
    let norm = R::one() / (R::one() + eta * eta).sqrt();
    let psi0: Vec<R> = pair
        .phi0
        .iter()
        .zip(&pair.phi1)
        .map(|(&a, &b)| norm * (a - eta * b))
        .collect();
    let psi1: Vec<R> = pair
        .phi0
        .iter()
        .zip(&pair.phi1)
        .map(|(&a, &b)| norm * (eta * a + b))
        .collect();
    Ok(PerturbedModes {
        e0: mean - half_omega,
        e1: mean + half_omega,
        psi0,
        psi1,
        eta,
        omega: R::lit(2.0) * half_omega,
        params,
        step_caution: ratio >= STEP_CAUTION_RATIO,
    })
}

/// Applies the grid Hamiltonian (`−φ''/2m` by central differences, plus the
/// potential) to a full-grid vector; Dirichlet walls keep the endpoints zero.
pub fn apply_grid_hamiltonian<R: Scalar>(spec: &PotentialSpec<R>, phi: &[R]) -> Vec<R> {
    let n = spec.x().len();
    assert_eq!(phi.len(), n, "vector must live on the spec grid");
    let t = R::one() / (R::lit(2.0) * spec.mass() * spec.dx() * spec.dx());
    let mut out = vec![R::zero(); n];
    for i in 1..n - 1 {
        out[i] = (R::lit(2.0) * phi[i] - phi[i - 1] - phi[i + 1]) * t + spec.v()[i] * phi[i];
    }
    out
}

/// The tilt-step profile on the grid: `height` left of centre, half at the
/// centre node, zero to the right — the grid operator whose quadratic form
/// matches the half-weighted side quadrature exactly.
pub fn step_profile<R: Scalar>(spec: &PotentialSpec<R>, height: R) -> Vec<R> {
    let n = spec.x().len();
    let c = (n - 1) / 2;
    let mut w = vec![R::zero(); n];
    for item in w.iter_mut().take(c) {
        *item = height;
    }
    w[c] = height * R::lit(0.5);
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn empty_box_matches_the_particle_in_a_box() {
        // A vanishing barrier turns the square family into a plain box of
        // width 2L: E_n = n²π²/(2m(2L)²), and the left-side overlap of the
        // two lowest modes is 4/(3π).
        let l = 1.0f64;
        let spec = PotentialSpec::square_double_well(2049, l, 0.5, 0.0, 1.0).unwrap();
        let pair = spec.solve_two_modes_unchecked().unwrap();
        let e1_exact = std::f64::consts::PI.powi(2) / (2.0 * (2.0 * l).powi(2));
        assert!(((pair.e0 - e1_exact) / e1_exact).abs() < 1e-5, "{}", pair.e0);
        assert!(
            ((pair.e1 - 4.0 * e1_exact) / (4.0 * e1_exact)).abs() < 1e-5,
            "{}",
            pair.e1
        );
        let overlap_exact = 4.0 / (3.0 * std::f64::consts::PI);
        assert!(
            (pair.side_overlap() - overlap_exact).abs() < 1e-4,
            "{} vs {}",
            pair.side_overlap(),
            overlap_exact
        );
        assert!((pair.epsilon() - (0.5 - overlap_exact)).abs() < 1e-4);
        // Ground mode positive at the centre.
        let c = (pair.x.len() - 1) / 2;
        assert!(pair.phi0[c] > 0.0);
    }

    #[test]
    fn harmonic_trap_energies() {
        let spec = PotentialSpec::<f64>::gaussian_barrier_trap(1025, 8.0, 1.0, 0.0, 1.0, 1.0).unwrap();
        let pair = spec.solve_two_modes_unchecked().unwrap();
        assert!((pair.e0 - 0.5).abs() < 1e-4, "{}", pair.e0);
        assert!((pair.e1 - 1.5).abs() < 1e-4, "{}", pair.e1);
    }

    #[test]
    fn parity_split_agrees_with_direct_diagonalisation() {
        let spec = PotentialSpec::square_double_well(513, 10.0, 2.0, 0.5, 1.0).unwrap();
        let t = 1.0 / (2.0 * spec.mass() * spec.dx() * spec.dx());
        let (e0p, phi0p, e1p, phi1p) = spec.solve_parity_split(t).unwrap();
        let (e0d, phi0d, e1d, phi1d) = spec.solve_direct(t).unwrap();
        assert_abs_diff_eq!(e0p, e0d, epsilon = 1e-11);
        assert_abs_diff_eq!(e1p, e1d, epsilon = 1e-11);
        // Same states up to sign and normalisation: compare |cos| of the
        // angle between them.
        let cosine = |a: &[f64], b: &[f64]| {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            (dot / (na * nb)).abs()
        };
        assert!(cosine(&phi0p, &phi0d) > 1.0 - 1e-9);
        assert!(cosine(&phi1p, &phi1d) > 1.0 - 1e-9);
    }

    #[test]
    fn double_well_modes_localise_left_and_right() {
        let spec = PotentialSpec::square_double_well(1601, 10.0, 2.0, 0.5, 1.0).unwrap();
        let pair = spec.solve_two_modes_unchecked().unwrap();
        assert!(pair.delta_e() > 0.0);
        let lr = pair.left_right().unwrap();
        assert!(lr.epsilon < 0.05, "leakage {}", lr.epsilon);
        // φ_L carries 1 − ε of its weight on the left.
        let p_left = pair.side_probability(&lr.phi_l);
        assert_abs_diff_eq!(p_left, 1.0 - lr.epsilon, epsilon = 1e-10);
        let p_right = pair.side_probability(&lr.phi_r);
        assert_abs_diff_eq!(p_right, lr.epsilon, epsilon = 1e-10);
    }

    #[test]
    fn grid_quality_checks_fire_on_coarse_grids() {
        let coarse = PotentialSpec::square_double_well(65, 10.0, 2.0, 0.5, 1.0).unwrap();
        assert!(matches!(
            coarse.solve_two_modes(),
            Err(WellModesError::GridTooCoarse { .. })
        ));
        // The unchecked path still solves it.
        assert!(coarse.solve_two_modes_unchecked().is_ok());
    }

    #[test]
    fn fine_grids_pass_the_quality_checks() {
        // A plain box at high resolution: the splitting is stable to well
        // under 1e-6 against half resolution, and the grid resolves the
        // upper-mode wavelength.
        let spec = PotentialSpec::square_double_well(8193, 1.0, 0.5, 0.0, 1.0).unwrap();
        let pair = spec.solve_two_modes().unwrap();
        assert!(pair.delta_e() > 0.0);
    }

    #[test]
    fn mismatched_mode_pairs_are_rejected_as_a_double_well() {
        // A narrow centre well that binds only the even mode: φ₀ sits in the
        // well while φ₁ spreads over the harmonic envelope, so their side
        // overlap collapses and the pair no longer describes one state per
        // well.
        let n = 2049;
        let grid = symmetric_grid::<f64>(n, 8.0);
        let sigma2 = 0.15 * 0.15;
        let v: Vec<f64> = grid
            .iter()
            .map(|&x| 0.5 * x * x - 30.0 * (-x * x / (2.0 * sigma2)).exp())
            .collect();
        let spec = PotentialSpec::from_samples(grid, v, 1.0).unwrap();
        let pair = spec.solve_two_modes_unchecked().unwrap();
        assert!(pair.epsilon() >= 0.25, "ε = {}", pair.epsilon());
        assert!(matches!(
            pair.left_right(),
            Err(WellModesError::NotADoubleWell { .. })
        ));
    }

    #[test]
    fn asymmetric_potentials_are_solved_but_not_side_split() {
        let n = 513;
        let grid = symmetric_grid::<f64>(n, 8.0);
        let v: Vec<f64> = grid.iter().map(|&x| 0.5 * x * x + 0.3 * x).collect();
        let spec = PotentialSpec::from_samples(grid, v, 1.0).unwrap();
        assert!(!spec.is_symmetric());
        let pair = spec.solve_two_modes_unchecked().unwrap();
        // Shifted oscillator: spectrum is the harmonic one lowered by
        // (0.3)²/2ω² with ω = 1.
        let shift = 0.3f64.powi(2) / 2.0;
        assert!((pair.e0 - (0.5 - shift)).abs() < 1e-3, "{}", pair.e0);
        assert!(matches!(
            pair.left_right(),
            Err(WellModesError::NonSymmetricPotential { .. })
        ));
        assert!(matches!(
            two_mode_params(&pair, 0.01),
            Err(WellModesError::NonSymmetricPotential { .. })
        ));
    }

    #[test]
    fn step_size_limits_are_enforced() {
        let spec = PotentialSpec::square_double_well(513, 10.0, 2.0, 0.5, 1.0).unwrap();
        let pair = spec.solve_two_modes_unchecked().unwrap();
        let ebar = pair.mean_energy();
        assert!(matches!(
            perturbed_modes(&pair, 0.2 * ebar),
            Err(WellModesError::StepTooLarge { .. })
        ));
        let cautious = perturbed_modes(&pair, 0.05 * ebar).unwrap();
        assert!(cautious.step_caution);
        let safe = perturbed_modes(&pair, 0.001 * ebar).unwrap();
        assert!(!safe.step_caution);
    }

    #[test]
    fn tilted_two_mode_subspace_closes_on_itself() {
        // Within the two-mode subspace the left state obeys
        // (H + W)φ_L = E_L φ_L + K φ_R exactly up to the leakage term, whose
        // norm is step·√(ε(1−ε)) ≤ step·√ε.
        let spec = PotentialSpec::<f64>::square_double_well(1601, 10.0, 2.0, 0.5, 1.0).unwrap();
        let pair = spec.solve_two_modes_unchecked().unwrap();
        let lr = pair.left_right().unwrap();
        let step = 0.002;
        let params = two_mode_params(&pair, step).unwrap();
        let w = step_profile(&spec, step);
        let h_phi_l = apply_grid_hamiltonian(&spec, &lr.phi_l);
        let mut residual2 = 0.0;
        for i in 0..lr.phi_l.len() {
            let r = h_phi_l[i] + w[i] * lr.phi_l[i]
                - params.e_l * lr.phi_l[i]
                - params.k * lr.phi_r[i];
            residual2 += r * r;
        }
        let norm = (residual2 * spec.dx()).sqrt();
        let bound = 1.2 * step * lr.epsilon.sqrt() + 1e-10;
        assert!(norm <= bound, "residual {norm} vs bound {bound}");
    }

    #[test]
    fn perturbed_energies_match_direct_diagonalisation_quadratically() {
        let spec = PotentialSpec::gaussian_barrier_trap(1025, 6.0, 1.0, 5.0, 1.0, 1.0).unwrap();
        let pair = spec.solve_two_modes_unchecked().unwrap();
        let ebar = pair.mean_energy();
        let err = |step: f64| -> f64 {
            let pm = perturbed_modes(&pair, step).unwrap();
            // Direct: same grid with the step profile added to the potential.
            let w = step_profile(&spec, step);
            let v_tilted: Vec<f64> =
                spec.v().iter().zip(&w).map(|(&v, &wi)| v + wi).collect();
            let tilted =
                PotentialSpec::from_samples(spec.x().to_vec(), v_tilted, spec.mass()).unwrap();
            let direct = tilted.solve_two_modes_unchecked().unwrap();
            (pm.e0 - direct.e0).abs().max((pm.e1 - direct.e1).abs())
        };
        let ratio = err(0.04 * ebar) / err(0.02 * ebar);
        assert!(
            (3.2..=4.8).contains(&ratio),
            "two-mode truncation error ratio {ratio}"
        );
    }

    #[test]
    fn effective_parameters_expose_the_rotation_to_left_right() {
        let de = 1.0f64;
        let v0 = 0.3;
        let params = TwoModeParams::direct(de, v0);
        // Conjugating diag(Ẽ₀, Ẽ₁) by the mixing rotation must reproduce the
        // tilt on the diagonal and −ΔE/2 off it.
        let omega = params.omega();
        let (e0, e1) = (-omega / 2.0, omega / 2.0);
        let (c, s) = (params.xi.cos(), params.xi.sin());
        let m00 = c * c * e0 + s * s * e1;
        let m11 = s * s * e0 + c * c * e1;
        let m01 = c * s * (e0 - e1);
        assert_abs_diff_eq!(m00 - m11, v0, epsilon = 1e-14);
        assert_abs_diff_eq!(m01, -de / 2.0, epsilon = 1e-14);
        assert!(params.xi >= std::f64::consts::FRAC_PI_4 && params.xi < std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn spec_validation_rejects_malformed_grids() {
        assert!(matches!(
            PotentialSpec::<f64>::square_double_well(100, 10.0, 2.0, 0.5, 1.0),
            Err(WellModesError::InvalidSpec { .. })
        ));
        assert!(matches!(
            PotentialSpec::from_samples(vec![0.0, 1.0, 2.0, 3.0], vec![0.0; 4], 1.0),
            Err(WellModesError::InvalidSpec { .. })
        ));
        // Non-symmetric interval.
        let x: Vec<f64> = (0..5).map(|i| i as f64).collect();
        assert!(matches!(
            PotentialSpec::from_samples(x, vec![0.0; 5], 1.0),
            Err(WellModesError::InvalidSpec { .. })
        ));
    }
}
