//! Simulation toolkit for `N` non-interacting bosons in a slightly asymmetric
//! double-well trap.
//!
//! The crate is organised bottom-up:
//!
//! * [`constants`] — physical constants and unit helpers.
//! * [`linalg`] — the small dense/tridiagonal eigensolvers everything else
//!   leans on (Sturm bisection, inverse iteration, Householder reduction).
//! * [`wellmodes`] — one-dimensional double-well potentials, their two lowest
//!   single-particle modes, and the left/right basis built from them.
//! * [`density`] — 2×2 effective one-body density matrices in the mode and
//!   left/right bases, with fragmentation and eigenmode analysis.
//! * [`thermal`] — canonical (fixed-`N`) thermal occupations, equilibrium and
//!   kicked states, and the temperature/size limit tables.
//! * [`dynamics`] — time evolution of the effective density matrix: exact
//!   Bloch-vector integration, the polar-variable integrator, and the
//!   closed-form oscillation solutions with their constant sets.
//! * [`oracle`] — brute-force many-body evolution in the symmetric Fock basis,
//!   used as an independent cross-check of the reduced dynamics.
//! * [`acceptance`] — the end-to-end checks the toolkit is expected to pass,
//!   each reporting one pass/fail line.
//!
//! All numerical code is generic over the floating-point scalar through the
//! [`Scalar`] trait; `f32` and `f64` both work, and the crate root exports
//! `f64`-concrete type aliases for everyday use.
//!
//! Unless a function says otherwise, dynamical quantities use natural units
//! with `ħ = 1`: energies are angular frequencies and times are seconds times
//! rad/s. SI constants live in [`constants`] for the thermal conversions.

// Numeric-kernel idioms kept deliberately: negated comparisons (`!(x > y)`)
// are NaN-rejecting guards, and index loops mirror the textbook forms of the
// algorithms they implement.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

pub mod acceptance;
pub mod constants;
pub mod density;
pub mod dynamics;
pub mod linalg;
pub mod oracle;
pub mod thermal;
pub mod wellmodes;

/// Floating-point scalar the whole toolkit is generic over.
///
/// `f32` and `f64` implement it. The bounds are the intersection of what the
/// numerical kernels need: IEEE arithmetic with transcendentals
/// ([`num_traits::Float`]), mathematical constants ([`FloatConst`]),
/// conversion from literals ([`FromPrimitive`]), compound assignment
/// ([`NumAssign`]), and the usual utility traits.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Shorthand for lossy conversion from an `f64` literal.
    ///
    /// Panics only if the target type cannot represent any approximation of
    /// `x`, which does not happen for finite literals with `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal must convert to Scalar")
    }

    /// Shorthand for converting a small integer index or count.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count must convert to Scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

// `f64`-concrete aliases for the main public types, so downstream code that
// does not care about genericity can ignore the type parameter entirely.

/// [`wellmodes::PotentialSpec`] over `f64`.
pub type PotentialSpec = wellmodes::PotentialSpec<f64>;
/// [`wellmodes::ModePair`] over `f64`.
pub type ModePair = wellmodes::ModePair<f64>;
/// [`wellmodes::PerturbedModes`] over `f64`.
pub type PerturbedModes = wellmodes::PerturbedModes<f64>;
/// [`wellmodes::TwoModeParams`] over `f64`.
pub type TwoModeParams = wellmodes::TwoModeParams<f64>;
/// [`density::EffectiveDensityMatrix01`] over `f64`.
pub type EffectiveDensityMatrix01 = density::EffectiveDensityMatrix01<f64>;
/// [`density::EffectiveDensityMatrixLR`] over `f64`.
pub type EffectiveDensityMatrixLR = density::EffectiveDensityMatrixLR<f64>;
/// [`density::BasisTransform`] over `f64`.
pub type BasisTransform = density::BasisTransform<f64>;
/// [`thermal::ThermalEnsemble`] over `f64`.
pub type ThermalEnsemble = thermal::ThermalEnsemble<f64>;
/// [`thermal::ScenarioRow`] over `f64`.
pub type ScenarioRow = thermal::ScenarioRow<f64>;
/// [`thermal::Isoline`] over `f64`.
pub type Isoline = thermal::Isoline<f64>;
/// [`dynamics::JosephsonState`] over `f64`.
pub type JosephsonState = dynamics::JosephsonState<f64>;
/// [`dynamics::Trajectory`] over `f64`.
pub type Trajectory = dynamics::Trajectory<f64>;
/// [`dynamics::StandardSolutionConstants`] over `f64`.
pub type StandardSolutionConstants = dynamics::StandardSolutionConstants<f64>;
/// [`dynamics::GeneralizedSolutionConstants`] over `f64`.
pub type GeneralizedSolutionConstants = dynamics::GeneralizedSolutionConstants<f64>;
/// [`oracle::ManyBodyState`] over `f64`.
pub type ManyBodyState = oracle::ManyBodyState<f64>;
