//! Tail of the excursion length of a biased random walk in a trap of
//! geometrically distributed size.
//!
//! The walk lives on `{0, …, k}`, steps right with probability `β/(1+β)`
//! and reflects at both ends; the trap size `k` is geometric with
//! `P[k] = (1−α)αᵏ`. The length `T` of an excursion from `0` has a tail
//! decaying like `t^{−ρ}` with `ρ = −ln α / ln β`, modulated by a
//! log-periodic factor.
//!
//! * [`model`] closed forms (hitting probabilities, moments, h-transforms),
//! * [`exact`] machine-precision return-time laws and the mixture tail,
//! * [`sim`] seeded, worker-count independent Monte Carlo,
//! * [`asympt`] complex Gamma, oscillation spectrum, harmonic sum and its
//!   Mellin transform,
//! * [`verify`] / [`cli`] the verification report and command-line front end.
//!
//! The numerical core is generic over the scalar type ([`Real`]); the
//! aliases below pin it to `f64`, which is what the simulator and CLI use.

// `!(x > 0)` style guards are used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asympt;
pub mod cli;
mod error;
pub mod exact;
pub mod grid;
pub mod model;
mod scalar;
pub mod sim;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{NeumaierSum, Real};

pub use asympt::{
    complex_gamma, f_asymptotic, f_series, g_eval, mellin_f_star, oscillation_spectrum, residue_at_chi, theorem_ratio,
    ComplexValue,
};
pub use exact::{fixed_k_return_distribution, mixture_moment, mixture_tail, Provenance, TruncatedMoment};
pub use model::{make_params, Moment, WalkKind};
pub use sim::{ExcursionSample, SimConfig, StatsRecord};

/// Model parameters in double precision.
pub type Params = model::ModelParams<f64>;
/// Exact fixed-trap return-time law in double precision.
pub type FixedKDistribution = exact::FixedKDistribution<f64>;
/// Tail table in double precision.
pub type TailTable = exact::TailTable<f64>;
/// Oscillation spectrum in double precision.
pub type OscillationSpectrum = asympt::OscillationSpectrum<f64>;
/// Complex number in double precision.
pub type Complex64 = num_complex::Complex<f64>;
