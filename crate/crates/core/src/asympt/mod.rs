//! Asymptotic side: complex Gamma, the oscillation spectrum, the harmonic
//! sum `f` and its Mellin transform.

mod gamma;
mod harmonic;
mod mellin;
mod spectrum;

use num_complex::Complex;

pub use gamma::{complex_gamma, complex_ln_gamma, LANCZOS_COEFFICIENTS, LANCZOS_G};
pub use harmonic::{asymptotic_tail, f_asymptotic, f_series, sandwich_constants, SeriesValue};
pub use mellin::{mellin_f_star, residue_at_chi, MellinValue};
pub use spectrum::{
    chi, g_eval, oscillation_spectrum, theorem_ratio, Mode, OscillationSpectrum, DEFAULT_MODES, DEFAULT_REGIME_GUARD,
};

/// Complex carrier used across the asymptotic API.
pub type ComplexValue<T> = Complex<T>;
