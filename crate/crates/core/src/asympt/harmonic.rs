//! The harmonic sum `f(t) = Σ_{k≥0} (1−α)αᵏ exp(−β^{−k} t)`.

use serde::Serialize;

use super::spectrum::{oscillation_spectrum, DEFAULT_REGIME_GUARD};
use crate::exact::{trap_cutoff, TailTable};
use crate::model::ModelParams;
use crate::{Error, NeumaierSum, Real, Result};

/// A truncated series value with an absolute bound on the omitted terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeriesValue<T> {
    pub value: T,
    pub bound: T,
    pub terms: u32,
}

/// `f(t)` summed to `k_max = ⌈ln eps/ln α⌉`; the omitted terms total at
/// most `α^{k_max+1}`.
pub fn f_series<T: Real>(params: &ModelParams<T>, t: T, eps: T) -> Result<SeriesValue<T>> {
    if !(t >= T::zero()) {
        return Err(Error::domain(format!("f needs t >= 0, got {t}")));
    }
    let k_max = trap_cutoff(params.alpha(), eps)?;
    let inv_beta = params.beta().recip();
    let mut acc = NeumaierSum::new();
    let mut scale = t;
    for k in 0..=k_max {
        acc.add(params.trap_weight(k) * (-scale).exp());
        scale = scale * inv_beta;
    }
    Ok(SeriesValue {
        value: acc.value(),
        bound: params.alpha().powi(k_max as i32 + 1),
        terms: k_max + 1,
    })
}

/// Oscillating power-law form of `f` with `modes_max` modes, for `t ≥ 2`.
pub fn f_asymptotic<T: Real>(params: &ModelParams<T>, t: T, modes_max: usize) -> Result<T> {
    if !(t >= T::lit(DEFAULT_REGIME_GUARD)) {
        return Err(Error::domain(format!(
            "asymptotic form needs t >= {DEFAULT_REGIME_GUARD}, got {t}"
        )));
    }
    oscillation_spectrum(params, modes_max)?.f_asymptotic(t)
}

/// Constants `(C₁, C₂)` with `C₁ t^{−ρ} ≤ f(t) ≤ C₂ t^{−ρ}` for `t > 1`:
/// `C₁ = (1−α)e^{−1}β^{−ρ}` and `C₂ = α^{−1} Σ_{k∈ℤ} (1−α)αᵏ exp(−β^{−k})`.
pub fn sandwich_constants<T: Real>(params: &ModelParams<T>) -> (T, T) {
    let (a, b) = (params.alpha(), params.beta());
    let one = T::one();
    let c1 = (one - a) * (-one).exp() * b.powf(-params.rho());
    let mut acc = NeumaierSum::new();
    // k ≥ 0: geometric in α
    let mut k = 0i32;
    loop {
        let term = (one - a) * a.powi(k) * (-b.powi(-k)).exp();
        acc.add(term);
        if term < T::epsilon() * T::epsilon() * acc.value() {
            break;
        }
        k += 1;
    }
    // k < 0: doubly exponential decay
    let mut k = 1i32;
    loop {
        let term = (one - a) * a.powi(-k) * (-b.powi(k)).exp();
        acc.add(term);
        if term < T::epsilon() * T::epsilon() * acc.value() || !term.is_finite() {
            break;
        }
        k += 1;
    }
    (c1, acc.value() / a)
}

/// `g((β−1)²t/(2β))·t^{−ρ}` on a grid, as an asymptotic tail table. The
/// recorded bound is the first omitted mode amplitude (relative).
pub fn asymptotic_tail<T: Real>(params: &ModelParams<T>, t_grid: &[T], modes_max: usize) -> Result<TailTable<T>> {
    let spec = oscillation_spectrum(params, modes_max)?;
    let b = params.beta();
    let scale = (b - T::one()) * (b - T::one()) / (T::lit(2.0) * b);
    let survival = t_grid
        .iter()
        .map(|&t| Ok((spec.g(scale * t)? * t.powf(-params.rho())).min(T::one())))
        .collect::<Result<Vec<T>>>()?;
    TailTable::asymptotic(t_grid.to_vec(), survival, Some(spec.truncation_bound()))
}
