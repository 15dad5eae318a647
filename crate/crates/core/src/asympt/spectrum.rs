//! Fourier modes of the log-periodic factor and the limit density `g`.

use num_complex::Complex;
use serde::Serialize;

use super::gamma::complex_ln_gamma;
use crate::model::ModelParams;
use crate::{Error, NeumaierSum, Real, Result};

/// Default number of oscillation modes.
pub const DEFAULT_MODES: usize = 10;

/// Smallest `t` accepted by the guarded asymptotic evaluations.
pub const DEFAULT_REGIME_GUARD: f64 = 2.0;

/// One Fourier mode: amplitude `c`, phase `d` in `(−π, π]`, pole `chi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Mode<T> {
    pub k: u32,
    pub c: T,
    pub d: T,
    #[serde(skip)]
    pub chi: Complex<T>,
}

/// Prefactor, exponent and modes of the oscillating tail.
#[derive(Clone, Debug, PartialEq)]
pub struct OscillationSpectrum<T> {
    params: ModelParams<T>,
    prefactor: T,
    f_scale: T,
    gamma_rho: T,
    modes: Vec<Mode<T>>,
    next_amplitude: T,
    bracket_positive: bool,
}

/// Pole `χ_k = ρ + 2πik/ln β`.
pub fn chi<T: Real>(params: &ModelParams<T>, k: i64) -> Complex<T> {
    let im = T::lit(2.0) * T::PI() * T::lit(k as f64) / params.beta().ln();
    Complex::new(params.rho(), im)
}

fn principal(mut x: f64) -> f64 {
    use std::f64::consts::PI;
    x %= 2.0 * PI;
    if x <= -PI {
        x += 2.0 * PI;
    } else if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Computes the spectrum with `modes_max` modes. Modes whose amplitude
/// underflows `T` are dropped.
pub fn oscillation_spectrum<T: Real>(params: &ModelParams<T>, modes_max: usize) -> Result<OscillationSpectrum<T>> {
    let (a, b, rho) = (params.alpha(), params.beta(), params.rho());
    let one = T::one();
    let ln_gamma_rho = complex_ln_gamma(Complex::new(rho, T::zero()))?.re;
    let gamma_rho = ln_gamma_rho.exp();
    let f_scale = (one - a) * gamma_rho / b.ln();
    let scale = T::lit(2.0) * b / ((b - one) * (b - one));
    let prefactor = (b - one) / b * f_scale * scale.powf(rho);
    if !(prefactor.is_finite() && prefactor > T::zero()) {
        return Err(Error::overflow("oscillation prefactor is not representable"));
    }
    let amplitude = |k: usize| -> Result<(T, T, Complex<T>)> {
        let z = chi(params, k as i64);
        let lg = complex_ln_gamma(z)?;
        let c = T::lit(2.0) * (lg.re - ln_gamma_rho).exp();
        let d = T::lit(principal(lg.im.to_f64().unwrap_or(f64::NAN)));
        Ok((c, d, z))
    };
    let mut modes = Vec::with_capacity(modes_max);
    let mut next_amplitude = T::zero();
    for k in 1..=modes_max + 1 {
        let (c, d, z) = amplitude(k)?;
        if !(c > T::zero()) {
            break;
        }
        if k == modes_max + 1 {
            next_amplitude = c;
        } else {
            modes.push(Mode {
                k: k as u32,
                c,
                d,
                chi: z,
            });
        }
    }
    let total: NeumaierSum<T> = modes.iter().map(|m| m.c).collect();
    Ok(OscillationSpectrum {
        params: *params,
        prefactor,
        f_scale,
        gamma_rho,
        bracket_positive: total.value() + next_amplitude < one,
        modes,
        next_amplitude,
    })
}

impl<T: Real> OscillationSpectrum<T> {
    pub fn params(&self) -> &ModelParams<T> {
        &self.params
    }

    pub fn rho(&self) -> T {
        self.params.rho()
    }

    /// Constant in front of the bracket of `g`.
    pub fn prefactor(&self) -> T {
        self.prefactor
    }

    /// Constant in front of the bracket of the harmonic-sum asymptotics,
    /// `(1−α)Γ(ρ)/ln β`.
    pub fn f_scale(&self) -> T {
        self.f_scale
    }

    pub fn gamma_rho(&self) -> T {
        self.gamma_rho
    }

    pub fn modes(&self) -> &[Mode<T>] {
        &self.modes
    }

    /// Amplitude of the first omitted mode; `|bracket error| ≲` this.
    pub fn truncation_bound(&self) -> T {
        self.next_amplitude
    }

    /// Whether the amplitudes sum to less than one, which keeps `g > 0`.
    pub fn bracket_positive(&self) -> bool {
        self.bracket_positive
    }

    /// Same spectrum with every phase negated.
    pub fn with_negated_phases(mut self) -> Self {
        for m in &mut self.modes {
            m.d = -m.d;
        }
        self
    }

    fn angle(&self, t: T) -> T {
        T::lit(2.0) * T::PI() * t.ln() / self.params.beta().ln()
    }

    /// `1 + Σ c_k cos(2πk·ln t/ln β − d_k)`.
    pub fn bracket(&self, t: T) -> T {
        let theta = self.angle(t);
        let mut acc = NeumaierSum::new();
        acc.add(T::one());
        for m in &self.modes {
            acc.add(m.c * (T::lit(m.k as f64) * theta - m.d).cos());
        }
        acc.value()
    }

    /// The same bracket as a sum over `k ∈ ℤ∖{0}` of
    /// `Γ(χ_k)/Γ(ρ)·t^{−2πik/ln β}`.
    pub fn bracket_complex(&self, t: T) -> Result<T> {
        let theta = self.angle(t);
        let mut acc = Complex::new(T::one(), T::zero());
        for m in &self.modes {
            for sign in [1i64, -1] {
                let k = sign * m.k as i64;
                let ratio = (complex_ln_gamma(chi(&self.params, k))? - self.gamma_rho.ln()).exp();
                let phase = Complex::new(T::zero(), -T::lit(k as f64) * theta).exp();
                acc = acc + ratio * phase;
            }
        }
        Ok(acc.re)
    }

    /// `g(t)`.
    pub fn g(&self, t: T) -> Result<T> {
        if !(t > T::zero()) {
            return Err(Error::domain(format!("g needs t > 0, got {t}")));
        }
        Ok(self.prefactor * self.bracket(t))
    }

    /// Oscillating power law `(1−α)Γ(ρ)/ln β · t^{−ρ} · bracket(t)`,
    /// refused below `guard`.
    pub fn f_asymptotic_guarded(&self, t: T, guard: T) -> Result<T> {
        if !(t >= guard && t > T::zero()) {
            return Err(Error::domain(format!("asymptotic form needs t >= {guard}, got {t}")));
        }
        Ok(self.f_scale * t.powf(-self.rho()) * self.bracket(t))
    }

    pub fn f_asymptotic(&self, t: T) -> Result<T> {
        self.f_asymptotic_guarded(t, T::lit(DEFAULT_REGIME_GUARD))
    }

    /// `t^ρ·P[T>t] / g((β−1)²t/(2β))`.
    pub fn theorem_ratio(&self, t: T, tail_value: T) -> Result<T> {
        if !(t > T::zero()) {
            return Err(Error::domain(format!("theorem ratio needs t > 0, got {t}")));
        }
        if !(tail_value > T::zero() && tail_value <= T::one()) {
            return Err(Error::domain(format!(
                "tail value must lie in (0, 1], got {tail_value}"
            )));
        }
        let b = self.params.beta();
        let s = (b - T::one()) * (b - T::one()) * t / (T::lit(2.0) * b);
        Ok(t.powf(self.rho()) * tail_value / self.g(s)?)
    }
}

/// `g(t)` with `modes_max` modes.
pub fn g_eval<T: Real>(params: &ModelParams<T>, t: T, modes_max: usize) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::domain(format!("g needs t > 0, got {t}")));
    }
    oscillation_spectrum(params, modes_max)?.g(t)
}

/// Theorem ratio with the default number of modes.
pub fn theorem_ratio<T: Real>(params: &ModelParams<T>, t: T, tail_value: T) -> Result<T> {
    oscillation_spectrum(params, DEFAULT_MODES)?.theorem_ratio(t, tail_value)
}
