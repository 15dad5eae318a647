//! Complex Gamma function by the Lanczos approximation.

use num_complex::Complex;

use crate::{Error, Real, Result};

/// Lanczos shift `g`.
pub const LANCZOS_G: f64 = 7.0;

/// Lanczos coefficients for `g = 7`, `n = 9` (the widely published set,
/// e.g. Numerical Recipes / Wikipedia), checked in tests against the
/// recurrence and known values.
#[allow(clippy::excessive_precision)]
pub const LANCZOS_COEFFICIENTS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_pole<T: Real>(z: Complex<T>) -> bool {
    z.im == T::zero() && z.re <= T::zero() && z.re == z.re.round()
}

/// `ln Γ(z)` on some branch; the imaginary part is an argument of `Γ(z)`
/// but not necessarily the principal one.
pub fn complex_ln_gamma<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::domain(format!("non-finite Gamma argument {z}")));
    }
    if is_pole(z) {
        return Err(Error::Pole(format!("Gamma has a pole at {}", z.re)));
    }
    let half = T::lit(0.5);
    let pi = T::PI();
    let out = if z.re < half {
        // Γ(z)Γ(1−z) = π / sin(πz)
        let one = Complex::new(T::one(), T::zero());
        Complex::new(pi.ln(), T::zero()) - ln_sin(z * pi) - complex_ln_gamma(one - z)?
    } else {
        let z = z - T::one();
        let mut x = Complex::new(T::lit(LANCZOS_COEFFICIENTS[0]), T::zero());
        for (i, &c) in LANCZOS_COEFFICIENTS.iter().enumerate().skip(1) {
            x = x + Complex::new(T::lit(c), T::zero()) / (z + T::lit(i as f64));
        }
        let t = z + T::lit(LANCZOS_G) + half;
        Complex::new(half * (T::lit(2.0) * pi).ln(), T::zero()) + (z + half) * t.ln() - t + x.ln()
    };
    if !(out.re.is_finite() && out.im.is_finite()) {
        return Err(Error::overflow(format!("ln Gamma({z}) is not representable")));
    }
    Ok(out)
}

/// `ln sin w` without forming `sin w`, which overflows for large `|im w|`.
fn ln_sin<T: Real>(w: Complex<T>) -> Complex<T> {
    let i = Complex::new(T::zero(), T::one());
    let ln_2i = Complex::new(T::lit(2.0).ln(), T::FRAC_PI_2());
    let one = Complex::new(T::one(), T::zero());
    if w.im >= T::zero() {
        // sin w = e^{−iw}(e^{2iw} − 1)/(2i)
        -i * w + ((i * w * T::lit(2.0)).exp() - one).ln() - ln_2i
    } else {
        // sin w = e^{iw}(1 − e^{−2iw})/(2i)
        i * w + (one - (-i * w * T::lit(2.0)).exp()).ln() - ln_2i
    }
}

/// `Γ(z)`. Errors at nonpositive integers and when the result is not a
/// finite number in `T`.
pub fn complex_gamma<T: Real>(z: Complex<T>) -> Result<Complex<T>> {
    let g = complex_ln_gamma(z)?.exp();
    if !(g.re.is_finite() && g.im.is_finite()) {
        return Err(Error::overflow(format!("Gamma({z}) overflows")));
    }
    Ok(g)
}
