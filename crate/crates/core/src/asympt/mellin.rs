//! Mellin transform of the harmonic sum and its residues.

use num_complex::Complex;
use serde::Serialize;

use super::gamma::complex_gamma;
use super::spectrum::chi;
use crate::model::ModelParams;
use crate::{Error, Real, Result};

/// `f*(z)` together with whether `z` lies in the fundamental strip
/// `0 < re z < ρ`, where the Mellin integral converges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MellinValue<T> {
    #[serde(skip)]
    pub value: Complex<T>,
    pub in_strip: bool,
}

/// `f*(z) = Γ(z)(1−α)/(1−αβ^z)`.
pub fn mellin_f_star<T: Real>(params: &ModelParams<T>, z: Complex<T>) -> Result<MellinValue<T>> {
    let (a, b) = (params.alpha(), params.beta());
    let one = Complex::new(T::one(), T::zero());
    // αβ^z = exp((z − ρ) ln β); 1 − αβ^z = −expm1((z − ρ) ln β)
    let w = (z - params.rho()) * b.ln();
    let denom = -complex_expm1(w);
    if denom.norm() <= T::lit(16.0) * T::epsilon() {
        return Err(Error::Pole(format!("f* has a pole at {z}")));
    }
    let value = complex_gamma(z)? * (one * (T::one() - a)) / denom;
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::overflow(format!("f*({z}) is not representable")));
    }
    Ok(MellinValue {
        value,
        in_strip: z.re > T::zero() && z.re < params.rho(),
    })
}

/// `e^w − 1` without cancellation for small `w`.
fn complex_expm1<T: Real>(w: Complex<T>) -> Complex<T> {
    // e^{x+iy} − 1 = (e^x − 1)cos y + (cos y − 1) + i e^x sin y
    let (x, y) = (w.re, w.im);
    let cos_m1 = -T::lit(2.0) * (y / T::lit(2.0)).sin().powi(2);
    Complex::new(x.exp_m1() * y.cos() + cos_m1, x.exp() * y.sin())
}

/// Residue coefficient `−(1−α)Γ(χ_k)/ln β` of `f*` at `χ_k`.
pub fn residue_at_chi<T: Real>(params: &ModelParams<T>, k: i64) -> Result<Complex<T>> {
    let g = complex_gamma(chi(params, k))?;
    Ok(-g * (T::one() - params.alpha()) / params.beta().ln())
}
