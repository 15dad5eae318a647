//! Independent oracles shared by the integration tests.

#![allow(dead_code, clippy::excessive_precision, clippy::too_many_arguments)]

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exact law of the first return time to `0` on `{0, …, k}` by enumerating
/// every path of length at most `t_max`. `beta = num/den`.
pub fn enumerate_return_pmf(num: i64, den: i64, k: u32, t_max: usize) -> Vec<BigRational> {
    let beta = BigRational::new(BigInt::from(num), BigInt::from(den));
    let one = BigRational::one();
    let up = &beta / (&one + &beta);
    let down = &one / (&one + &beta);
    let mut pmf = vec![BigRational::zero(); t_max + 1];
    if k == 0 {
        pmf[0] = one;
        return pmf;
    }

    fn walk(
        pos: u32,
        t: usize,
        prob: BigRational,
        k: u32,
        t_max: usize,
        up: &BigRational,
        down: &BigRational,
        pmf: &mut [BigRational],
    ) {
        if pos == 0 {
            pmf[t] += prob;
            return;
        }
        if t == t_max {
            return;
        }
        if pos == k {
            walk(pos - 1, t + 1, prob, k, t_max, up, down, pmf);
        } else {
            walk(pos + 1, t + 1, &prob * up, k, t_max, up, down, pmf);
            walk(pos - 1, t + 1, &prob * down, k, t_max, up, down, pmf);
        }
    }

    walk(1, 1, one, k, t_max, &up, &down, &mut pmf);
    pmf
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("representable rational")
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

/// Adaptive Gauss–Kronrod quadrature of a complex integrand on `[a, b]`
/// to absolute tolerance `tol`, or to rounding level when that is coarser.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, tol: f64) -> Complex64 {
    fn rec<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Complex64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol.max(64.0 * f64::EPSILON * v.norm()) || depth >= 40 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1) + rec(f, m, b, 0.5 * tol, depth + 1)
    }
    // split into unit pieces first so oscillations are resolved
    let pieces = ((b - a).ceil() as usize).max(1);
    let w = (b - a) / pieces as f64;
    (0..pieces)
        .map(|i| rec(&f, a + i as f64 * w, a + (i + 1) as f64 * w, tol / pieces as f64, 0))
        .sum()
}

pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    integrate(|x| Complex64::new(f(x), 0.0), a, b, tol).re
}

/// `ln((1−α)αᵏ) − β^{−k}·eᵘ` summed over all `k` in log space: returns
/// `ln f(eᵘ)` with relative accuracy for any `u`.
pub fn ln_f_at_log_time(alpha: f64, beta: f64, u: f64) -> f64 {
    let k_centre = (u / beta.ln()).max(0.0);
    let k_hi = k_centre.ceil() as i64 + (25.0 / -alpha.log10()).ceil() as i64 + 10;
    let terms: Vec<f64> = (0..=k_hi)
        .map(|k| {
            let kf = k as f64;
            (1.0 - alpha).ln() + kf * alpha.ln() - (u - kf * beta.ln()).exp()
        })
        .collect();
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + terms.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `∫₀^∞ t^{z−1} f(t) dt` for real `z` in the strip, by quadrature in `u = ln t`.
pub fn mellin_by_quadrature(alpha: f64, beta: f64, z: f64) -> f64 {
    let rho = -alpha.ln() / beta.ln();
    let lo = -45.0 / z;
    let hi = 45.0 / (rho - z);
    integrate_real(|u| (z * u + ln_f_at_log_time(alpha, beta, u)).exp(), lo, hi, 1e-14)
}

/// `(1/2π)∫ f*(c+iy) t^{−(c+iy)} dy` over `|y| ≤ y_max`: the inverse
/// Mellin integral along the vertical line `re z = c`.
pub fn inverse_mellin_line<F: Fn(Complex64) -> Complex64>(f_star: F, c: f64, t: f64, y_max: f64) -> f64 {
    let lt = t.ln();
    let v = integrate(
        |y| {
            let z = Complex64::new(c, y);
            f_star(z) * (-z * lt).exp()
        },
        -y_max,
        y_max,
        1e-16,
    );
    v.re / (2.0 * std::f64::consts::PI)
}
