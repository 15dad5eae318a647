//! Closed-form quantities of the walk and the trap.
//!
//! Everything here is a pure function of its arguments. Differences of the
//! form `βᵏ − 1` are evaluated through `expm1` so that they stay accurate for
//! `β` close to one and overflow only when the result itself does.

use serde::Serialize;

use crate::{Error, Real, Result};

/// Trap parameters `(α, β)` and the derived tail exponent `ρ = −ln α / ln β`.
///
/// `ρ` is computed once at construction and stored; every module reads the
/// same bits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModelParams<T> {
    alpha: T,
    beta: T,
    rho: T,
}

impl<T: Real> ModelParams<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        check_beta(beta)?;
        let rho = -alpha.ln() / beta.ln();
        Ok(Self { alpha, beta, rho })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn rho(&self) -> T {
        self.rho
    }

    /// Weight `(1−α)αᵏ` of trap size `k` in the geometric mixture.
    pub fn trap_weight(&self, k: u32) -> T {
        (T::one() - self.alpha) * self.alpha.powi(k as i32)
    }
}

/// Validating constructor for [`ModelParams`].
pub fn make_params<T: Real>(alpha: T, beta: T) -> Result<ModelParams<T>> {
    ModelParams::new(alpha, beta)
}

pub(crate) fn check_beta<T: Real>(beta: T) -> Result<()> {
    if beta > T::one() && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("beta must be finite and > 1, got {beta}")))
    }
}

/// A moment that may diverge. Divergence is a separate variant so callers
/// must handle the heavy-tailed regimes explicitly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Moment<T> {
    Finite(T),
    Infinite,
}

impl<T: Copy> Moment<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Moment::Finite(_))
    }

    pub fn finite(&self) -> Option<T> {
        match *self {
            Moment::Finite(v) => Some(v),
            Moment::Infinite => None,
        }
    }
}

/// The walks that appear in the excursion decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum WalkKind {
    /// Walk on ℤ with drift to the right (`X` without boundaries, `Y`).
    Free,
    /// Walk on ℤ with drift to the left (`Y̌`).
    FreeReversed,
    /// Trap walk conditioned to hit `0` before `k` (the walks `U`, `V`).
    ConditionedToZero { k: u32 },
    /// Trap walk conditioned to return to `k` before hitting `0` (`X̌`).
    ConditionedToK { k: u32 },
}

impl WalkKind {
    pub fn trap_size(&self) -> Option<u32> {
        match *self {
            WalkKind::ConditionedToZero { k } | WalkKind::ConditionedToK { k } => Some(k),
            WalkKind::Free | WalkKind::FreeReversed => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.trap_size() {
            Some(0) => Err(Error::domain("conditioned walks need a trap size k >= 1")),
            _ => Ok(()),
        }
    }
}

fn overflow_checked<T: Real>(value: T, what: &str) -> Result<T> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::overflow(format!("{what} exceeds the floating-point range")))
    }
}

/// `βⁿ − 1` without cancellation: `expm1` near `βⁿ = 1`, direct above `2`.
fn pow_m1<T: Real>(beta: T, n: i64) -> T {
    let x = T::lit(n as f64) * beta.ln();
    if x > T::LN_2() {
        beta.powf(T::lit(n as f64)) - T::one()
    } else {
        x.exp_m1()
    }
}

/// `E_k[T] = 2(βᵏ − 1)/(β − 1)`, twice the total edge weight.
pub fn expected_excursion_fixed<T: Real>(beta: T, k: u32) -> Result<T> {
    check_beta(beta)?;
    let value = T::lit(2.0) * pow_m1(beta, k as i64) / (beta - T::one());
    overflow_checked(value, "E_k[T]")
}

/// Mean excursion length under the geometric mixture: `2α/(1−αβ)` when
/// `ρ > 1`, infinite otherwise.
pub fn expected_excursion<T: Real>(params: &ModelParams<T>) -> Moment<T> {
    let (a, b) = (params.alpha(), params.beta());
    if params.rho() > T::one() && a * b < T::one() {
        Moment::Finite(T::lit(2.0) * a / (T::one() - a * b))
    } else {
        Moment::Infinite
    }
}

/// Whether `E[T²]` is finite under the mixture (exactly when `ρ > 2`).
pub fn second_moment_finite<T: Real>(params: &ModelParams<T>) -> bool {
    params.rho() > T::lit(2.0)
}

/// Probability that the walk started at `0` reaches `k` before returning:
/// `(β−1)/(β − β^{1−k})`, the ratio of effective resistances.
pub fn reach_far_end_prob<T: Real>(beta: T, k: u32) -> Result<T> {
    check_beta(beta)?;
    if k == 0 {
        return Err(Error::domain("reach_far_end_prob needs k >= 1"));
    }
    let b1 = beta - T::one();
    Ok(b1 / (beta - beta.powf(T::one() - T::lit(k as f64))))
}

/// Probability that the walk started at `k` returns to `k` before hitting
/// `0`: `1 − (β−1)/(βᵏ−1)`.
pub fn return_before_zero_prob<T: Real>(beta: T, k: u32) -> Result<T> {
    check_beta(beta)?;
    if k == 0 {
        return Err(Error::domain("return_before_zero_prob needs k >= 1"));
    }
    Ok(T::one() - (beta - T::one()) / pow_m1(beta, k as i64))
}

/// Mean number of non-final excursions from `k` given that `k` is reached.
///
/// With a fixed trap this is `(βᵏ − β)/(β − 1)`; mixed over the geometric
/// trap size it is `α²β/(1−αβ)`, infinite when `αβ ≥ 1`.
pub fn excursion_count_mean<T: Real>(params: &ModelParams<T>, k: Option<u32>) -> Result<Moment<T>> {
    let beta = params.beta();
    match k {
        Some(0) => Err(Error::domain("excursion_count_mean needs k >= 1")),
        Some(k) => {
            let value = beta * pow_m1(beta, k as i64 - 1) / (beta - T::one());
            overflow_checked(value, "E_k[N|A]").map(Moment::Finite)
        }
        None => {
            let ab = params.alpha() * beta;
            if ab < T::one() {
                Ok(Moment::Finite(params.alpha() * params.alpha() * beta / (T::one() - ab)))
            } else {
                Ok(Moment::Infinite)
            }
        }
    }
}

/// Law of the return time to `0` of the left-drifting free walk `Y̌`
/// started with a forced step to `+1`.
#[derive(Clone, Copy, Debug)]
pub struct FreeWalkReturn<T> {
    beta: T,
}

impl<T: Real> FreeWalkReturn<T> {
    pub fn new(beta: T) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self { beta })
    }

    /// Right end of the domain of the moment generating function,
    /// `ln((β+1)/(2√β))`. The endpoint itself is admissible.
    pub fn radius(&self) -> T {
        ((self.beta + T::one()) / (T::lit(2.0) * self.beta.sqrt())).ln()
    }

    /// `E[e^{λT}] = ½(β + 1 − √((β+1)² − 4βe^{2λ}))`.
    pub fn mgf(&self, lambda: T) -> Result<T> {
        if lambda.is_nan() || lambda > self.radius() {
            return Err(Error::domain(format!(
                "lambda = {lambda} is beyond the radius of convergence {}",
                self.radius()
            )));
        }
        let b = self.beta;
        let bp1 = b + T::one();
        let disc = bp1 * bp1 - T::lit(4.0) * b * (T::lit(2.0) * lambda).exp();
        // At the endpoint the discriminant is zero up to rounding.
        let disc = disc.max(T::zero());
        Ok(T::lit(0.5) * (bp1 - disc.sqrt()))
    }

    /// `2β/(β−1)`.
    pub fn mean(&self) -> T {
        T::lit(2.0) * self.beta / (self.beta - T::one())
    }

    /// `4β(β+1)/(β−1)³`.
    pub fn variance(&self) -> T {
        let b = self.beta;
        T::lit(4.0) * b * (b + T::one()) / (b - T::one()).powi(3)
    }
}

/// Moment generating function of the free-walk return time at `lambda`.
pub fn free_walk_return_mgf<T: Real>(beta: T, lambda: T) -> Result<T> {
    FreeWalkReturn::new(beta)?.mgf(lambda)
}

/// Probability of a step from `l` to `l + 1` under the law of `kind`.
///
/// For the conditioned walks this is the h-transform of the trap walk:
/// * to `0`: `(1/(β+1))·(1 − (β−1)/(β^{k−l} − 1))`,
/// * to `k`: `(β/(β+1))·(β^{l+1} − 1)/(β^{l+1} − β)`,
///
/// both defined for interior sites `1 ≤ l ≤ k−1`. Free walks ignore `l`.
pub fn conditioned_up_prob<T: Real>(kind: WalkKind, beta: T, l: u32) -> Result<T> {
    check_beta(beta)?;
    kind.validate()?;
    let one = T::one();
    let log_b = beta.ln();
    match kind {
        WalkKind::Free => Ok(beta / (one + beta)),
        WalkKind::FreeReversed => Ok(one / (one + beta)),
        WalkKind::ConditionedToZero { k } | WalkKind::ConditionedToK { k } => {
            if l == 0 || l >= k {
                return Err(Error::domain(format!(
                    "site l = {l} is not interior to the trap {{0, …, {k}}}"
                )));
            }
            let p = match kind {
                WalkKind::ConditionedToZero { .. } => {
                    // h(l) = β^{−l} − β^{−k}; ratio written with m = k − l.
                    let m = T::lit((k - l) as f64);
                    (-(m - one) * log_b).exp_m1() / (-m * log_b).exp_m1() / (one + beta)
                }
                _ => {
                    // h(l) = 1 − β^{−l}
                    let l = T::lit(l as f64);
                    beta / (one + beta) * (-(l + one) * log_b).exp_m1() / (-l * log_b).exp_m1()
                }
            };
            Ok(p.max(T::zero()).min(one))
        }
    }
}
