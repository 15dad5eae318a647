//! Interval estimates and goodness-of-fit helpers for simulation output.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Wilson score interval for `successes` out of `n` at normal quantile `z`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::EmptyInput("Wilson interval with zero trials".into()));
    }
    if successes > n {
        return Err(Error::domain("more successes than trials"));
    }
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let centre = (p + z2 / (2.0 * n_f)) / denom;
    let half = z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    Ok(((centre - half).max(0.0), (centre + half).min(1.0)))
}

/// A point estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    pub count: u64,
}

impl Estimate {
    /// Interval `value ± z·se`.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        (self.value - z * self.se, self.value + z * self.se)
    }

    pub fn covers(&self, x: f64, z: f64) -> bool {
        let (lo, hi) = self.interval(z);
        lo <= x && x <= hi
    }
}

/// Running first four central-moment sums (Welford/Pébay update).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let term1 = delta * dn * n1;
        self.mean += dn;
        self.m4 += term1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += term1 * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += term1;
    }

    /// Combines two summaries as if their samples were pushed in sequence.
    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d2 = delta * delta;
        let d3 = d2 * delta;
        let d4 = d2 * d2;
        let mean = self.mean + delta * nb / n;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 =
            self.m3 + other.m3 + d3 * na * nb * (na - nb) / (n * n) + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        Moments {
            n: self.n + other.n,
            mean,
            m2,
            m3,
            m4,
        }
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        self.m2 / (self.n as f64 - 1.0)
    }

    pub fn mean_estimate(&self) -> Estimate {
        Estimate {
            value: self.mean,
            se: (self.variance() / self.n as f64).sqrt(),
            count: self.n,
        }
    }

    /// Sample variance with a large-sample standard error from the fourth
    /// central moment.
    pub fn variance_estimate(&self) -> Estimate {
        let n = self.n as f64;
        let var = self.variance();
        let mu4 = self.m4 / n;
        let mu2 = self.m2 / n;
        let se = ((mu4 - mu2 * mu2).max(0.0) / n).sqrt();
        Estimate {
            value: var,
            se,
            count: self.n,
        }
    }
}

/// Pearson goodness of fit of observed counts against expected probabilities.
/// Cells with expected count below `min_expected` are pooled into their
/// neighbour. Returns `(statistic, degrees of freedom, p-value)`.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], min_expected: f64) -> Result<(f64, usize, f64)> {
    if observed.len() != probs.len() {
        return Err(Error::domain("observed and expected cells differ in length"));
    }
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(Error::EmptyInput("no observations".into()));
    }
    let n_f = n as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        o_acc += o as f64;
        e_acc += p * n_f;
        if e_acc >= min_expected {
            cells.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o_acc;
                last.1 += e_acc;
            }
            None => cells.push((o_acc, e_acc)),
        }
    }
    if cells.len() < 2 {
        return Err(Error::domain("fewer than two cells after pooling"));
    }
    let stat: f64 = cells.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::domain(e.to_string()))?;
    Ok((stat, dof, 1.0 - dist.cdf(stat)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_known_value() {
        let (lo, hi) = wilson_interval(50, 100, Z95).unwrap();
        assert!((lo - 0.4038315303659956).abs() < 1e-12);
        assert!((hi - 0.5961684696340044).abs() < 1e-12);
        let (lo, hi) = wilson_interval(0, 10, Z95).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.35);
        assert!(wilson_interval(1, 0, Z95).is_err());
    }

    #[test]
    fn moments_match_direct_formulas_and_merge() {
        let xs: Vec<f64> = (0..50).map(|i| ((i * 37) % 11) as f64 + 0.5 * i as f64).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let mean = xs.iter().sum::<f64>() / 50.0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 49.0;
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>();
        assert!((all.mean() - mean).abs() < 1e-12);
        assert!((all.variance() - var).abs() < 1e-9);
        assert!((all.m4 - m4).abs() < 1e-6 * m4);
        let (mut a, mut b) = (Moments::default(), Moments::default());
        xs[..17].iter().for_each(|&x| a.push(x));
        xs[17..].iter().for_each(|&x| b.push(x));
        let m = a.merge(&b);
        assert_eq!(m.count(), 50);
        assert!((m.mean() - mean).abs() < 1e-12);
        assert!((m.variance() - var).abs() < 1e-9);
        assert!((m.m3 - all.m3).abs() < 1e-6 * all.m3.abs().max(1.0));
        assert!((m.m4 - m4).abs() < 1e-6 * m4);
    }

    #[test]
    fn chi_square_perfect_fit() {
        let (stat, dof, p) = chi_square_gof(&[25, 25, 50], &[0.25, 0.25, 0.5], 5.0).unwrap();
        assert_eq!(stat, 0.0);
        assert_eq!(dof, 2);
        assert!((p - 1.0).abs() < 1e-12);
        let (_, _, p) = chi_square_gof(&[90, 10], &[0.5, 0.5], 5.0).unwrap();
        assert!(p < 1e-10);
    }
}
