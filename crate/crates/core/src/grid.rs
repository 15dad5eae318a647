//! Logarithmic time grids, `log:<t_min>:<t_max>:<points-per-β-period>`.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Real, Result};

/// Points per multiplicative `β`-period used when none is given.
pub const DEFAULT_POINTS_PER_PERIOD: u32 = 32;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_period: u32,
}

impl GridSpec {
    pub fn new(t_min: f64, t_max: f64, points_per_period: u32) -> Result<Self> {
        if !(t_min >= 1.0 && t_min.is_finite()) {
            return Err(Error::domain(format!("grid t_min must be >= 1, got {t_min}")));
        }
        if !(t_max > t_min && t_max.is_finite()) {
            return Err(Error::domain(format!("grid t_max must exceed t_min, got {t_max}")));
        }
        if points_per_period == 0 {
            return Err(Error::domain("grid needs at least one point per period"));
        }
        Ok(Self {
            t_min,
            t_max,
            points_per_period,
        })
    }

    /// Grid points `t_min·β^{i/m}` up to `t_max` inclusive.
    pub fn points<T: Real>(&self, beta: T) -> Vec<T> {
        log_grid(T::lit(self.t_min), T::lit(self.t_max), beta, self.points_per_period)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        if parts.len() != 4 || parts[0] != "log" {
            return Err(Error::Parse(format!(
                "grid must look like log:<t_min>:<t_max>:<points-per-period>, got {s:?}"
            )));
        }
        let num = |x: &str| {
            x.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad grid number {x:?}")))
        };
        let m = parts[3]
            .parse::<u32>()
            .map_err(|_| Error::Parse(format!("bad points-per-period {:?}", parts[3])))?;
        GridSpec::new(num(parts[1])?, num(parts[2])?, m)
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "log:{}:{}:{}", self.t_min, self.t_max, self.points_per_period)
    }
}

/// Logarithmic grid with `per_period` points per factor `beta`.
pub fn log_grid<T: Real>(t_min: T, t_max: T, beta: T, per_period: u32) -> Vec<T> {
    let step = beta.ln() / T::lit(per_period as f64);
    let slack = T::one() + T::lit(1e-12);
    let mut out = Vec::new();
    let mut i = 0u32;
    loop {
        let t = t_min * (T::lit(i as f64) * step).exp();
        if t * slack >= t_max {
            if t <= t_max * slack {
                out.push(t_max);
            }
            break;
        }
        out.push(t);
        i += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_generates() {
        let g: GridSpec = "log:1:1e5:32".parse().unwrap();
        assert_eq!(g.t_min, 1.0);
        assert_eq!(g.t_max, 1e5);
        let pts = g.points(2.0f64);
        assert_eq!(pts[0], 1.0);
        assert!((pts[32] - 2.0).abs() < 1e-12);
        assert!(*pts.last().unwrap() <= 1e5);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g.to_string().parse::<GridSpec>().unwrap(), g);
    }

    #[test]
    fn includes_endpoint_on_exact_period() {
        let pts = log_grid(1.0f64, 16.0, 2.0, 4);
        assert_eq!(pts.len(), 17);
        assert_eq!(*pts.last().unwrap(), 16.0);
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in [
            "lin:1:10:3",
            "log:0.5:10:3",
            "log:10:10:3",
            "log:1:10:0",
            "log:1:x:3",
            "log:1:10",
        ] {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
    }
}
