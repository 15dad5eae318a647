//! Named numerical checks tying the exact, simulated and asymptotic sides
//! together, and the JSON report that collects them.

use serde::Serialize;

use crate::asympt::{f_series, oscillation_spectrum, sandwich_constants, OscillationSpectrum};
use crate::exact::mixture_tail;
use crate::grid::{log_grid, GridSpec};
use crate::model::ModelParams;
use crate::sim::{fold_samples, SimConfig};
use crate::stats::{wilson_interval, Z95};
use crate::{Error, Result};

/// Version of the report layout.
pub const REPORT_SCHEMA: u32 = 1;

/// Constant in the `c·ln t` threshold of the decomposition check.
pub const DECOMPOSITION_C: f64 = 20.0;

/// Outcome of one check. A check passes when `observed ≤ tolerance`;
/// `observed` is a deviation or violation size and `expected` its ideal value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub note: String,
}

impl Check {
    fn new(name: &str, observed: f64, tolerance: f64, note: String) -> Self {
        Self {
            name: name.to_string(),
            pass: observed <= tolerance,
            observed,
            expected: 0.0,
            tolerance,
            note,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParamsRecord {
    pub alpha: f64,
    pub beta: f64,
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub params: ParamsRecord,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn failing(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub grid: GridSpec,
    pub eps: f64,
    pub modes: usize,
    pub sim: SimConfig,
    /// Negates every oscillation phase before checking (negative control).
    pub corrupt_phase: bool,
}

impl VerifyOptions {
    pub fn new(sim: SimConfig) -> Self {
        Self {
            grid: GridSpec::new(1e3, 1e5, 32).expect("valid default grid"),
            eps: 1e-12,
            modes: 10,
            sim,
            corrupt_phase: false,
        }
    }
}

/// (a) `t^ρ P[T>t] / g((β−1)²t/(2β))` from the exact mixture tail stays
/// within 10% of one on the top decade of the grid.
pub fn check_theorem_ratio(
    params: &ModelParams<f64>,
    spectrum: &OscillationSpectrum<f64>,
    grid: &GridSpec,
    eps: f64,
) -> Result<Check> {
    let points: Vec<f64> = grid
        .points(params.beta())
        .into_iter()
        .filter(|&t| t >= grid.t_max / 10.0)
        .collect();
    let tail = mixture_tail(params, &points, eps)?;
    let mut worst: f64 = 0.0;
    let mut at = points[0];
    for (&t, &s) in points.iter().zip(tail.survival()) {
        let dev = (spectrum.theorem_ratio(t, s)? - 1.0).abs();
        if dev > worst {
            worst = dev;
            at = t;
        }
    }
    Ok(Check::new(
        "theorem_ratio",
        worst,
        0.10,
        format!(
            "max |ratio - 1| over t in [{:e}, {:e}] ({} points), attained at t = {at:.6e}",
            grid.t_max / 10.0,
            grid.t_max,
            points.len()
        ),
    ))
}

/// (b) Harmonic sum against its oscillating power-law form on `[10³, 10⁶]`.
pub fn check_series_vs_asymptotic(params: &ModelParams<f64>, spectrum: &OscillationSpectrum<f64>) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for t in log_grid(1e3, 1e6, params.beta(), 32) {
        let series = f_series(params, t, 1e-16)?.value;
        worst = worst.max((series / spectrum.f_asymptotic(t)? - 1.0).abs());
    }
    Ok(Check::new(
        "series_vs_asymptotic",
        worst,
        1e-6,
        "max |f_series / f_asymptotic - 1| for t in [1e3, 1e6]".into(),
    ))
}

/// (c) `C₁ ≤ t^ρ f(t) ≤ C₂` on `[10, 10⁶]`; observed is the largest violation.
pub fn check_sandwich(params: &ModelParams<f64>) -> Result<Check> {
    let (c1, c2) = sandwich_constants(params);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in log_grid(10.0, 1e6, params.beta(), 32) {
        let h = t.powf(params.rho()) * f_series(params, t, 1e-16)?.value;
        lo = lo.min(h);
        hi = hi.max(h);
    }
    let violation = (c1 - lo).max(hi - c2).max(0.0);
    Ok(Check::new(
        "sandwich",
        violation,
        0.0,
        format!("t^rho f(t) in [{lo:.6e}, {hi:.6e}] against C1 = {c1:.6e}, C2 = {c2:.6e}"),
    ))
}

/// Range `max − min` of `t^ρ f(t)` over one `β`-period starting at `t0`.
pub fn oscillation_range(params: &ModelParams<f64>, t0: f64, points: u32) -> Result<f64> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for t in log_grid(t0, t0 * params.beta(), params.beta(), points) {
        let h = t.powf(params.rho()) * f_series(params, t, 1e-16)?.value;
        lo = lo.min(h);
        hi = hi.max(h);
    }
    Ok(hi - lo)
}

/// (d) Peak-to-peak oscillation of `t^ρ f(t)` near `t = 10⁶` against the
/// first-mode prediction `2c₁(1−α)Γ(ρ)/ln β`.
pub fn check_oscillation(params: &ModelParams<f64>, spectrum: &OscillationSpectrum<f64>) -> Result<Check> {
    let mode = spectrum
        .modes()
        .first()
        .ok_or_else(|| Error::domain("oscillation check needs at least one mode"))?;
    let range = oscillation_range(params, 1e6, 512)?;
    let predicted = 2.0 * mode.c * spectrum.f_scale();
    Ok(Check::new(
        "oscillation_amplitude",
        (range / predicted - 1.0).abs(),
        0.05,
        format!("peak-to-peak {range:.6e}, first-mode prediction {predicted:.6e}"),
    ))
}

struct SimTallies {
    n_hist: Vec<u64>,
    long: u64,
    slow_in: u64,
    slow_out: u64,
}

/// Simulation-based checks (e) and (f) from one run.
pub fn simulated_checks(params: &ModelParams<f64>, sim: &SimConfig) -> Result<(Check, Check)> {
    let beta = params.beta();
    let n_grid = log_grid(100.0, 1e4, beta, 32);
    let t_long = 1e4f64;
    let threshold = DECOMPOSITION_C * t_long.ln();
    let m = n_grid.len();
    let tallies = fold_samples(
        params,
        sim,
        || SimTallies {
            n_hist: vec![0; m + 1],
            long: 0,
            slow_in: 0,
            slow_out: 0,
        },
        |acc, s| {
            acc.n_hist[n_grid.partition_point(|&t| t < s.n as f64)] += 1;
            if s.length as f64 > t_long {
                acc.long += 1;
            }
            if s.reached_far_end && s.t_in as f64 > threshold {
                acc.slow_in += 1;
            }
            if s.reached_far_end && s.t_out as f64 > threshold {
                acc.slow_out += 1;
            }
        },
        |mut a, b| {
            a.n_hist.iter_mut().zip(b.n_hist).for_each(|(x, y)| *x += y);
            a.long += b.long;
            a.slow_in += b.slow_in;
            a.slow_out += b.slow_out;
            a
        },
    )?;
    let n = sim.n_samples;

    // (e)
    let mut above = 0u64;
    let mut worst: f64 = 0.0;
    let mut covered = 0usize;
    for j in (0..m).rev() {
        above += tallies.n_hist[j + 1];
        let scale = beta / (beta - 1.0) / f_series(params, (beta - 1.0) * n_grid[j], 1e-16)?.value;
        let (lo, hi) = wilson_interval(above, n, Z95)?;
        let (lo, hi) = (lo * scale, hi * scale);
        let gap = (lo - 1.0).max(1.0 - hi).max(0.0);
        if gap == 0.0 {
            covered += 1;
        }
        worst = worst.max(gap);
    }
    let n_tail = Check::new(
        "n_tail_reduction",
        worst,
        0.05,
        format!(
            "largest distance from 1 to the 95% band of P[N>t]·β/(β−1)/f((β−1)t) on t in [1e2, 1e4]; \
             band contains 1 at {covered} of {m} points; {n} samples"
        ),
    );

    // (f)
    let decomposition = if tallies.long == 0 {
        Check {
            name: "decomposition_negligible".into(),
            pass: false,
            observed: f64::NAN,
            expected: 0.0,
            tolerance: 0.05,
            note: format!("no excursion longer than {t_long:e} among {n} samples"),
        }
    } else {
        let worst = tallies.slow_in.max(tallies.slow_out) as f64 / tallies.long as f64;
        Check::new(
            "decomposition_negligible",
            worst,
            0.05,
            format!(
                "max(P[T_in > c ln t, A], P[T_out > c ln t, A]) / P[T > t] at t = {t_long:e}, c = {DECOMPOSITION_C}; \
                 counts {} and {} against {}",
                tallies.slow_in, tallies.slow_out, tallies.long
            ),
        )
    };
    Ok((n_tail, decomposition))
}

/// Runs all checks.
pub fn run_verify(params: &ModelParams<f64>, opts: &VerifyOptions) -> Result<VerificationReport> {
    let mut spectrum = oscillation_spectrum(params, opts.modes)?;
    if opts.corrupt_phase {
        spectrum = spectrum.with_negated_phases();
    }
    let mut checks = vec![
        check_theorem_ratio(params, &spectrum, &opts.grid, opts.eps)?,
        check_series_vs_asymptotic(params, &spectrum)?,
        check_sandwich(params)?,
        check_oscillation(params, &spectrum)?,
    ];
    let (e, f) = simulated_checks(params, &opts.sim)?;
    checks.push(e);
    checks.push(f);
    Ok(VerificationReport {
        schema: REPORT_SCHEMA,
        params: ParamsRecord {
            alpha: params.alpha(),
            beta: params.beta(),
            rho: params.rho(),
        },
        pass: checks.iter().all(|c| c.pass),
        checks,
    })
}
