//! Exact return-time laws for a fixed trap and the geometric mixture tail.
//!
//! The law of `T` for a fixed trap size is obtained by pushing the mass of
//! not-yet-returned paths forward one step at a time. The surviving mass is
//! summed directly instead of being recovered as `1 − CDF`, which keeps tail
//! probabilities far below `1e-12` accurate.

use std::fmt;
use std::io::{BufRead, Write};
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::model::{check_beta, ModelParams, Moment};
use crate::{Error, NeumaierSum, Real, Result};

/// Largest trap size the exact engine accepts.
pub const MAX_TRAP_SIZE: u32 = 1 << 24;

/// Forward dynamic programme for the first return time to `0`.
///
/// Generic over any ring-like scalar so the same recursion can run in exact
/// rational arithmetic.
#[derive(Clone, Debug)]
pub struct ReturnTimeDp<T> {
    k: usize,
    up: T,
    down: T,
    mass: Vec<T>,
    next: Vec<T>,
    t: usize,
}

impl<T> ReturnTimeDp<T>
where
    T: Clone + Zero + One + Add<Output = T> + Mul<Output = T>,
{
    /// Walk on `{0, …, k}` with interior step probabilities `up`, `down`.
    /// At time `0` the walker sits at `0`.
    pub fn new(k: u32, up: T, down: T) -> Self {
        let k = k as usize;
        let mut mass = vec![T::zero(); k + 1];
        mass[0] = T::one();
        Self {
            k,
            up,
            down,
            next: vec![T::zero(); k + 1],
            mass,
            t: 0,
        }
    }

    pub fn time(&self) -> usize {
        self.t
    }

    /// Mass of paths that have not yet returned, indexed by site.
    /// Index `0` only holds mass at time `0`.
    pub fn state(&self) -> &[T] {
        &self.mass
    }

    /// Advances one step and returns the mass absorbed at `0` at the new time.
    pub fn step(&mut self) -> T {
        let k = self.k;
        let mut returned = T::zero();
        if k == 0 {
            self.t += 1;
            return returned;
        }
        let hi = k.min(self.t + 1);
        for v in self.next[..=hi].iter_mut() {
            *v = T::zero();
        }
        if self.t == 0 {
            self.next[1] = self.mass[0].clone();
        } else {
            // only sites of the right parity carry mass
            let start = if self.t % 2 == 1 { 1 } else { 2 };
            let top = k.min(self.t);
            let mut l = start;
            while l <= top {
                let m = self.mass[l].clone();
                if l == k {
                    if l == 1 {
                        returned = returned + m;
                    } else {
                        self.next[l - 1] = self.next[l - 1].clone() + m;
                    }
                } else {
                    self.next[l + 1] = self.next[l + 1].clone() + self.up.clone() * m.clone();
                    let down = self.down.clone() * m;
                    if l == 1 {
                        returned = returned + down;
                    } else {
                        self.next[l - 1] = self.next[l - 1].clone() + down;
                    }
                }
                l += 2;
            }
        }
        std::mem::swap(&mut self.mass, &mut self.next);
        if self.t == 0 {
            self.mass[0] = T::zero();
        }
        self.t += 1;
        returned
    }

    /// Total not-yet-returned mass.
    pub fn surviving(&self) -> T {
        self.mass.iter().cloned().fold(T::zero(), |acc, x| acc + x)
    }
}

/// Exact law of `T` for a fixed trap, truncated at `t_max`.
#[derive(Clone, Debug)]
pub struct FixedKDistribution<T> {
    k: u32,
    beta: T,
    pmf: Vec<T>,
    survival: Vec<T>,
    remainder: T,
    survivors: Vec<T>,
}

impl<T: Real> FixedKDistribution<T> {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn t_max(&self) -> usize {
        self.pmf.len() - 1
    }

    /// `P_k[T = t]` for `t = 0 … t_max`.
    pub fn pmf(&self) -> &[T] {
        &self.pmf
    }

    /// `P_k[T > t_max]`.
    pub fn remainder(&self) -> T {
        self.remainder
    }

    /// `P_k[T > t]`; `None` beyond the horizon.
    pub fn survival(&self, t: usize) -> Option<T> {
        self.survival.get(t).copied()
    }

    /// Not-yet-returned mass per site at `t_max`.
    pub fn survivors(&self) -> &[T] {
        &self.survivors
    }
}

/// Exact law of the excursion length for trap size `k`, up to `t_max`.
pub fn fixed_k_return_distribution<T: Real>(beta: T, k: u32, t_max: usize) -> Result<FixedKDistribution<T>> {
    check_beta(beta)?;
    if t_max < 2 {
        return Err(Error::domain("t_max must be at least 2"));
    }
    if k > MAX_TRAP_SIZE {
        return Err(Error::overflow(format!(
            "trap size {k} exceeds the exact engine limit {MAX_TRAP_SIZE}"
        )));
    }
    let mut pmf = Vec::with_capacity(t_max + 1);
    let mut survival = Vec::with_capacity(t_max + 1);
    if k == 0 {
        pmf.push(T::one());
        pmf.resize(t_max + 1, T::zero());
        survival.resize(t_max + 1, T::zero());
        return Ok(FixedKDistribution {
            k,
            beta,
            pmf,
            survival,
            remainder: T::zero(),
            survivors: vec![T::zero()],
        });
    }
    let (up, down) = step_probs(beta);
    let mut dp = ReturnTimeDp::new(k, up, down);
    pmf.push(T::zero());
    survival.push(T::one());
    let mut last = T::one();
    for _ in 1..=t_max {
        pmf.push(dp.step());
        // running minimum absorbs last-bit noise of the direct sum
        last = last.min(dp.surviving());
        survival.push(last);
    }
    Ok(FixedKDistribution {
        k,
        beta,
        pmf,
        survival,
        remainder: last,
        survivors: dp.state().to_vec(),
    })
}

fn step_probs<T: Real>(beta: T) -> (T, T) {
    let up = beta / (T::one() + beta);
    (up, T::one() / (T::one() + beta))
}

/// First and second moments of the time to reach `0` from each site of the
/// trap, by first-step analysis on the down-crossing times.
///
/// Returns `(mean, second)` indexed by site `0 … k`.
pub fn hitting_time_moments<T: Real>(beta: T, k: u32) -> Result<(Vec<T>, Vec<T>)> {
    check_beta(beta)?;
    let k = k as usize;
    let (p, q) = step_probs(beta);
    let two = T::lit(2.0);
    // e[l], s[l]: first and second moment of the time to step from l to l-1
    let mut e = vec![T::zero(); k + 1];
    let mut s = vec![T::zero(); k + 1];
    if k >= 1 {
        e[k] = T::one();
        s[k] = T::one();
        for l in (1..k).rev() {
            e[l] = (T::one() + p * e[l + 1]) / q;
            s[l] = (T::one() + p * (s[l + 1] + two * e[l + 1] + two * e[l] + two * e[l + 1] * e[l])) / q;
        }
    }
    let mut mean = vec![T::zero(); k + 1];
    let mut second = vec![T::zero(); k + 1];
    let mut var = T::zero();
    for l in 1..=k {
        mean[l] = mean[l - 1] + e[l];
        var = var + (s[l] - e[l] * e[l]);
        second[l] = var + mean[l] * mean[l];
    }
    if second.iter().any(|v| !v.is_finite()) {
        return Err(Error::overflow(format!("hitting-time moments for k = {k}")));
    }
    Ok((mean, second))
}

/// A moment computed from a truncated law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentEstimate<T> {
    pub order: u32,
    /// Contribution of the resolved part of the law, `Σ_{t ≤ t_max} tᵖ P[T = t]`
    /// (an upper Riemann sum over the survival curve for tables).
    pub resolved: T,
    /// Probability mass not resolved by the horizon.
    pub unresolved_mass: T,
    /// Exact contribution of the unresolved mass when the law is known
    /// beyond the horizon.
    pub tail: Option<T>,
    /// Upper bound on the error of `resolved` as an estimate of the moment.
    pub bound: T,
}

impl<T: Real> MomentEstimate<T> {
    /// Best estimate of the full moment.
    pub fn value(&self) -> T {
        self.resolved + self.tail.unwrap_or_else(T::zero)
    }
}

pub trait TruncatedMoment<T> {
    fn truncated_moment(&self, order: u32) -> Result<MomentEstimate<T>>;
}

fn check_order(order: u32) -> Result<()> {
    if order == 1 || order == 2 {
        Ok(())
    } else {
        Err(Error::domain(format!("moment order must be 1 or 2, got {order}")))
    }
}

impl<T: Real> TruncatedMoment<T> for FixedKDistribution<T> {
    fn truncated_moment(&self, order: u32) -> Result<MomentEstimate<T>> {
        check_order(order)?;
        let resolved: NeumaierSum<T> = self
            .pmf
            .iter()
            .enumerate()
            .map(|(t, &p)| T::lit(t as f64).powi(order as i32) * p)
            .collect();
        let (mean, second) = hitting_time_moments(self.beta, self.k)?;
        let h = T::lit(self.t_max() as f64);
        let from_site = |l: usize| match order {
            1 => h + mean[l],
            _ => h * h + T::lit(2.0) * h * mean[l] + second[l],
        };
        let tail: NeumaierSum<T> = self
            .survivors
            .iter()
            .enumerate()
            .skip(1)
            .map(|(l, &v)| v * from_site(l))
            .collect();
        let worst = if self.k == 0 {
            T::zero()
        } else {
            from_site(self.k as usize)
        };
        Ok(MomentEstimate {
            order,
            resolved: resolved.value(),
            unresolved_mass: self.remainder,
            tail: Some(tail.value()),
            bound: self.remainder * worst,
        })
    }
}

/// Where the values of a [`TailTable`] come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Exact,
    Simulated,
    Asymptotic,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Exact => "exact",
            Provenance::Simulated => "simulated",
            Provenance::Asymptotic => "asymptotic",
        })
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Provenance::Exact),
            "simulated" => Ok(Provenance::Simulated),
            "asymptotic" => Ok(Provenance::Asymptotic),
            other => Err(Error::Parse(format!("unknown provenance {other:?}"))),
        }
    }
}

/// `P[T > t]` on a grid of times.
#[derive(Clone, Debug, PartialEq)]
pub struct TailTable<T> {
    t_grid: Vec<T>,
    survival: Vec<T>,
    provenance: Provenance,
    ci_halfwidth: Option<Vec<T>>,
    samples: Option<u64>,
    truncation_bound: Option<T>,
}

impl<T: Real> TailTable<T> {
    pub fn exact(t_grid: Vec<T>, survival: Vec<T>, truncation_bound: T) -> Result<Self> {
        Self {
            t_grid,
            survival,
            provenance: Provenance::Exact,
            ci_halfwidth: None,
            samples: None,
            truncation_bound: Some(truncation_bound),
        }
        .validated()
    }

    pub fn simulated(t_grid: Vec<T>, survival: Vec<T>, ci_halfwidth: Vec<T>, samples: u64) -> Result<Self> {
        Self {
            t_grid,
            survival,
            provenance: Provenance::Simulated,
            ci_halfwidth: Some(ci_halfwidth),
            samples: Some(samples),
            truncation_bound: None,
        }
        .validated()
    }

    /// `bound` is an optional relative error indicator (mode truncation).
    pub fn asymptotic(t_grid: Vec<T>, survival: Vec<T>, bound: Option<T>) -> Result<Self> {
        Self {
            t_grid,
            survival,
            provenance: Provenance::Asymptotic,
            ci_halfwidth: None,
            samples: None,
            truncation_bound: bound,
        }
        .validated()
    }

    fn validated(self) -> Result<Self> {
        let n = self.t_grid.len();
        if self.survival.len() != n {
            return Err(Error::domain("grid and survival lengths differ"));
        }
        if !self.t_grid.windows(2).all(|w| w[0] < w[1]) || self.t_grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::domain("time grid must be finite and strictly ascending"));
        }
        if self.survival.iter().any(|&s| !(s >= T::zero() && s <= T::one())) {
            return Err(Error::domain("survival values must lie in [0, 1]"));
        }
        if !self.survival.windows(2).all(|w| w[1] <= w[0]) {
            return Err(Error::domain("survival must be nonincreasing along the grid"));
        }
        if self.provenance == Provenance::Simulated {
            match &self.ci_halfwidth {
                Some(ci) if ci.len() == n && ci.iter().all(|&h| h > T::zero()) => {}
                _ => return Err(Error::domain("simulated tables need positive CI half-widths")),
            }
        }
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.t_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_grid.is_empty()
    }

    pub fn t_grid(&self) -> &[T] {
        &self.t_grid
    }

    pub fn survival(&self) -> &[T] {
        &self.survival
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn ci_halfwidth(&self) -> Option<&[T]> {
        self.ci_halfwidth.as_deref()
    }

    /// Number of simulated excursions behind a simulated table.
    pub fn samples(&self) -> Option<u64> {
        self.samples
    }

    pub fn truncation_bound(&self) -> Option<T> {
        self.truncation_bound
    }

    /// Value written to the `bound` column of row `i`.
    fn bound_column(&self, i: usize) -> Option<T> {
        match self.provenance {
            Provenance::Simulated => self.ci_halfwidth.as_ref().map(|c| c[i]),
            _ => self.truncation_bound,
        }
    }

    /// Writes `t,survival,provenance,bound` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,survival,provenance,bound")?;
        for i in 0..self.len() {
            let bound = self
                .bound_column(i)
                .map(|b| fmt17(b.to_f64().unwrap_or(f64::NAN)))
                .unwrap_or_default();
            writeln!(
                out,
                "{},{},{},{}",
                fmt17(self.t_grid[i].to_f64().unwrap_or(f64::NAN)),
                fmt17(self.survival[i].to_f64().unwrap_or(f64::NAN)),
                self.provenance,
                bound
            )?;
        }
        Ok(())
    }
}

impl TailTable<f64> {
    /// Reads a table written by [`TailTable::write_csv`].
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().transpose()?.unwrap_or_default();
        if header.trim() != "t,survival,provenance,bound" {
            return Err(Error::EmptyInput("missing tail table header".into()));
        }
        let (mut t, mut s, mut b) = (Vec::new(), Vec::new(), Vec::new());
        let mut provenance = None;
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(Error::Parse(format!("bad tail table row {line:?}")));
            }
            let num = |x: &str| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad number {x:?}")))
            };
            t.push(num(cols[0])?);
            s.push(num(cols[1])?);
            let p: Provenance = cols[2].trim().parse()?;
            if provenance.is_some_and(|q| q != p) {
                return Err(Error::Parse("mixed provenance in one table".into()));
            }
            provenance = Some(p);
            b.push(if cols[3].trim().is_empty() {
                None
            } else {
                Some(num(cols[3])?)
            });
        }
        let provenance = provenance.ok_or_else(|| Error::EmptyInput("tail table has no rows".into()))?;
        match provenance {
            Provenance::Simulated => {
                let hw = b
                    .into_iter()
                    .collect::<Option<Vec<f64>>>()
                    .ok_or_else(|| Error::Parse("simulated rows need a bound".into()))?;
                let mut table = TailTable::simulated(t, s, hw, 0)?;
                table.samples = None;
                Ok(table)
            }
            Provenance::Exact => {
                let bound = b.first().copied().flatten().unwrap_or(0.0);
                TailTable::exact(t, s, bound)
            }
            Provenance::Asymptotic => TailTable::asymptotic(t, s, b.first().copied().flatten()),
        }
    }
}

/// Seventeen significant digits, enough to round-trip an `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

impl<T: Real> TruncatedMoment<T> for TailTable<T> {
    /// Abel summation `Σ (t_{i+1}ᵖ − t_iᵖ)·P[T > t_i]` over the grid, which
    /// must start at `0`. Exact for integer grids; `bound` is the gap to the
    /// lower Riemann sum.
    fn truncated_moment(&self, order: u32) -> Result<MomentEstimate<T>> {
        check_order(order)?;
        if self.t_grid.first() != Some(&T::zero()) {
            return Err(Error::domain("moment from a tail table needs a grid starting at 0"));
        }
        let p = order as i32;
        let mut upper = NeumaierSum::new();
        let mut lower = NeumaierSum::new();
        for i in 0..self.len() - 1 {
            let w = self.t_grid[i + 1].powi(p) - self.t_grid[i].powi(p);
            upper.add(w * self.survival[i]);
            lower.add(w * self.survival[i + 1]);
        }
        Ok(MomentEstimate {
            order,
            resolved: upper.value(),
            unresolved_mass: *self.survival.last().expect("nonempty"),
            tail: None,
            bound: upper.value() - lower.value(),
        })
    }
}

/// Number of trap sizes kept so that the omitted mixture mass `α^{k_max+1}`
/// is at most `eps`.
pub fn trap_cutoff<T: Real>(alpha: T, eps: T) -> Result<u32> {
    if !(eps > T::zero()) {
        return Err(Error::domain("truncation tolerance must be positive"));
    }
    let k = (eps.ln() / alpha.ln()).ceil();
    let k = k.max(T::zero());
    k.to_u32()
        .filter(|&k| k <= MAX_TRAP_SIZE)
        .ok_or_else(|| Error::overflow(format!("trap cutoff for eps = {eps} is too large")))
}

/// `P[T > t]` under the geometric mixture, on an ascending grid.
///
/// Trap sizes are processed in parallel and reduced in ascending order with
/// compensated summation, so the result does not depend on the thread count.
pub fn mixture_tail<T: Real>(params: &ModelParams<T>, t_grid: &[T], eps: T) -> Result<TailTable<T>> {
    if t_grid.is_empty() {
        return Err(Error::EmptyInput("empty time grid".into()));
    }
    if !t_grid.windows(2).all(|w| w[0] < w[1]) || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::domain("time grid must be finite and strictly ascending"));
    }
    let k_max = trap_cutoff(params.alpha(), eps)?;
    let bound = params.alpha().powi(k_max as i32 + 1);
    // floor(t) for t >= 0; negative times are "before the start"
    let floors: Vec<Option<usize>> = t_grid
        .iter()
        .map(|&t| if t < T::zero() { None } else { t.floor().to_usize() })
        .collect();
    let horizon = floors.iter().flatten().copied().max().unwrap_or(0);
    let (up, down) = step_probs(params.beta());

    let per_k: Vec<Vec<T>> = (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let mut dp = ReturnTimeDp::new(k, up, down);
            let mut out = vec![T::one(); t_grid.len()];
            let mut idx = 0;
            while idx < floors.len() && floors[idx].is_none() {
                idx += 1;
            }
            let mut surviving = T::one();
            for t in 0..=horizon {
                if t > 0 {
                    dp.step();
                    surviving = surviving.min(dp.surviving());
                }
                while idx < floors.len() && floors[idx] == Some(t) {
                    out[idx] = surviving;
                    idx += 1;
                }
            }
            out
        })
        .collect();

    let weight0 = params.trap_weight(0);
    let mut survival = Vec::with_capacity(t_grid.len());
    let mut prev = T::one();
    for (i, fl) in floors.iter().enumerate() {
        let mut acc = NeumaierSum::new();
        if fl.is_none() {
            acc.add(weight0);
        }
        for (j, col) in per_k.iter().enumerate() {
            acc.add(params.trap_weight(j as u32 + 1) * col[i]);
        }
        let s = acc.value().max(T::zero()).min(prev);
        survival.push(s);
        prev = s;
    }
    TailTable::exact(t_grid.to_vec(), survival, bound)
}

/// Mean excursion length under the mixture from exact truncated laws.
///
/// Each trap size contributes its resolved mean plus the exact contribution
/// of its unresolved mass; trap sizes beyond the cutoff are bounded through
/// `E_k[T] ≤ 2βᵏ/(β−1)`. Infinite when `αβ ≥ 1`.
pub fn mixture_moment<T: Real>(params: &ModelParams<T>, t_max: usize, eps: T) -> Result<Moment<MomentEstimate<T>>> {
    let (a, b) = (params.alpha(), params.beta());
    let ab = a * b;
    if !(ab < T::one()) {
        return Ok(Moment::Infinite);
    }
    // (αβ)^{K+1} <= eps
    let k_max = trap_cutoff(ab, eps)?;
    let per_k: Vec<MomentEstimate<T>> = (1..=k_max)
        .into_par_iter()
        .map(|k| fixed_k_return_distribution(b, k, t_max)?.truncated_moment(1))
        .collect::<Result<_>>()?;
    let mut resolved = NeumaierSum::new();
    let mut tail = NeumaierSum::new();
    let mut bound = NeumaierSum::new();
    let mut mass = NeumaierSum::new();
    for (j, m) in per_k.iter().enumerate() {
        let w = params.trap_weight(j as u32 + 1);
        resolved.add(w * m.resolved);
        tail.add(w * m.tail.unwrap_or_else(T::zero));
        bound.add(w * m.bound);
        mass.add(w * m.unresolved_mass);
    }
    let two = T::lit(2.0);
    let cutoff_bound = two * (T::one() - a) * ab.powi(k_max as i32 + 1) / ((b - T::one()) * (T::one() - ab));
    bound.add(cutoff_bound);
    mass.add(a.powi(k_max as i32 + 1));
    Ok(Moment::Finite(MomentEstimate {
        order: 1,
        resolved: resolved.value(),
        unresolved_mass: mass.value(),
        tail: Some(tail.value()),
        bound: bound.value(),
    }))
}
