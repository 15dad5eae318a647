//! Seeded Monte Carlo for excursions and the conditioned walks.
//!
//! Sample `i` draws from its own ChaCha8 stream `(seed, i)`, and work is
//! split into fixed chunks that are merged in index order, so results do not
//! depend on the number of worker threads.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::model::{check_beta, conditioned_up_prob, ModelParams, WalkKind};
use crate::stats::{wilson_interval, Estimate, Moments, Z95};
use crate::{Error, Result, TailTable};

/// Default cap on the number of steps of a single excursion.
pub const DEFAULT_STEP_CAP: u64 = 1_000_000_000;

/// Samples per unit of parallel work.
const CHUNK: u64 = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SimConfig {
    pub n_samples: u64,
    pub seed: u64,
    pub workers: usize,
    /// Use this trap size for every sample instead of drawing it.
    pub fixed_k: Option<u32>,
    pub step_cap: u64,
}

impl SimConfig {
    pub fn new(n_samples: u64, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            workers: 1,
            fixed_k: None,
            step_cap: DEFAULT_STEP_CAP,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_fixed_k(mut self, k: Option<u32>) -> Self {
        self.fixed_k = k;
        self
    }

    pub fn with_step_cap(mut self, cap: u64) -> Self {
        self.step_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::domain("n_samples must be at least 1"));
        }
        if self.workers == 0 {
            return Err(Error::domain("workers must be at least 1"));
        }
        if self.step_cap == 0 {
            return Err(Error::domain("step cap must be positive"));
        }
        Ok(())
    }

    fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

/// One excursion from `0` and its decomposition. Fields other than `k` and
/// `length` are zero when the walk returns before reaching `k`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ExcursionSample {
    pub k: u32,
    pub reached_far_end: bool,
    pub length: u64,
    pub t_in: u64,
    pub t_exc: u64,
    pub t_out: u64,
    /// Number of non-final excursions from `k`.
    pub n: u64,
    /// Sum of squared lengths of the non-final excursions from `k`.
    pub t_exc_sq: u64,
}

/// Probability `p` as a threshold on a uniform `u64`.
fn threshold(p: f64) -> u64 {
    if p >= 1.0 {
        u64::MAX
    } else if p <= 0.0 {
        0
    } else {
        (p * 18_446_744_073_709_551_616.0) as u64
    }
}

fn geometric_k(rng: &mut ChaCha8Rng, alpha: f64) -> u32 {
    // U in (0, 1]; P[k >= j] = P[U <= αʲ] = αʲ
    let u = 1.0 - rng.random::<f64>();
    let k = (u.ln() / alpha.ln()).floor();
    if k >= u32::MAX as f64 {
        u32::MAX
    } else {
        k as u32
    }
}

fn cap_error(cap: u64, index: u64) -> Error {
    Error::IterationLimit { cap, index }
}

/// Simulates excursion `index` of the run described by `config`.
pub fn sample_excursion(params: &ModelParams<f64>, config: &SimConfig, index: u64) -> Result<ExcursionSample> {
    let mut rng = config.rng(index);
    let k = match config.fixed_k {
        Some(k) => k,
        None => geometric_k(&mut rng, params.alpha()),
    };
    run_excursion(
        k,
        threshold(params.beta() / (1.0 + params.beta())),
        &mut rng,
        config.step_cap,
        index,
    )
}

fn run_excursion(k: u32, up: u64, rng: &mut ChaCha8Rng, cap: u64, index: u64) -> Result<ExcursionSample> {
    let mut s = ExcursionSample {
        k,
        ..Default::default()
    };
    if k == 0 {
        return Ok(s);
    }
    // approach: forced step to 1, then run until 0 or k
    let mut pos = 1u32;
    let mut t = 1u64;
    while pos != 0 && pos != k {
        pos = if rng.next_u64() < up { pos + 1 } else { pos - 1 };
        t += 1;
        if t > cap {
            return Err(cap_error(cap, index));
        }
    }
    if pos == 0 {
        s.length = t;
        return Ok(s);
    }
    s.reached_far_end = true;
    s.t_in = t;
    // excursions from k: forced step down, then run until k or 0
    loop {
        let mut len = 1u64;
        pos = k - 1;
        while pos != 0 && pos != k {
            pos = if rng.next_u64() < up { pos + 1 } else { pos - 1 };
            len += 1;
            if t + len > cap {
                return Err(cap_error(cap, index));
            }
        }
        t += len;
        if pos == 0 {
            s.t_out = len;
            s.length = t;
            return Ok(s);
        }
        s.n += 1;
        s.t_exc += len;
        s.t_exc_sq = s.t_exc_sq.saturating_add(len * len);
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))
}

/// Folds over all samples of a run: every chunk of consecutive indices is
/// folded sequentially, then chunk results are merged in index order.
pub fn fold_samples<A, I, F, M>(params: &ModelParams<f64>, config: &SimConfig, init: I, fold: F, merge: M) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, &ExcursionSample) + Sync,
    M: Fn(A, A) -> A,
{
    fold_indexed(
        config,
        init,
        |acc, i| {
            let s = sample_excursion(params, config, i)?;
            fold(acc, &s);
            Ok(())
        },
        merge,
    )
}

fn fold_indexed<A, I, F, M>(config: &SimConfig, init: I, fold: F, merge: M) -> Result<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, u64) -> Result<()> + Sync,
    M: Fn(A, A) -> A,
{
    config.validate()?;
    let n = config.n_samples;
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<A> = pool(config.workers)?.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = init();
                for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                    fold(&mut acc, i)?;
                }
                Ok(acc)
            })
            .collect::<Result<Vec<A>>>()
    })?;
    Ok(parts.into_iter().fold(init(), merge))
}

/// All samples of a run, in index order.
pub fn simulate(params: &ModelParams<f64>, config: &SimConfig) -> Result<Vec<ExcursionSample>> {
    fold_samples(
        params,
        config,
        Vec::new,
        |v: &mut Vec<ExcursionSample>, s| v.push(*s),
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    )
}

/// Which per-sample quantity a tail is estimated for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TailStatistic {
    /// Excursion length `T`.
    Length,
    /// Number `N` of non-final excursions from `k`.
    ExcursionCount,
}

impl TailStatistic {
    fn of(self, s: &ExcursionSample) -> u64 {
        match self {
            TailStatistic::Length => s.length,
            TailStatistic::ExcursionCount => s.n,
        }
    }
}

/// Number of samples whose statistic exceeds each grid point.
pub fn tail_counts(
    params: &ModelParams<f64>,
    t_grid: &[f64],
    config: &SimConfig,
    stat: TailStatistic,
) -> Result<Vec<u64>> {
    if t_grid.is_empty() {
        return Err(Error::EmptyInput("empty time grid".into()));
    }
    if !t_grid.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::domain("time grid must be strictly ascending"));
    }
    let m = t_grid.len();
    // hist[j]: samples exceeding exactly the first j grid points
    let hist = fold_samples(
        params,
        config,
        || vec![0u64; m + 1],
        |h, s| {
            let v = stat.of(s) as f64;
            h[t_grid.partition_point(|&t| t < v)] += 1;
        },
        |mut a, b| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
            a
        },
    )?;
    let mut out = vec![0u64; m];
    let mut acc = 0u64;
    for j in (0..m).rev() {
        acc += hist[j + 1];
        out[j] = acc;
    }
    Ok(out)
}

/// Empirical `P[T > t]` with 95% Wilson half-widths.
pub fn estimate_tail(params: &ModelParams<f64>, t_grid: &[f64], config: &SimConfig) -> Result<TailTable> {
    estimate_tail_of(params, t_grid, config, TailStatistic::Length)
}

/// Empirical tail of `stat` with 95% Wilson half-widths.
pub fn estimate_tail_of(
    params: &ModelParams<f64>,
    t_grid: &[f64],
    config: &SimConfig,
    stat: TailStatistic,
) -> Result<TailTable> {
    let counts = tail_counts(params, t_grid, config, stat)?;
    let n = config.n_samples;
    let survival = counts.iter().map(|&c| c as f64 / n as f64).collect();
    let halfwidth = counts
        .iter()
        .map(|&c| wilson_interval(c, n, Z95).map(|(lo, hi)| 0.5 * (hi - lo)))
        .collect::<Result<Vec<f64>>>()?;
    TailTable::simulated(t_grid.to_vec(), survival, halfwidth, n)
}

/// Duration of one run of the walk `kind`, drawn from stream `index`.
///
/// * conditioned to `k`: start at `k`, forced step down, until `k` again;
/// * conditioned to `0`: start at `k`, forced step down, until `0`;
/// * free walks: start at `0`, forced step against the drift, until `0`.
pub fn sample_conditioned_return(kind: WalkKind, beta: f64, config: &SimConfig, index: u64) -> Result<u64> {
    conditioned_sampler(kind, beta)?.sample(config, index)
}

/// Precomputed step thresholds for a walk kind.
#[derive(Clone, Debug)]
pub struct ConditionedSampler {
    kind: WalkKind,
    /// `up[l]`: threshold for a step from `l` to `l + 1`.
    up: Vec<u64>,
    free_up: u64,
}

pub fn conditioned_sampler(kind: WalkKind, beta: f64) -> Result<ConditionedSampler> {
    check_beta(beta)?;
    kind.validate()?;
    let mut up = Vec::new();
    let mut free_up = 0;
    match kind {
        WalkKind::ConditionedToK { k } | WalkKind::ConditionedToZero { k } => {
            if matches!(kind, WalkKind::ConditionedToK { .. }) && k < 2 {
                return Err(Error::domain("the walk conditioned to k needs k >= 2"));
            }
            up.push(0);
            for l in 1..k {
                up.push(threshold(conditioned_up_prob(kind, beta, l)?));
            }
        }
        WalkKind::Free | WalkKind::FreeReversed => {
            free_up = threshold(conditioned_up_prob(kind, beta, 0)?);
        }
    }
    Ok(ConditionedSampler { kind, up, free_up })
}

impl ConditionedSampler {
    pub fn kind(&self) -> WalkKind {
        self.kind
    }

    pub fn sample(&self, config: &SimConfig, index: u64) -> Result<u64> {
        let mut rng = config.rng(index);
        let cap = config.step_cap;
        let mut t = 1u64;
        match self.kind {
            WalkKind::ConditionedToK { k } | WalkKind::ConditionedToZero { k } => {
                let target = if matches!(self.kind, WalkKind::ConditionedToK { .. }) {
                    k
                } else {
                    0
                };
                let mut pos = k - 1;
                while pos != target {
                    pos = if rng.next_u64() < self.up[pos as usize] {
                        pos + 1
                    } else {
                        pos - 1
                    };
                    t += 1;
                    if t > cap {
                        return Err(cap_error(cap, index));
                    }
                }
            }
            WalkKind::Free | WalkKind::FreeReversed => {
                let mut pos: i64 = if self.kind == WalkKind::Free { -1 } else { 1 };
                while pos != 0 {
                    pos += if rng.next_u64() < self.free_up { 1 } else { -1 };
                    t += 1;
                    if t > cap {
                        return Err(cap_error(cap, index));
                    }
                }
            }
        }
        Ok(t)
    }
}

/// Moment summary of many conditioned durations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DurationSummary {
    pub mean: Estimate,
    pub variance: Estimate,
    /// `(λ, E[e^{λ(D − mean)}])` for each requested λ.
    pub centred_mgf: Vec<(f64, Estimate)>,
    /// `(λ, E[e^{λD}])` for each requested λ.
    pub mgf: Vec<(f64, Estimate)>,
}

/// Simulates `config.n_samples` durations of `kind` and summarises them.
/// The centred moment generating function uses the exact mean `centre`
/// when given, otherwise the sample mean.
pub fn summarize_durations(
    kind: WalkKind,
    beta: f64,
    config: &SimConfig,
    lambdas: &[f64],
    centre: Option<f64>,
) -> Result<DurationSummary> {
    let sampler = conditioned_sampler(kind, beta)?;
    let durations: Vec<u64> = fold_indexed(
        config,
        Vec::new,
        |v: &mut Vec<u64>, i| {
            v.push(sampler.sample(config, i)?);
            Ok(())
        },
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    )?;
    let mut m = Moments::default();
    durations.iter().for_each(|&d| m.push(d as f64));
    let c = centre.unwrap_or(m.mean());
    let mgf_of = |shift: f64, lambda: f64| {
        let mut e = Moments::default();
        durations
            .iter()
            .for_each(|&d| e.push((lambda * (d as f64 - shift)).exp()));
        (lambda, e.mean_estimate())
    };
    Ok(DurationSummary {
        mean: m.mean_estimate(),
        variance: m.variance_estimate(),
        centred_mgf: lambdas.iter().map(|&l| mgf_of(c, l)).collect(),
        mgf: lambdas.iter().map(|&l| mgf_of(0.0, l)).collect(),
    })
}

/// Estimates for one group of samples (one trap size, or all pooled).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupStats {
    pub samples: u64,
    pub reached: u64,
    /// `P[A]`.
    pub p_reach: Estimate,
    /// `E[T]` over all samples of the group.
    pub mean_length: Estimate,
    /// `E[N | A]`.
    pub mean_n_given_a: Option<Estimate>,
    /// `E[T_in | A]`.
    pub mean_t_in: Option<Estimate>,
    /// `E[T_out | A]`.
    pub mean_t_out_given_a: Option<Estimate>,
    /// Mean length of a non-final excursion from `k`.
    pub excursion_mean: Option<Estimate>,
    /// Variance of the length of a non-final excursion from `k`.
    pub excursion_variance: Option<Estimate>,
}

/// Aggregated estimates of a simulation run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsRecord {
    pub pooled: GroupStats,
    pub per_k: BTreeMap<u32, GroupStats>,
    /// `Σ_k P[k]·E_k[N | A]`, estimated as `Σ_k f̂_k·N̄_k`.
    pub n_mixture: Estimate,
}

impl StatsRecord {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<Estimate> {
    let mut m = Moments::default();
    values.for_each(|x| m.push(x));
    match m.count() {
        0 => None,
        1 => Some(Estimate {
            value: m.mean(),
            se: 0.0,
            count: 1,
        }),
        _ => Some(m.mean_estimate()),
    }
}

/// Standard error from linearised per-sample influence values.
fn influence_se(z: &[f64]) -> f64 {
    let s = z.len() as f64;
    if z.len() < 2 {
        return 0.0;
    }
    let mean = z.iter().sum::<f64>() / s;
    (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (s * (s - 1.0))).sqrt()
}

fn group_stats(samples: &[&ExcursionSample]) -> GroupStats {
    let n = samples.len() as u64;
    let reached: Vec<&ExcursionSample> = samples.iter().copied().filter(|s| s.reached_far_end).collect();
    let r = reached.len() as u64;
    let p = r as f64 / n as f64;
    let p_reach = Estimate {
        value: p,
        se: (p * (1.0 - p) / n as f64).sqrt(),
        count: n,
    };
    let total_n: u64 = reached.iter().map(|s| s.n).sum();
    let (excursion_mean, excursion_variance) = if total_n == 0 {
        (None, None)
    } else {
        // ratio estimators over clusters (one cluster per sample)
        let nbar = total_n as f64 / r as f64;
        let b: f64 = reached.iter().map(|s| s.t_exc as f64).sum();
        let a: f64 = reached.iter().map(|s| s.t_exc_sq as f64).sum();
        let mean = b / total_n as f64;
        let second = a / total_n as f64;
        let var = second - mean * mean;
        let zm: Vec<f64> = reached
            .iter()
            .map(|s| (s.t_exc as f64 - mean * s.n as f64) / nbar)
            .collect();
        let zv: Vec<f64> = reached
            .iter()
            .map(|s| {
                (s.t_exc_sq as f64 - 2.0 * mean * s.t_exc as f64 - (second - 2.0 * mean * mean) * s.n as f64) / nbar
            })
            .collect();
        (
            Some(Estimate {
                value: mean,
                se: influence_se(&zm),
                count: total_n,
            }),
            Some(Estimate {
                value: var,
                se: influence_se(&zv),
                count: total_n,
            }),
        )
    };
    GroupStats {
        samples: n,
        reached: r,
        p_reach,
        mean_length: mean_of(samples.iter().map(|s| s.length as f64)).expect("nonempty group"),
        mean_n_given_a: mean_of(reached.iter().map(|s| s.n as f64)),
        mean_t_in: mean_of(reached.iter().map(|s| s.t_in as f64)),
        mean_t_out_given_a: mean_of(reached.iter().map(|s| s.t_out as f64)),
        excursion_mean,
        excursion_variance,
    }
}

/// Per-trap-size and pooled estimates.
pub fn summarize(samples: &[ExcursionSample]) -> Result<StatsRecord> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("no samples to summarize".into()));
    }
    let mut groups: BTreeMap<u32, Vec<&ExcursionSample>> = BTreeMap::new();
    for s in samples {
        groups.entry(s.k).or_default().push(s);
    }
    let all: Vec<&ExcursionSample> = samples.iter().collect();
    let per_k: BTreeMap<u32, GroupStats> = groups.iter().map(|(&k, g)| (k, group_stats(g))).collect();

    // Σ_k f̂_k N̄_k with influence ψ_i = N̄_k + (N_i − N̄_k·1_A)/p̂_k
    let total = samples.len() as f64;
    let mut psi = Vec::with_capacity(samples.len());
    let mut value = 0.0;
    for (k, g) in &groups {
        let st = &per_k[k];
        let nbar = st.mean_n_given_a.map_or(0.0, |e| e.value);
        let phat = st.p_reach.value;
        value += g.len() as f64 / total * nbar;
        for s in g {
            let indicator = if s.reached_far_end { 1.0 } else { 0.0 };
            let corr = if phat > 0.0 {
                (s.n as f64 - nbar * indicator) / phat
            } else {
                0.0
            };
            psi.push(nbar + corr);
        }
    }
    Ok(StatsRecord {
        pooled: group_stats(&all),
        per_k,
        n_mixture: Estimate {
            value,
            se: influence_se(&psi),
            count: samples.len() as u64,
        },
    })
}

/// Writes samples as `k,reached,T,T_in,T_exc,T_out,N`.
pub fn write_samples_csv<W: Write>(samples: &[ExcursionSample], mut out: W) -> Result<()> {
    writeln!(out, "k,reached,T,T_in,T_exc,T_out,N")?;
    for s in samples {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.k, s.reached_far_end as u8, s.length, s.t_in, s.t_exc, s.t_out, s.n
        )?;
    }
    Ok(())
}
