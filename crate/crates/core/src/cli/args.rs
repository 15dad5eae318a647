//! Command-line flags and the optional `key = value` defaults file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::grid::GridSpec;
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(
    name = "trap-tail",
    version,
    about = "Excursion-length tails of a biased walk in a geometric trap"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact mixture tail P[T>t] on the grid, as CSV.
    Exact(Common),
    /// Simulated tail with Wilson intervals, as CSV.
    Simulate(SimulateArgs),
    /// Asymptotic tail g((β−1)²t/2β)·t^{−ρ} on the grid, as CSV.
    Asympt(Common),
    /// Oscillation spectrum as JSON.
    Coefficients(Common),
    /// Mellin transform of the harmonic sum at one point, as JSON.
    Mellin(MellinArgs),
    /// Run the verification checks and write a JSON report.
    Verify(VerifyArgs),
    /// SVG plot of t^ρ·P[T>t] against g.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Time grid, `log:<t_min>:<t_max>:<points-per-β-period>`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub modes: Option<usize>,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long = "fixed-k")]
    pub fixed_k: Option<u32>,
    /// File of `key = value` defaults; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Also write every sample as CSV to this file.
    #[arg(long = "samples-out")]
    pub samples_out: Option<PathBuf>,
    /// Also write the aggregated statistics as JSON to this file.
    #[arg(long = "stats-out")]
    pub stats_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MellinArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, allow_negative_numbers = true)]
    pub re: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub im: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "corrupt-phase", hide = true)]
    pub corrupt_phase: bool,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    pub common: Common,
    /// Tail table CSV to plot; computed exactly on the grid when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

/// Settings after merging flags, the defaults file and built-in defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    pub beta: f64,
    pub grid: GridSpec,
    pub out: Option<PathBuf>,
    pub eps: f64,
    pub modes: usize,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub fixed_k: Option<u32>,
}

const KEYS: [&str; 10] = [
    "alpha", "beta", "grid", "out", "eps", "modes", "samples", "seed", "workers", "fixed-k",
];

/// Parses a `key = value` file; blank lines and `#` comments are ignored.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("config line {}: expected key = value", i + 1)))?;
        let k = k.trim().replace('_', "-");
        if !KEYS.contains(&k.as_str()) {
            return Err(Error::Parse(format!("config line {}: unknown key {k:?}", i + 1)));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

fn from_file<T: std::str::FromStr>(file: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    file.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| Error::Parse(format!("config value for {key} is invalid: {v:?}")))
        })
        .transpose()
}

/// Accepts integers written like `1e7`.
fn parse_count(v: &str) -> Option<u64> {
    v.parse::<u64>().ok().or_else(|| {
        let x = v.parse::<f64>().ok()?;
        (x >= 0.0 && x.fract() == 0.0 && x < 1.8e19).then_some(x as u64)
    })
}

impl Common {
    pub fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(path) => parse_config_file(&read_to_string(path)?)?,
            None => BTreeMap::new(),
        };
        let samples = match self.samples {
            Some(n) => n,
            None => match file.get("samples") {
                Some(v) => parse_count(v).ok_or_else(|| Error::Parse(format!("bad samples value {v:?}")))?,
                None => 1_000_000,
            },
        };
        let grid = match &self.grid {
            Some(g) => g.parse()?,
            None => match file.get("grid") {
                Some(g) => g.parse()?,
                None => GridSpec::new(1.0, 1e5, crate::grid::DEFAULT_POINTS_PER_PERIOD)?,
            },
        };
        let cfg = RunConfig {
            alpha: self.alpha.or(from_file(&file, "alpha")?).unwrap_or(0.5),
            beta: self.beta.or(from_file(&file, "beta")?).unwrap_or(2.0),
            grid,
            out: self.out.clone().or(from_file(&file, "out")?),
            eps: self.eps.or(from_file(&file, "eps")?).unwrap_or(1e-12),
            modes: self.modes.or(from_file(&file, "modes")?).unwrap_or(10),
            samples,
            seed: self.seed.or(from_file(&file, "seed")?).unwrap_or(1),
            workers: self
                .workers
                .or(from_file(&file, "workers")?)
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            fixed_k: self.fixed_k.or(from_file(&file, "fixed-k")?),
        };
        if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
            return Err(Error::domain(format!("eps must lie in (0, 1), got {}", cfg.eps)));
        }
        Ok(cfg)
    }
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}
