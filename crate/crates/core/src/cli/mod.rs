//! Command-line front end. Exit codes: `0` success, `1` a verification
//! check failed, `2` usage, domain or input error.

mod args;
mod svg;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use clap::Parser;
use log::info;
use serde_json::{json, Value};

pub use args::{parse_config_file, Cli, Command, Common, RunConfig};

use crate::asympt::{asymptotic_tail, mellin_f_star, oscillation_spectrum};
use crate::exact::{fmt17, mixture_tail};
use crate::model::{make_params, ModelParams};
use crate::sim::{estimate_tail, simulate, summarize, write_samples_csv, SimConfig};
use crate::verify::{run_verify, VerifyOptions};
use crate::{Complex64, Error, Result, TailTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable holding the log filter.
pub const LOG_ENV: &str = "TRAP_TAIL_LOG";

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter(LOG_ENV)).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

/// Runs one command; `Ok(1)` signals failed verification.
pub fn run(command: Command) -> Result<i32> {
    match command {
        Command::Exact(c) => with_config(&c, run_exact),
        Command::Simulate(a) => with_config(&a.common, |cfg| {
            run_simulate(cfg, a.samples_out.as_deref(), a.stats_out.as_deref())
        }),
        Command::Asympt(c) => with_config(&c, run_asympt),
        Command::Coefficients(c) => with_config(&c, run_coefficients),
        Command::Mellin(a) => with_config(&a.common, |cfg| run_mellin(cfg, Complex64::new(a.re, a.im))),
        Command::Verify(a) => with_config(&a.common, |cfg| run_verify_command(cfg, a.corrupt_phase)),
        Command::Plot(a) => with_config(&a.common, |cfg| run_plot(cfg, a.input.as_deref())),
    }
}

fn with_config(common: &Common, f: impl FnOnce(&RunConfig) -> Result<i32> + Send) -> Result<i32> {
    let cfg = common.resolve()?;
    if cfg.workers == 0 {
        return Err(Error::domain("workers must be at least 1"));
    }
    info!("resolved configuration: {cfg:?}");
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?
        .install(|| f(&cfg))
}

fn params_of(cfg: &RunConfig) -> Result<ModelParams<f64>> {
    make_params(cfg.alpha, cfg.beta)
}

fn sim_config(cfg: &RunConfig) -> SimConfig {
    SimConfig::new(cfg.samples, cfg.seed)
        .with_workers(cfg.workers)
        .with_fixed_k(cfg.fixed_k)
}

fn output(cfg: &RunConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_text(cfg: &RunConfig, text: &str) -> Result<()> {
    let mut out = output(cfg)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

/// Note for the user on stdout when results go to a file, else on stderr.
fn note(cfg: &RunConfig, msg: &str) {
    if cfg.out.is_some() {
        println!("{msg}");
    } else {
        eprintln!("{msg}");
    }
}

pub fn run_exact(cfg: &RunConfig) -> Result<i32> {
    let params = params_of(cfg)?;
    let grid = cfg.grid.points(params.beta());
    let table = mixture_tail(&params, &grid, cfg.eps)?;
    let mut out = output(cfg)?;
    table.write_csv(&mut out)?;
    out.flush()?;
    note(
        cfg,
        &format!("truncation bound: {}", fmt17(table.truncation_bound().unwrap_or(0.0))),
    );
    Ok(EXIT_OK)
}

pub fn run_simulate(cfg: &RunConfig, samples_out: Option<&Path>, stats_out: Option<&Path>) -> Result<i32> {
    let params = params_of(cfg)?;
    let sim = sim_config(cfg);
    let grid = cfg.grid.points(params.beta());
    let table = estimate_tail(&params, &grid, &sim)?;
    let mut out = output(cfg)?;
    table.write_csv(&mut out)?;
    out.flush()?;
    if samples_out.is_some() || stats_out.is_some() {
        let samples = simulate(&params, &sim)?;
        if let Some(p) = samples_out {
            let mut w = BufWriter::new(File::create(p)?);
            write_samples_csv(&samples, &mut w)?;
            w.flush()?;
        }
        if let Some(p) = stats_out {
            std::fs::write(p, summarize(&samples)?.to_json()? + "\n")?;
        }
    }
    Ok(EXIT_OK)
}

pub fn run_asympt(cfg: &RunConfig) -> Result<i32> {
    let params = params_of(cfg)?;
    let grid = cfg.grid.points(params.beta());
    let table = asymptotic_tail(&params, &grid, cfg.modes)?;
    let mut out = output(cfg)?;
    table.write_csv(&mut out)?;
    out.flush()?;
    Ok(EXIT_OK)
}

/// JSON number with 17 significant digits.
fn num17(x: f64) -> Value {
    if x.is_finite() {
        serde_json::from_str(&fmt17(x)).expect("formatted float is valid JSON")
    } else {
        Value::Null
    }
}

/// Spectrum as `{rho, prefactor, modes: [{k, c, d, chi_re, chi_im}]}`.
pub fn coefficients_json(params: &ModelParams<f64>, modes: usize) -> Result<Value> {
    let spec = oscillation_spectrum(params, modes)?;
    let modes: Vec<Value> = spec
        .modes()
        .iter()
        .map(|m| {
            json!({
                "k": m.k,
                "c": num17(m.c),
                "d": num17(m.d),
                "chi_re": num17(m.chi.re),
                "chi_im": num17(m.chi.im),
            })
        })
        .collect();
    Ok(json!({
        "rho": num17(spec.rho()),
        "prefactor": num17(spec.prefactor()),
        "modes": modes,
    }))
}

pub fn run_coefficients(cfg: &RunConfig) -> Result<i32> {
    let params = params_of(cfg)?;
    let value = coefficients_json(&params, cfg.modes)?;
    write_text(cfg, &(serde_json::to_string_pretty(&value)? + "\n"))?;
    Ok(EXIT_OK)
}

pub fn run_mellin(cfg: &RunConfig, z: Complex64) -> Result<i32> {
    let params = params_of(cfg)?;
    let v = mellin_f_star(&params, z)?;
    let value = json!({
        "z_re": num17(z.re),
        "z_im": num17(z.im),
        "value_re": num17(v.value.re),
        "value_im": num17(v.value.im),
        "in_strip": v.in_strip,
    });
    write_text(cfg, &(serde_json::to_string_pretty(&value)? + "\n"))?;
    Ok(EXIT_OK)
}

pub fn run_verify_command(cfg: &RunConfig, corrupt_phase: bool) -> Result<i32> {
    let params = params_of(cfg)?;
    let mut opts = VerifyOptions::new(sim_config(cfg));
    opts.grid = cfg.grid;
    opts.eps = cfg.eps;
    opts.modes = cfg.modes;
    opts.corrupt_phase = corrupt_phase;
    let report = run_verify(&params, &opts)?;
    write_text(cfg, &(report.to_json()? + "\n"))?;
    if report.pass {
        Ok(EXIT_OK)
    } else {
        eprintln!("verification failed: {}", report.failing().join(", "));
        Ok(EXIT_VERIFY_FAILED)
    }
}

pub fn run_plot(cfg: &RunConfig, input: Option<&Path>) -> Result<i32> {
    let params = params_of(cfg)?;
    let table = match input {
        Some(p) => TailTable::read_csv(BufReader::new(File::open(p)?))?,
        None => mixture_tail(&params, &cfg.grid.points(params.beta()), cfg.eps)?,
    };
    if table.is_empty() {
        return Err(Error::EmptyInput("tail table has no rows".into()));
    }
    let spec = oscillation_spectrum(&params, cfg.modes)?;
    let b = params.beta();
    let scale = (b - 1.0) * (b - 1.0) / (2.0 * b);
    let scaled: Vec<(f64, f64)> = table
        .t_grid()
        .iter()
        .zip(table.survival())
        .filter(|(&t, &s)| t > 0.0 && s > 0.0)
        .map(|(&t, &s)| (t, t.powf(params.rho()) * s))
        .collect();
    let g: Vec<(f64, f64)> = table
        .t_grid()
        .iter()
        .filter(|&&t| t > 0.0)
        .map(|&t| spec.g(scale * t).map(|v| (t, v)))
        .collect::<Result<_>>()?;
    let data_label = format!("t^ρ·P[T>t] ({})", table.provenance());
    let svg = svg::render(
        &format!("α = {}, β = {}, ρ = {:.4}", params.alpha(), b, params.rho()),
        "t^ρ·P[T>t]",
        &[
            svg::Series {
                label: &data_label,
                colour: "#1f5fa8",
                dashed: false,
                points: &scaled,
            },
            svg::Series {
                label: "g((β−1)²t/2β)",
                colour: "#c0392b",
                dashed: true,
                points: &g,
            },
        ],
    );
    write_text(cfg, &svg)?;
    Ok(EXIT_OK)
}
