//! Command-line front end.
//!
//! Configuration comes from an optional JSON file; individual flags override
//! file fields, which override the defaults. List-valued flags
//! (`--delta 0.9,0.99`) feed `sweep` and `benchmark`; the single-run
//! commands require exactly one value.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::benchmark::{self, static_mixed_equilibrium};
use crate::error::Error;
use crate::game::Params;
use crate::output::fmt_real;
use crate::simulator::{self, simulate, MarkovPolicy, RolloutConfig, StationaryPolicy};
use crate::solver::build_profile;
use crate::verifier::{verify, VerifyConfig};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "BARGAIN_MPE_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    #[default]
    Equilibrium,
    AlwaysFlexible,
    AlwaysCommit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Parameter lists for sweeps; empty lists fall back to the single-run values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub deltas: Vec<f64>,
    pub costs: Vec<f64>,
    pub gammas: Vec<f64>,
    pub alpha0s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub delta: f64,
    pub cost: f64,
    pub gamma: f64,
    pub alpha0: f64,
    pub grid: usize,
    pub demand_grid: usize,
    pub residual_tol: f64,
    pub gap_tol: f64,
    pub seed: u64,
    pub paths: usize,
    /// Rollout horizon; `None` uses the smallest `T` with `delta^T <= 1e-6`.
    pub horizon: Option<usize>,
    pub policy: PolicyKind,
    pub sweep: SweepSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        let verify = VerifyConfig::default();
        RunConfig {
            delta: 0.99,
            cost: 0.01,
            gamma: 0.5,
            alpha0: 0.5,
            grid: verify.grid_points,
            demand_grid: verify.demand_grid,
            residual_tol: verify.residual_tol,
            gap_tol: verify.gap_tol,
            seed: 42,
            paths: 10_000,
            horizon: None,
            policy: PolicyKind::Equilibrium,
            sweep: SweepSpec::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn params(&self) -> Result<Params, Error> {
        Params::new(self.delta, self.cost, self.gamma, self.alpha0)
    }

    pub fn verify_config(&self) -> Result<VerifyConfig, Error> {
        if self.grid < 2 {
            return Err(Error::Config(format!(
                "grid must have at least 2 points (got {})",
                self.grid
            )));
        }
        if self.demand_grid < 2 {
            return Err(Error::Config(format!(
                "demand grid must have at least 2 points (got {})",
                self.demand_grid
            )));
        }
        Ok(VerifyConfig {
            grid_points: self.grid,
            demand_grid: self.demand_grid,
            residual_tol: self.residual_tol,
            gap_tol: self.gap_tol,
        })
    }

    pub fn rollout_config(&self) -> RolloutConfig {
        match self.horizon {
            Some(horizon) => RolloutConfig {
                horizon,
                num_paths: self.paths,
                seed: self.seed,
            },
            None => RolloutConfig::with_default_horizon(self.delta, self.paths, self.seed),
        }
    }

    /// Sorted, de-duplicated sweep axes.
    pub fn sweep_axes(&self) -> [Vec<f64>; 4] {
        let norm = |list: &[f64], single: f64| {
            let mut v = if list.is_empty() {
                vec![single]
            } else {
                list.to_vec()
            };
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        };
        [
            norm(&self.sweep.deltas, self.delta),
            norm(&self.sweep.costs, self.cost),
            norm(&self.sweep.gammas, self.gamma),
            norm(&self.sweep.alpha0s, self.alpha0),
        ]
    }
}

#[derive(Debug, Parser)]
#[command(name = "bargain-mpe", version, about = "Solve, verify and simulate the bargaining MPE")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Discount factor (comma-separated list for sweeps).
    #[arg(long, global = true, value_delimiter = ',')]
    pub delta: Vec<f64>,
    /// Commitment cost (comma-separated list for sweeps).
    #[arg(long, global = true, value_delimiter = ',')]
    pub cost: Vec<f64>,
    /// Utility exponent (comma-separated list for sweeps).
    #[arg(long, global = true, value_delimiter = ',')]
    pub gamma: Vec<f64>,
    /// Initial share of player 1 (comma-separated list for sweeps).
    #[arg(long, global = true, value_delimiter = ',')]
    pub alpha0: Vec<f64>,
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long = "demand-grid", global = true)]
    pub demand_grid: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Profile to simulate.
    #[arg(long, global = true, value_enum)]
    pub policy: Option<PolicyKind>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write a per-period CSV trace of path 0 (simulate only).
    #[arg(long, global = true)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Build the equilibrium profile and export it as JSON.
    Solve,
    /// Certify the profile over the sample grid.
    Verify,
    /// Monte-Carlo rollouts from the initial status quo.
    Simulate,
    /// Solve and verify every parameter combination.
    Sweep,
    /// Static equilibria of the exogenous status quo benchmark.
    Benchmark,
}

/// A failure reported as structured JSON on stderr.
#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub kind: String,
    pub message: String,
}

impl CliError {
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": { "kind": self.kind, "message": self.message } }).to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let exit_code = match e {
            Error::InvalidParameter { .. } | Error::Config(_) => 2,
            _ => 1,
        };
        CliError {
            exit_code,
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError {
            exit_code: 1,
            kind: "io".into(),
            message: e.to_string(),
        }
    }
}

fn single(name: &str, values: &[f64]) -> Result<Option<f64>, Error> {
    match values {
        [] => Ok(None),
        [v] => Ok(Some(*v)),
        _ => Err(Error::Config(format!(
            "{name} takes a single value for this command"
        ))),
    }
}

/// Merges defaults, the config file and the flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    let lists = matches!(cli.command, Command::Sweep | Command::Benchmark);
    let axes: [(&str, &Vec<f64>); 4] = [
        ("delta", &cli.delta),
        ("cost", &cli.cost),
        ("gamma", &cli.gamma),
        ("alpha0", &cli.alpha0),
    ];
    for (i, (name, values)) in axes.into_iter().enumerate() {
        if lists && values.len() > 1 {
            let target = match i {
                0 => &mut cfg.sweep.deltas,
                1 => &mut cfg.sweep.costs,
                2 => &mut cfg.sweep.gammas,
                _ => &mut cfg.sweep.alpha0s,
            };
            *target = values.clone();
            continue;
        }
        if let Some(v) = single(name, values)? {
            match i {
                0 => cfg.delta = v,
                1 => cfg.cost = v,
                2 => cfg.gamma = v,
                _ => cfg.alpha0 = v,
            }
            if lists {
                match i {
                    0 => cfg.sweep.deltas = vec![v],
                    1 => cfg.sweep.costs = vec![v],
                    2 => cfg.sweep.gammas = vec![v],
                    _ => cfg.sweep.alpha0s = vec![v],
                }
            }
        }
    }
    if let Some(v) = cli.grid {
        cfg.grid = v;
    }
    if let Some(v) = cli.demand_grid {
        cfg.demand_grid = v;
    }
    if let Some(v) = cli.seed {
        cfg.seed = v;
    }
    if let Some(v) = cli.paths {
        cfg.paths = v;
    }
    if let Some(v) = cli.horizon {
        cfg.horizon = Some(v);
    }
    if let Some(v) = cli.policy {
        cfg.policy = v;
    }
    Ok(cfg)
}

/// Sizes the global worker pool from [`THREADS_ENV`], if set.
pub fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
    {
        // Ignore the error if a pool was already installed.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn open_out(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> io::Result<()> {
    let mut w = open_out(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
}

/// Path of the summary written next to a verify report.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve_config(cli)?;
    let out = cli.out.as_deref();
    let format = cli.format.unwrap_or_default();
    match cli.command {
        Command::Solve => cmd_solve(&cfg, out),
        Command::Verify => cmd_verify(&cfg, out, format),
        Command::Simulate => cmd_simulate(&cfg, out, cli.trace.as_deref()),
        Command::Sweep => cmd_sweep(&cfg, out, format),
        Command::Benchmark => cmd_benchmark(&cfg, out, format),
    }
}

pub fn cmd_solve(cfg: &RunConfig, out: Option<&Path>) -> Result<(), CliError> {
    let params = cfg.params()?;
    let verify_cfg = cfg.verify_config()?;
    let profile = build_profile(&params)?;
    let export = profile.export(&profile.sample_grid(verify_cfg.grid_points))?;
    write_json(&export, out)?;
    Ok(())
}

pub fn cmd_verify(cfg: &RunConfig, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let params = cfg.params()?;
    let verify_cfg = cfg.verify_config()?;
    let profile = build_profile(&params)?;
    let report = verify(&profile, &verify_cfg)?;
    match format {
        Format::Json => write_json(&report.summary, out)?,
        Format::Csv => {
            let mut w = open_out(out)?;
            report.write_csv(&mut w)?;
            w.flush()?;
            match out {
                Some(path) => write_json(&report.summary, Some(&summary_path(path)))?,
                None => eprintln!("{}", serde_json::to_string(&report.summary).expect("summary")),
            }
        }
    }
    Ok(())
}

pub fn cmd_simulate(cfg: &RunConfig, out: Option<&Path>, trace: Option<&Path>) -> Result<(), CliError> {
    let params = cfg.params()?;
    let rollout = cfg.rollout_config();
    let profile;
    let stationary;
    let policy: &dyn MarkovPolicy = match cfg.policy {
        PolicyKind::Equilibrium => {
            profile = build_profile(&params)?;
            &profile
        }
        PolicyKind::AlwaysFlexible => {
            stationary = StationaryPolicy::always_flexible(params);
            &stationary
        }
        PolicyKind::AlwaysCommit => {
            stationary = StationaryPolicy::always_commit_one(params);
            &stationary
        }
    };
    let stats = simulate(policy, &rollout)?;
    write_json(&stats, out)?;
    if let Some(path) = trace {
        let rows = simulator::trace_path(policy, &rollout, 0)?;
        simulator::write_trace_csv(&rows, BufWriter::new(File::create(path)?))?;
    }
    Ok(())
}

/// One sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub cost: f64,
    pub gamma: f64,
    pub alpha0: f64,
    pub metrics: Option<SweepMetrics>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepMetrics {
    pub v_one: f64,
    pub v_half: f64,
    pub alpha_star: f64,
    pub r_fair: f64,
    pub s_fair: f64,
    pub p_strong: f64,
    pub q_plus: f64,
    pub efficiency_gap: f64,
    pub max_br_gap: f64,
    pub max_reneg_dist: f64,
    pub static_bound: f64,
}

fn sweep_cell(params: Params, verify_cfg: &VerifyConfig) -> Result<SweepMetrics, Error> {
    let profile = build_profile(&params)?;
    let report = verify(&profile, verify_cfg)?;
    let c = profile.constants();
    Ok(SweepMetrics {
        v_one: c.v_one,
        v_half: c.v_half,
        alpha_star: c.alpha_star,
        r_fair: c.r_fair,
        s_fair: c.s_fair,
        p_strong: c.p_strong,
        q_plus: c.q_plus,
        efficiency_gap: report.summary.efficiency_gap,
        max_br_gap: report.summary.max_br_gap,
        max_reneg_dist: report.summary.max_reneg_dist,
        static_bound: benchmark::payoff_bound(&params)?,
    })
}

/// Runs every cell of the sweep in parallel; rows come back in sorted
/// parameter order (delta, cost, gamma, alpha0).
pub fn run_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>, Error> {
    let verify_cfg = cfg.verify_config()?;
    let [deltas, costs, gammas, alpha0s] = cfg.sweep_axes();
    let mut cells = Vec::new();
    for &d in &deltas {
        for &c in &costs {
            for &g in &gammas {
                for &a in &alpha0s {
                    cells.push((d, c, g, a));
                }
            }
        }
    }
    Ok(cells
        .into_par_iter()
        .map(|(delta, cost, gamma, alpha0)| {
            let result = Params::new(delta, cost, gamma, alpha0).and_then(|p| sweep_cell(p, &verify_cfg));
            let (metrics, error) = match result {
                Ok(m) => (Some(m), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SweepRow {
                delta,
                cost,
                gamma,
                alpha0,
                metrics,
                error,
            }
        })
        .collect())
}

pub const SWEEP_COLUMNS: [&str; 16] = [
    "delta",
    "cost",
    "gamma",
    "alpha0",
    "V1",
    "VHalf",
    "alphaStar",
    "rFair",
    "sFair",
    "pStrong",
    "qPlus",
    "efficiency_gap",
    "max_br_gap",
    "max_reneg_dist",
    "static_bound",
    "error",
];

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        let mut rec = vec![
            fmt_real(r.delta),
            fmt_real(r.cost),
            fmt_real(r.gamma),
            fmt_real(r.alpha0),
        ];
        match &r.metrics {
            Some(m) => rec.extend(
                [
                    m.v_one,
                    m.v_half,
                    m.alpha_star,
                    m.r_fair,
                    m.s_fair,
                    m.p_strong,
                    m.q_plus,
                    m.efficiency_gap,
                    m.max_br_gap,
                    m.max_reneg_dist,
                    m.static_bound,
                ]
                .map(fmt_real),
            ),
            None => rec.extend(std::iter::repeat_n(String::new(), 11)),
        }
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()
}

pub fn cmd_sweep(cfg: &RunConfig, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let rows = run_sweep(cfg)?;
    match format {
        Format::Json => write_json(&rows, out)?,
        Format::Csv => {
            let mut w = open_out(out)?;
            write_sweep_csv(&rows, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Static equilibria on a uniform status-quo grid for every (cost, gamma).
pub fn run_benchmark(cfg: &RunConfig) -> Result<Vec<(Params, benchmark::StaticEquilibrium)>, Error> {
    if cfg.grid < 2 {
        return Err(Error::Config(format!(
            "grid must have at least 2 points (got {})",
            cfg.grid
        )));
    }
    let [_, costs, gammas, _] = cfg.sweep_axes();
    let mut rows = Vec::new();
    for &c in &costs {
        for &g in &gammas {
            let params = Params::new(cfg.delta, c, g, cfg.alpha0)?;
            for i in 0..cfg.grid {
                let alpha = i as f64 / (cfg.grid - 1) as f64;
                rows.push((params, static_mixed_equilibrium(alpha, &params)));
            }
        }
    }
    Ok(rows)
}

pub fn cmd_benchmark(cfg: &RunConfig, out: Option<&Path>, format: Format) -> Result<(), CliError> {
    let rows = run_benchmark(cfg)?;
    match format {
        Format::Json => {
            let eqs: Vec<_> = rows.iter().map(|(_, e)| e).collect();
            write_json(&eqs, out)?
        }
        Format::Csv => {
            let mut w = open_out(out)?;
            benchmark::write_csv(&rows, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}
