//! Command-line driver: configuration files, experiment orchestration and
//! CSV output.

pub mod config_file;
pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use swipt_core::channel::trial_channels;
use swipt_core::region::{exhaustive_search, monte_carlo_region, IdReference, RealizationSolver};
use swipt_core::{SimConfig, StrategyKind};

pub use config_file::{load_config, parse_config, render_config};
pub use output::{rows_from_curves, write_csv, write_rows, ResultRow, CSV_HEADER};

/// Environment variable capping the worker threads (0 or unset = all cores).
pub const THREADS_ENV: &str = "SWIPT_SIM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "swipt-sim", version, about = "Rate-energy regions for SWIPT in a two-user OFDM interference channel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Configuration file (flat `key = value`, `#` comments).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed of the channel realizations.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of Monte Carlo realizations.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo R-E curves, written as CSV.
    Region {
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Restrict the run to one strategy.
        #[arg(long)]
        strategy: Option<StrategyKind>,
    },
    /// One strategy at one energy constraint on the realization of `--seed`.
    Point {
        #[arg(long)]
        strategy: StrategyKind,
        /// Energy constraint in microwatts.
        #[arg(long)]
        ebar: f64,
    },
    /// Gradient, waterfilling and equilibrium checks plus the
    /// single-subcarrier optimality report.
    Verify {
        #[arg(long, default_value_t = 1000)]
        instances: usize,
    },
    /// Print the resolved configuration.
    ShowConfig,
}

/// Runs the command line and returns the process exit code. Errors go to
/// standard error.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = io::stdout();
    match run(&cli, &mut stdout.lock()) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

/// Applies the file and flag overrides on top of the defaults.
pub fn resolve_config(cli: &Cli) -> Result<SimConfig> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    if let Command::Region { strategy: Some(s), .. } = &cli.command {
        cfg.strategies = vec![*s];
    }
    cfg.validate()?;
    Ok(cfg)
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => {
            v.trim().parse::<usize>().with_context(|| format!("{THREADS_ENV} must be a thread count, got {v:?}"))?
        }
        _ => 0,
    };
    Ok(rayon::ThreadPoolBuilder::new().num_threads(threads).build()?)
}

/// Executes a parsed command, writing reports to `out`. Returns `false` when
/// a verification check failed.
pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<bool> {
    let cfg = resolve_config(cli)?;
    match &cli.command {
        Command::ShowConfig => {
            out.write_all(render_config(&cfg)?.as_bytes())?;
            Ok(true)
        }
        Command::Region { out: path, .. } => {
            let curves = thread_pool()?.install(|| monte_carlo_region(&cfg))?;
            let rows = rows_from_curves(&curves);
            match path {
                Some(path) => write_csv(&rows, path)?,
                None => write_rows(&rows, &mut *out)?,
            }
            Ok(true)
        }
        Command::Point { strategy, ebar } => {
            point(&cfg, *strategy, *ebar, out)?;
            Ok(true)
        }
        Command::Verify { instances } => verify_all(&cfg, *instances, out),
    }
}

fn point<W: Write>(cfg: &SimConfig, strategy: StrategyKind, ebar: f64, out: &mut W) -> Result<()> {
    if !(ebar >= 0.0 && ebar.is_finite()) {
        bail!("--ebar must be a nonnegative number of microwatts, got {ebar}");
    }
    let ch = trial_channels(cfg, 0)?;
    let algo = cfg.algo_config();
    let outcome = match strategy {
        StrategyKind::Exhaustive => Some(exhaustive_search(&ch, ebar, cfg.budget_uw, &algo)?),
        _ => RealizationSolver::new(&ch, cfg.budget_uw, cfg.beta, algo)?.solve_at(&[strategy], ebar)?.remove(0).outcome,
    };
    let reference = IdReference::new(&ch, cfg.budget_uw)?;
    writeln!(out, "strategy = {strategy}")?;
    writeln!(out, "ebar_uW = {ebar}")?;
    writeln!(out, "interference_free_rate_bits = {}", reference.rate)?;
    writeln!(out, "interference_free_energy_uW = {}", reference.e12)?;
    let Some(o) = outcome else {
        writeln!(out, "feasible = false")?;
        writeln!(out, "# no subcarrier satisfies the selection rule")?;
        return Ok(());
    };
    writeln!(out, "subcarrier = {}", o.nbar)?;
    writeln!(out, "rate_bits = {}", o.point.rate)?;
    writeln!(out, "energy_uW = {}", o.point.energy)?;
    writeln!(out, "feasible = {}", o.point.feasible)?;
    writeln!(out, "p1 = {:?}", o.p1.powers())?;
    writeln!(out, "p2 = {:?}", o.p2.powers())?;
    writeln!(out, "iterations = {}", o.trace.iterations)?;
    writeln!(out, "converged = {}", o.trace.converged)?;
    writeln!(out, "# step,p1_nbar_uW,rate_bits,energy_uW,lambda,mu")?;
    for (k, r) in o.trace.records.iter().enumerate() {
        writeln!(out, "{k},{},{},{},{},{}", r.p1_nbar, r.rate, r.energy, r.lambda, r.mu)?;
    }
    Ok(())
}

fn verify_all<W: Write>(cfg: &SimConfig, instances: usize, out: &mut W) -> Result<bool> {
    let seed = cfg.master_seed;
    let checks = [
        verify::gradient_check(seed, instances)?,
        verify::waterfill_kkt_check(seed, instances)?,
        verify::nash_check(cfg, instances)?,
    ];
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        writeln!(out, "{status} {}: {} instances, {} failures, worst {:e}", c.name, c.instances, c.failures, c.worst)?;
    }
    let p1 = verify::proposition1_config(seed);
    let summary = verify::proposition1_summary(&p1, instances, 3, 20, 1e-2)?;
    writeln!(
        out,
        "single-subcarrier optimality: {}/{} realizations within {} bits of the best",
        summary.single_wins, summary.realizations, summary.tol
    )?;
    for (m, r) in summary.mean_best.iter().enumerate() {
        writeln!(out, "  m = {}: mean best rate {r} bits", m + 1)?;
    }
    Ok(checks.iter().all(verify::CheckResult::passed))
}
