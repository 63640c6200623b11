//! Property and oracle checks behind the `verify` subcommand.

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swipt_core::channel::trial_channels;
use swipt_core::metrics::achievable_rate;
use swipt_core::optimizer::{best_response, gradient_j, iterative_waterfilling_2id, waterfill};
use swipt_core::region::verify_proposition1;
use swipt_core::{ChannelSet, SimConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub instances: usize,
    pub failures: usize,
    /// Largest error seen, in the check's own unit.
    pub worst: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Analytic rate gradient against central differences of the rate.
pub fn gradient_check(seed: u64, instances: usize) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut failures, mut worst) = (0, 0.0f64);
    for _ in 0..instances {
        let g21 = log_uniform(&mut rng, 1e-4, 1.0);
        let g22 = log_uniform(&mut rng, 1e-4, 1.0);
        let p1 = log_uniform(&mut rng, 1e-2, 1e4);
        let p2 = log_uniform(&mut rng, 1e-2, 1e4);
        let ch = ChannelSet::from_powers(&[1.0], &[1.0], &[g21], &[g22])?;
        let h = 1e-4 * p1;
        let fd = (achievable_rate(&ch, &[p1 + h], &[p2])? - achievable_rate(&ch, &[p1 - h], &[p2])?) / (2.0 * h);
        let exact = gradient_j(p1, p2, ch.g21()[0], ch.g22()[0]);
        let err = (fd - exact).abs() / exact.abs().max(1e-300);
        worst = worst.max(err);
        if err > 1e-5 {
            failures += 1;
        }
    }
    Ok(CheckResult { name: "gradient", instances, failures, worst })
}

/// Budget and equal water level over the active subcarriers.
pub fn waterfill_kkt_check(seed: u64, instances: usize) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5741_5445_5246_494c);
    let (mut failures, mut worst) = (0, 0.0f64);
    for _ in 0..instances {
        let n = rng.random_range(1..=16);
        let gains: Vec<f64> = (0..n).map(|_| log_uniform(&mut rng, 1e-4, 10.0)).collect();
        let budget = log_uniform(&mut rng, 1e-2, 1e5);
        let wf = waterfill(&gains, budget)?;
        let p = wf.allocation.powers();
        let budget_err = (p.iter().sum::<f64>() - budget).abs() / budget;
        let mut level_err = 0.0f64;
        let mut dual_ok = true;
        for (g, p) in gains.iter().zip(p) {
            if *p > 0.0 {
                level_err = level_err.max((p + 1.0 / g - wf.level).abs() / wf.level);
            } else if 1.0 / g < wf.level * (1.0 - 1e-12) {
                dual_ok = false;
            }
        }
        worst = worst.max(budget_err.max(level_err));
        if budget_err > 1e-10 || level_err > 1e-8 || !dual_ok {
            failures += 1;
        }
    }
    Ok(CheckResult { name: "waterfill-kkt", instances, failures, worst })
}

/// One extra best response moves neither user by more than `1e-6 * P`.
pub fn nash_check(cfg: &SimConfig, instances: usize) -> Result<CheckResult> {
    let algo = cfg.algo_config();
    let budget = cfg.budget_uw;
    let (mut failures, mut worst) = (0, 0.0f64);
    for t in 0..instances as u64 {
        let ch = trial_channels(cfg, t)?;
        let out = iterative_waterfilling_2id(&ch, budget, &algo)?;
        let r1 = best_response(ch.g11(), ch.g12(), out.p2.powers(), budget)?;
        let r2 = best_response(ch.g22(), ch.g21(), out.p1.powers(), budget)?;
        let moved = max_diff(out.p1.powers(), r1.powers()).max(max_diff(out.p2.powers(), r2.powers()));
        worst = worst.max(moved / budget);
        if !out.converged || moved >= 1e-6 * budget {
            failures += 1;
        }
    }
    Ok(CheckResult { name: "nash-fixed-point", instances, failures, worst })
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Setting of the single-subcarrier optimality check: three subcarriers and
/// an SNR scale of 1e5.
pub fn proposition1_config(seed: u64) -> SimConfig {
    SimConfig { n_subcarriers: 3, tap_count: 3, budget_uw: 1e5, master_seed: seed, ..SimConfig::default() }
}

/// An energy constraint the ID transmitter cannot meet alone, so the EH
/// transmitter has to stay on.
pub fn proposition1_ebar(ch: &ChannelSet, budget: f64) -> f64 {
    let g12 = ch.g12().iter().copied().fold(0.0, f64::max);
    let g11 = ch.g11().iter().copied().fold(f64::INFINITY, f64::min);
    budget * (g12 + 0.25 * g11)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Proposition1Summary {
    pub realizations: usize,
    /// Realizations where one subcarrier was within `tol` of the best.
    pub single_wins: usize,
    pub tol: f64,
    /// Mean best rate per order `m`, over realizations where it exists.
    pub mean_best: Vec<f64>,
}

pub fn proposition1_summary(
    cfg: &SimConfig,
    realizations: usize,
    m_max: usize,
    grid_steps: usize,
    tol: f64,
) -> Result<Proposition1Summary> {
    let algo = cfg.algo_config();
    let mut single_wins = 0;
    let mut sums = vec![(0.0, 0usize); m_max];
    for t in 0..realizations as u64 {
        let ch = trial_channels(cfg, t)?;
        let ebar = proposition1_ebar(&ch, cfg.budget_uw);
        let report = verify_proposition1(&ch, ebar, cfg.budget_uw, m_max, grid_steps, &algo)?;
        if report.single_subcarrier_optimal(tol) {
            single_wins += 1;
        }
        for (m, r) in report.best_rate.iter().enumerate() {
            if let Some(r) = r {
                sums[m].0 += r;
                sums[m].1 += 1;
            }
        }
    }
    let mean_best = sums.iter().map(|(s, k)| if *k > 0 { s / *k as f64 } else { f64::NAN }).collect();
    Ok(Proposition1Summary { realizations, single_wins, tol, mean_best })
}
