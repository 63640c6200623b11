use crate::channel::ChannelSet;
use crate::error::{invalid, Result};
use crate::metrics::PowerAllocation;

use super::waterfill::waterfill;
use super::AlgoConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct NashOutcome {
    pub p1: PowerAllocation,
    pub p2: PowerAllocation,
    pub iterations: usize,
    pub converged: bool,
}

/// Waterfilling of one decoding user against the interference `other * cross`.
pub fn best_response(direct: &[f64], cross: &[f64], other: &[f64], budget: f64) -> Result<PowerAllocation> {
    let effective: Vec<f64> = direct.iter().zip(cross.iter().zip(other)).map(|(g, (c, p))| g / (1.0 + p * c)).collect();
    Ok(waterfill(&effective, budget)?.allocation)
}

/// Both receivers decode: users take turns waterfilling against each other
/// until no power moves by more than `nash_tol_rel * budget`.
pub fn iterative_waterfilling_2id(ch: &ChannelSet, budget: f64, cfg: &AlgoConfig) -> Result<NashOutcome> {
    if ch.g11().iter().all(|g| *g == 0.0) || ch.g22().iter().all(|g| *g == 0.0) {
        return Err(invalid("both direct links need a positive gain"));
    }
    let n = ch.n_subcarriers();
    let tol = cfg.nash_tol_rel * budget;
    let mut p1 = PowerAllocation::zeros(n, budget);
    let mut p2 = PowerAllocation::zeros(n, budget);
    for it in 1..=cfg.i_max {
        let next1 = best_response(ch.g11(), ch.g12(), p2.powers(), budget)?;
        let next2 = best_response(ch.g22(), ch.g21(), next1.powers(), budget)?;
        let moved = max_change(&p1, &next1).max(max_change(&p2, &next2));
        p1 = next1;
        p2 = next2;
        if moved < tol {
            return Ok(NashOutcome { p1, p2, iterations: it, converged: true });
        }
    }
    Ok(NashOutcome { p1, p2, iterations: cfg.i_max, converged: false })
}

fn max_change(a: &PowerAllocation, b: &PowerAllocation) -> f64 {
    a.powers().iter().zip(b.powers()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
