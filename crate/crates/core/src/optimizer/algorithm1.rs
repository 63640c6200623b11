//! Iterative identification of one R-E boundary point for a fixed EH subcarrier.
//!
//! The EH transmitter starts at full power on its subcarrier `nbar`. Each
//! iteration re-solves the ID allocation exactly and, while the harvested
//! energy exceeds the constraint, lowers the EH power along the rate gradient
//! with a step that cannot undershoot the constraint. Once the constraint
//! binds, the search optionally continues along the dual-corrected gradient
//! `dR/dp1 = grad J + lambda |h11|^2` with a shrinking step, accepting only
//! rate improvements.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::error::{invalid, Result, SwiptError};
use crate::metrics::{dot, rate_unchecked, PowerAllocation, REPoint};

use super::dual::{solve_p2_dual, DualSolution, DualState};
use super::AlgoConfig;

/// Derivative of the achievable rate with respect to the EH power on one
/// subcarrier, given channel powers `g21 = |h21|^2` and `g22 = |h22|^2`. Never
/// positive.
pub fn gradient_j(p1: f64, p2: f64, g21: f64, g22: f64) -> f64 {
    let interference = 1.0 + p1 * g21;
    (1.0 / (interference + p2 * g22) - 1.0 / interference) * g21 / LN_2
}

/// Largest gradient step that keeps the harvested energy at or above `ebar`
/// for the current ID allocation:
/// `(ebar - E11 - E12) / (grad * |h11_nbar|^2)`.
///
/// `grad` must already be strictly negative.
pub fn max_step(ch: &ChannelSet, p1: &[f64], p2: &[f64], ebar: f64, grad: f64, nbar: usize) -> Result<f64> {
    if grad == 0.0 || grad.is_nan() {
        return Err(invalid("step bound needs a nonzero gradient; substitute alpha first"));
    }
    let energy = dot(p1, ch.g11()) + dot(p2, ch.g12());
    let denom = grad * ch.g11()[nbar];
    if denom == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((ebar - energy) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub p1_nbar: f64,
    pub rate: f64,
    pub energy: f64,
    pub lambda: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    /// Accepted iterates, starting with the full-power initialization.
    pub records: Vec<IterationRecord>,
    /// Iterations spent, including rejected probes.
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Algorithm1Outcome {
    pub nbar: usize,
    pub point: REPoint,
    pub p1: PowerAllocation,
    pub p2: PowerAllocation,
    pub dual: DualState,
    pub trace: IterationTrace,
}

struct Iterate {
    p1: Vec<f64>,
    sol: DualSolution,
    rate: f64,
    energy: f64,
}

impl Iterate {
    fn record(&self, nbar: usize) -> IterationRecord {
        IterationRecord {
            p1_nbar: self.p1[nbar],
            rate: self.rate,
            energy: self.energy,
            lambda: self.sol.dual.lambda,
            mu: self.sol.dual.mu,
        }
    }
}

/// Runs the EH power descent on subcarrier `nbar` (0-based) for the energy
/// constraint `ebar`.
pub fn run_algorithm1(
    ch: &ChannelSet,
    nbar: usize,
    ebar: f64,
    budget: f64,
    cfg: &AlgoConfig,
) -> Result<Algorithm1Outcome> {
    let n = ch.n_subcarriers();
    if nbar >= n {
        return Err(invalid(format!("subcarrier {nbar} out of range for {n} subcarriers")));
    }
    if !(ebar >= 0.0 && ebar.is_finite()) {
        return Err(invalid(format!("energy constraint must be nonnegative, got {ebar}")));
    }
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(invalid(format!("budget must be positive, got {budget}")));
    }
    cfg.validate()?;
    if ch.g22().iter().all(|g| *g == 0.0) {
        return Err(invalid("the ID link has no usable subcarrier"));
    }

    let (g11, g21, g22) = (ch.g11()[nbar], ch.g21()[nbar], ch.g22()[nbar]);
    let g12_max = ch.g12().iter().zip(ch.g22()).filter(|(_, g22)| **g22 > 0.0).map(|(g12, _)| *g12).fold(0.0, f64::max);
    let id_cap = budget * g12_max;
    let tol_e = cfg.energy_tolerance(ebar);

    let evaluate = |p1n: f64| -> Result<Iterate> {
        let mut p1 = vec![0.0; n];
        p1[nbar] = p1n;
        let sol = solve_p2_dual(ch, &p1, ebar, budget)?;
        let rate = rate_unchecked(ch, &p1, sol.p2.powers());
        let energy = p1n * g11 + sol.id_energy;
        Ok(Iterate { p1, sol, rate, energy })
    };

    let mut current = match evaluate(budget) {
        Ok(it) => it,
        Err(SwiptError::Infeasible { .. }) => return Ok(infeasible_outcome(ch, nbar, budget)),
        Err(e) => return Err(e),
    };
    let mut trace = IterationTrace { records: vec![current.record(nbar)], ..Default::default() };

    // Lowest EH power for which the ID side can still close the energy gap.
    let p1_floor = if g11 > 0.0 { (((ebar - id_cap) / g11).max(0.0) * (1.0 + 1e-9)).min(budget) } else { 0.0 };
    let mut probe = cfg.delta_frac * budget;
    let min_probe = 1e-7 * budget;

    while trace.iterations < cfg.i_max {
        trace.iterations += 1;
        let p1n = current.p1[nbar];
        let grad = gradient_j(p1n, current.sol.p2.powers()[nbar], g21, g22);
        let surplus = current.energy - ebar;

        if surplus > tol_e {
            if p1n == 0.0 {
                trace.converged = true;
                break;
            }
            let grad = if grad == 0.0 { cfg.alpha } else { grad };
            let delta_max = max_step(ch, &current.p1, current.sol.p2.powers(), ebar, grad, nbar)?;
            let delta = (cfg.delta_frac * budget / grad.abs()).min(delta_max);
            let next = (p1n + delta * grad).clamp(0.0, budget);
            current = evaluate(next)?;
            trace.records.push(current.record(nbar));
            continue;
        }

        let slope = grad + current.sol.dual.lambda * g11;
        if !cfg.dual_continuation || slope.is_nan() || slope >= 0.0 || p1n <= p1_floor {
            trace.converged = true;
            break;
        }
        let candidate = (p1n - probe).max(p1_floor);
        let accepted = match evaluate(candidate) {
            Ok(next) if next.rate > current.rate && next.energy >= ebar - tol_e => Some(next),
            Ok(_) | Err(SwiptError::Infeasible { .. }) => None,
            Err(e) => return Err(e),
        };
        match accepted {
            Some(next) => {
                let gain = next.rate - current.rate;
                current = next;
                trace.records.push(current.record(nbar));
                if gain < cfg.tol_rate && probe <= min_probe {
                    trace.converged = true;
                    break;
                }
            }
            None => {
                probe *= 0.5;
                if probe < min_probe {
                    trace.converged = true;
                    break;
                }
            }
        }
    }

    // Switching the EH transmitter off is always worth checking when the ID
    // transmitter can meet the constraint alone; rounding-level ties go to zero.
    if current.p1[nbar] > 0.0 && ebar <= id_cap {
        if let Ok(off) = evaluate(0.0) {
            if off.rate >= current.rate - 1e-12 * current.rate.abs() && off.energy >= ebar - tol_e {
                current = off;
                trace.records.push(current.record(nbar));
            }
        }
    }

    let point = REPoint { rate: current.rate, energy: current.energy, feasible: current.energy >= ebar - tol_e };
    Ok(Algorithm1Outcome {
        nbar,
        point,
        p1: PowerAllocation::from_raw(current.p1, budget),
        p2: current.sol.p2,
        dual: current.sol.dual,
        trace,
    })
}

fn infeasible_outcome(ch: &ChannelSet, nbar: usize, budget: f64) -> Algorithm1Outcome {
    let n = ch.n_subcarriers();
    let p1 = PowerAllocation::single(n, nbar, budget, budget);
    let best = (0..n)
        .filter(|i| ch.g22()[*i] > 0.0)
        .fold(None, |best: Option<usize>, i| match best {
            Some(b) if ch.g12()[b] >= ch.g12()[i] => Some(b),
            _ => Some(i),
        })
        .unwrap_or(0);
    let p2 = PowerAllocation::single(n, best, budget, budget);
    let point = REPoint {
        rate: rate_unchecked(ch, p1.powers(), p2.powers()),
        energy: dot(p1.powers(), ch.g11()) + dot(p2.powers(), ch.g12()),
        feasible: false,
    };
    Algorithm1Outcome {
        nbar,
        point,
        p1,
        p2,
        dual: DualState { lambda: f64::INFINITY, mu: f64::INFINITY },
        trace: IterationTrace::default(),
    }
}
