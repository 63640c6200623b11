//! ID transmitter allocation for a fixed EH allocation.
//!
//! Maximizes `sum_n log2(1 + p_n |h22_n|^2 / (1 + a_n))` subject to
//! `sum_n p_n <= P` and `sum_n p_n |h12_n|^2 >= ebar - E11`. Stationarity of the
//! Lagrangian gives, per subcarrier,
//!
//! ```text
//! p_n = ( 1 / (ln2 (mu - lambda |h12_n|^2)) - (1 + a_n) / |h22_n|^2 )^+
//! ```
//!
//! Both dual components are monotone in their multiplier once the other is
//! eliminated: for fixed `lambda` the total power falls with `mu`, and with the
//! budget kept tight the delivered energy rises with `lambda`. Each multiplier
//! is therefore located by a bracketed root search on its own subgradient
//! component.

use std::f64::consts::LN_2;

use crate::channel::ChannelSet;
use crate::error::{invalid, Result, SwiptError};
use crate::metrics::{dot, energy_from_eh, PowerAllocation};
use crate::roots::bracket_root;

use super::waterfill::waterfill;

/// Lagrange multipliers of the energy (`lambda`) and power (`mu`) constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualState {
    pub lambda: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub p2: PowerAllocation,
    pub dual: DualState,
    /// Energy the ID transmitter must deliver, `ebar - E11` (may be negative).
    pub energy_target: f64,
    /// Energy it actually delivers, `E12`.
    pub id_energy: f64,
}

impl DualSolution {
    pub fn energy_constraint_active(&self) -> bool {
        self.dual.lambda > 0.0
    }
}

/// Evaluates the stationarity condition at `(lambda, mu)`. Subcarriers on
/// which `mu <= lambda |h12_n|^2` would have unbounded power; they are capped at
/// `budget`, which never happens for multipliers returned by [`solve_p2_dual`].
pub fn allocation_at(ch: &ChannelSet, p1: &[f64], dual: DualState, budget: f64) -> Vec<f64> {
    (0..ch.n_subcarriers())
        .map(|n| {
            let g22 = ch.g22()[n];
            if g22 == 0.0 {
                return 0.0;
            }
            let floor = (1.0 + p1[n] * ch.g21()[n]) / g22;
            let margin = dual.mu - dual.lambda * ch.g12()[n];
            if margin <= 1e-12 * dual.mu.abs().max(f64::MIN_POSITIVE) {
                return budget;
            }
            (1.0 / (LN_2 * margin) - floor).max(0.0)
        })
        .collect()
}

struct Subproblem<'a> {
    g12: &'a [f64],
    /// `(1 + a_n) / |h22_n|^2`, infinite where the ID link is dead.
    floor: Vec<f64>,
    /// Largest `|h12_n|^2` over subcarriers the ID link can use.
    g12_max: f64,
    g12_argmax: usize,
    budget: f64,
}

impl Subproblem<'_> {
    /// Allocation for a given `lambda` with `mu` chosen so the budget is spent.
    /// Returns the powers and `mu`.
    fn tight_budget(&self, lambda: f64) -> (Vec<f64>, f64) {
        // Parametrize mu = lambda * g12_max + s with s > 0 to stay inside the
        // domain where every denominator is positive.
        let offsets: Vec<f64> = self.g12.iter().map(|g| lambda * (self.g12_max - g)).collect();
        let powers = |s: f64| -> Vec<f64> {
            self.floor
                .iter()
                .zip(&offsets)
                .map(|(c, o)| if c.is_finite() { (1.0 / (LN_2 * (s + o)) - c).max(0.0) } else { 0.0 })
                .collect()
        };
        let c_star = self.floor[self.g12_argmax];
        let c_min = self.floor.iter().copied().fold(f64::INFINITY, f64::min);
        let lo = (0.5 / (LN_2 * (self.budget + c_star))).ln();
        let hi = (1.0 / (LN_2 * c_min)).ln();
        let budget = self.budget;
        let (u_lo, u_hi) =
            bracket_root(|u| powers(u.exp()).iter().sum::<f64>() - budget, lo, hi, 1e-15 * hi.abs().max(1.0), 300);
        let s = (0.5 * (u_lo + u_hi)).exp();
        (powers(s), lambda * self.g12_max + s)
    }
}

/// Optimal ID allocation for the EH powers `p1` under the energy constraint
/// `ebar`. Returns [`SwiptError::Infeasible`] when even the energy-greedy ID
/// allocation cannot close the gap `ebar - E11`.
pub fn solve_p2_dual(ch: &ChannelSet, p1: &[f64], ebar: f64, budget: f64) -> Result<DualSolution> {
    let n = ch.n_subcarriers();
    if p1.len() != n {
        return Err(SwiptError::DimensionMismatch { expected: n, got: p1.len() });
    }
    if !(ebar >= 0.0 && ebar.is_finite()) {
        return Err(invalid(format!("energy constraint must be nonnegative, got {ebar}")));
    }
    let target = ebar - energy_from_eh(ch, p1);

    let effective: Vec<f64> = (0..n).map(|i| ch.g22()[i] / (1.0 + p1[i] * ch.g21()[i])).collect();
    let wf = waterfill(&effective, budget)?;
    let wf_energy = dot(wf.allocation.powers(), ch.g12());
    // Shortfalls at rounding level count as met.
    if wf_energy >= target - 1e-12 * ebar {
        return Ok(DualSolution {
            dual: DualState { lambda: 0.0, mu: 1.0 / (LN_2 * wf.level) },
            p2: wf.allocation,
            energy_target: target,
            id_energy: wf_energy,
        });
    }

    let floor: Vec<f64> = (0..n)
        .map(|i| {
            let g22 = ch.g22()[i];
            if g22 > 0.0 {
                (1.0 + p1[i] * ch.g21()[i]) / g22
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let (g12_argmax, g12_max) = (0..n)
        .filter(|i| floor[*i].is_finite())
        .map(|i| (i, ch.g12()[i]))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    let cap = budget * g12_max;
    if target > cap {
        return Err(SwiptError::Infeasible { ebar, max_energy: ebar - target + cap });
    }
    if target >= cap * (1.0 - 1e-12) {
        // Boundary: only the energy-greedy allocation meets the constraint.
        let p2 = PowerAllocation::single(n, g12_argmax, budget, budget);
        let mu = ch.g12()[g12_argmax] * f64::MAX.sqrt();
        return Ok(DualSolution {
            id_energy: cap,
            p2,
            dual: DualState { lambda: f64::MAX.sqrt(), mu },
            energy_target: target,
        });
    }

    let sub = Subproblem { g12: ch.g12(), floor, g12_max, g12_argmax, budget };
    let energy = |lambda: f64| {
        let (p, _) = sub.tight_budget(lambda);
        dot(&p, ch.g12())
    };

    // Grow the bracket from the scale at which lambda |h12|^2 matches mu.
    let mu0 = 1.0 / (LN_2 * wf.level);
    let mut hi = mu0 / g12_max;
    let mut grown = 0;
    while energy(hi) < target {
        hi *= 4.0;
        grown += 1;
        if grown > 500 {
            return Err(invalid("energy multiplier search diverged"));
        }
    }
    let (_, lambda) = bracket_root(|l| energy(l) - target, 0.0, hi, 1e-14 * hi, 300);
    let (p, mu) = sub.tight_budget(lambda);
    let id_energy = dot(&p, ch.g12());
    Ok(DualSolution {
        p2: PowerAllocation::from_raw(p, budget),
        dual: DualState { lambda, mu },
        energy_target: target,
        id_energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::rate_unchecked;
    use approx::assert_relative_eq;

    fn example() -> ChannelSet {
        ChannelSet::from_powers(
            &[1e-3, 2e-3, 5e-4, 1e-3],
            &[2e-3, 1e-4, 5e-4, 8e-4],
            &[1e-3, 5e-4, 2e-3, 1e-4],
            &[1e-3, 2e-3, 1.5e-3, 4e-4],
        )
        .unwrap()
    }

    #[test]
    fn inactive_constraint_is_plain_waterfilling() {
        let ch = example();
        let p1 = [0.0, 1000.0, 0.0, 0.0];
        let sol = solve_p2_dual(&ch, &p1, 0.0, 1e4).unwrap();
        let eff: Vec<f64> = (0..4).map(|i| ch.g22()[i] / (1.0 + p1[i] * ch.g21()[i])).collect();
        let wf = waterfill(&eff, 1e4).unwrap();
        assert_eq!(sol.p2, wf.allocation);
        assert_eq!(sol.dual.lambda, 0.0);
    }

    #[test]
    fn active_constraint_is_met_with_tight_budget() {
        let ch = example();
        let p1 = [0.0; 4];
        let budget = 1e4;
        let wf = solve_p2_dual(&ch, &p1, 0.0, budget).unwrap();
        let ebar = 0.5 * (wf.id_energy + budget * 2e-3);
        let sol = solve_p2_dual(&ch, &p1, ebar, budget).unwrap();
        assert!(sol.dual.lambda > 0.0);
        assert!(sol.id_energy >= ebar);
        assert!(sol.id_energy - ebar <= 1e-8 * ebar);
        assert_relative_eq!(sol.p2.total(), budget, max_relative = 1e-10);
        let again = allocation_at(&ch, &p1, sol.dual, budget);
        for (a, b) in again.iter().zip(sol.p2.powers()) {
            assert!((a - b).abs() <= 1e-8 * budget);
        }
        assert!(rate_unchecked(&ch, &p1, sol.p2.powers()) < rate_unchecked(&ch, &p1, wf.p2.powers()));
    }

    #[test]
    fn infeasible_target() {
        let ch = example();
        let err = solve_p2_dual(&ch, &[0.0; 4], 1e4 * 2e-3 * 1.01, 1e4).unwrap_err();
        assert!(matches!(err, SwiptError::Infeasible { .. }));
    }

    #[test]
    fn eh_energy_relaxes_the_target() {
        let ch = example();
        let budget = 1e4;
        let ebar = 15.0;
        let without = solve_p2_dual(&ch, &[0.0; 4], ebar, budget).unwrap();
        let with = solve_p2_dual(&ch, &[0.0, 0.0, 0.0, 1e4], ebar, budget).unwrap();
        assert!(without.dual.lambda > 0.0);
        assert_relative_eq!(with.energy_target, ebar - 10.0, epsilon = 1e-12);
    }
}
