//! Power allocation for the (EH1, ID2) pair and the two-ID baseline.
//!
//! The EH transmitter's single-subcarrier power is driven down by steepest
//! descent on the achievable rate; for every EH power the ID transmitter's
//! allocation is the exact maximizer of its rate under the power budget and
//! the residual energy constraint, obtained from the Lagrangian dual.

mod algorithm1;
mod dual;
mod nash;
mod waterfill;

pub use algorithm1::{gradient_j, max_step, run_algorithm1, Algorithm1Outcome, IterationRecord, IterationTrace};
pub use dual::{allocation_at, solve_p2_dual, DualSolution, DualState};
pub use nash::{best_response, iterative_waterfilling_2id, NashOutcome};
pub use waterfill::{waterfill, Waterfill};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgoConfig {
    pub i_max: usize,
    /// Gradient used when the true gradient vanishes; must be negative.
    pub alpha: f64,
    /// Largest EH power decrement per iteration, as a fraction of the budget.
    pub delta_frac: f64,
    /// Rate change (bits) below which the EH power search stops.
    pub tol_rate: f64,
    /// Energy tolerance relative to `max(ebar, 1 uW)`.
    pub tol_energy_rel: f64,
    /// Best-response convergence threshold of the two-ID game, relative to the budget.
    pub nash_tol_rel: f64,
    /// Keep lowering the EH power after the energy constraint binds, as long
    /// as the rate keeps improving.
    pub dual_continuation: bool,
}

impl Default for AlgoConfig {
    fn default() -> Self {
        Self {
            i_max: 500,
            alpha: -1e-3,
            delta_frac: 0.05,
            tol_rate: 1e-6,
            tol_energy_rel: 1e-4,
            nash_tol_rel: 1e-9,
            dual_continuation: true,
        }
    }
}

impl AlgoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.i_max == 0 {
            return Err(invalid("i_max must be at least 1"));
        }
        if !(self.alpha < 0.0 && self.alpha.is_finite()) {
            return Err(invalid(format!("alpha must be negative, got {}", self.alpha)));
        }
        if !(self.delta_frac > 0.0 && self.delta_frac <= 1.0) {
            return Err(invalid(format!("delta_frac must lie in (0, 1], got {}", self.delta_frac)));
        }
        for (name, v) in
            [("tol_rate", self.tol_rate), ("tol_energy_rel", self.tol_energy_rel), ("nash_tol_rel", self.nash_tol_rel)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub(crate) fn energy_tolerance(&self, ebar: f64) -> f64 {
        self.tol_energy_rel * ebar.max(1.0)
    }
}
