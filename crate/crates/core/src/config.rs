use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::optimizer::AlgoConfig;
use crate::selection::StrategyKind;

/// Every physical and algorithmic parameter of a simulation.
///
/// Powers are in microwatts. The noise power per subcarrier is the power unit
/// of every SNR in the crate, so `noise_uw` must stay at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n_subcarriers: usize,
    pub tap_count: usize,
    pub tap_decay: f64,
    /// Power path loss of the direct links (amplitude factor is its square root).
    pub pathloss_power: f64,
    /// Relative path loss of the cross links.
    pub delta_cross: f64,
    pub budget_uw: f64,
    pub noise_uw: f64,
    /// Energy harvesting efficiency.
    pub zeta: f64,
    /// Which receiver harvests energy: 1 for (EH1, ID2), 2 for (EH2, ID1).
    pub eh_user: u8,

    pub beta: f64,
    pub alpha: f64,
    pub delta_frac: f64,
    pub i_max: usize,
    pub tol_rate: f64,
    pub tol_energy_rel: f64,
    pub nash_tol_rel: f64,
    pub dual_continuation: bool,

    pub trials: usize,
    pub master_seed: u64,
    pub strategies: Vec<StrategyKind>,
    pub ebar_points: usize,
    /// Upper end of the energy grid; 0 selects the ensemble mean of the
    /// largest reachable energy.
    pub ebar_max_uw: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        let algo = AlgoConfig::default();
        Self {
            n_subcarriers: 8,
            tap_count: 3,
            tap_decay: 1.0,
            pathloss_power: 1e-3,
            delta_cross: 0.8,
            budget_uw: 5e4,
            noise_uw: 1.0,
            zeta: 1.0,
            eh_user: 1,
            beta: 1.0,
            alpha: algo.alpha,
            delta_frac: algo.delta_frac,
            i_max: algo.i_max,
            tol_rate: algo.tol_rate,
            tol_energy_rel: algo.tol_energy_rel,
            nash_tol_rel: algo.nash_tol_rel,
            dual_continuation: algo.dual_continuation,
            trials: 100,
            master_seed: 1,
            strategies: StrategyKind::ALL.to_vec(),
            ebar_points: 40,
            ebar_max_uw: 0.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers == 0 {
            return Err(invalid("n_subcarriers must be positive"));
        }
        if self.tap_count == 0 || self.tap_count > self.n_subcarriers {
            return Err(invalid(format!("tap_count must lie in 1..={}, got {}", self.n_subcarriers, self.tap_count)));
        }
        for (name, v) in
            [("tap_decay", self.tap_decay), ("pathloss_power", self.pathloss_power), ("budget_uw", self.budget_uw)]
        {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.delta_cross) {
            return Err(invalid(format!("delta_cross must lie in [0, 1], got {}", self.delta_cross)));
        }
        if self.noise_uw != 1.0 {
            return Err(invalid("noise_uw is the power unit and must equal 1"));
        }
        if self.zeta != 1.0 {
            return Err(invalid("only zeta = 1 is modeled"));
        }
        if !matches!(self.eh_user, 1 | 2) {
            return Err(invalid(format!("eh_user must be 1 or 2, got {}", self.eh_user)));
        }
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(invalid(format!("beta must be nonnegative, got {}", self.beta)));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.strategies.is_empty() {
            return Err(invalid("at least one strategy is required"));
        }
        if self.ebar_points == 0 {
            return Err(invalid("ebar_points must be at least 1"));
        }
        if !(self.ebar_max_uw >= 0.0 && self.ebar_max_uw.is_finite()) {
            return Err(invalid("ebar_max_uw must be nonnegative (0 = automatic)"));
        }
        self.algo_config().validate()
    }

    pub fn algo_config(&self) -> AlgoConfig {
        AlgoConfig {
            i_max: self.i_max,
            alpha: self.alpha,
            delta_frac: self.delta_frac,
            tol_rate: self.tol_rate,
            tol_energy_rel: self.tol_energy_rel,
            nash_tol_rel: self.nash_tol_rel,
            dual_continuation: self.dual_continuation,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let bad = [
            SimConfig { delta_cross: 1.5, ..Default::default() },
            SimConfig { tap_count: 9, ..Default::default() },
            SimConfig { budget_uw: 0.0, ..Default::default() },
            SimConfig { noise_uw: 2.0, ..Default::default() },
            SimConfig { alpha: 0.1, ..Default::default() },
            SimConfig { strategies: vec![], ..Default::default() },
            SimConfig { eh_user: 3, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }
}
