//! Achievable rate and harvested energy for diagonal (per-subcarrier) channels.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::error::{invalid, Result, SwiptError};

/// Nonnegative per-subcarrier transmit powers of one transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    p: Vec<f64>,
    budget: f64,
}

impl PowerAllocation {
    pub fn new(p: Vec<f64>, budget: f64) -> Result<Self> {
        if !(budget >= 0.0 && budget.is_finite()) {
            return Err(invalid(format!("power budget must be nonnegative, got {budget}")));
        }
        if let Some(x) = p.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
            return Err(invalid(format!("power {x} is not a finite nonnegative value")));
        }
        let total: f64 = p.iter().sum();
        if total > budget * (1.0 + 1e-9) {
            return Err(invalid(format!("total power {total} exceeds the budget {budget}")));
        }
        Ok(Self { p, budget })
    }

    pub fn zeros(n: usize, budget: f64) -> Self {
        Self { p: vec![0.0; n], budget }
    }

    /// All of `budget` on subcarrier `index`.
    pub fn single(n: usize, index: usize, power: f64, budget: f64) -> Self {
        let mut p = vec![0.0; n];
        p[index] = power;
        Self { p, budget }
    }

    pub(crate) fn from_raw(p: Vec<f64>, budget: f64) -> Self {
        Self { p, budget }
    }

    pub fn powers(&self) -> &[f64] {
        &self.p
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Subcarriers carrying no power.
    pub fn zero_set(&self) -> Vec<usize> {
        self.p.iter().enumerate().filter(|(_, x)| **x == 0.0).map(|(n, _)| n).collect()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.p
    }
}

/// Received powers at the ID receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkDiagnostics {
    /// Interference from the EH transmitter, `p1_n * |h21_n|^2`.
    pub a: Vec<f64>,
    /// Desired signal, `p2_n * |h22_n|^2`.
    pub b: Vec<f64>,
}

/// One sample of the rate-energy region: rate in bits per OFDM symbol,
/// harvested energy in microwatts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct REPoint {
    pub rate: f64,
    pub energy: f64,
    pub feasible: bool,
}

fn check_len(ch: &ChannelSet, p: &[f64]) -> Result<()> {
    let n = ch.n_subcarriers();
    if p.len() != n {
        return Err(SwiptError::DimensionMismatch { expected: n, got: p.len() });
    }
    Ok(())
}

pub fn link_diagnostics(ch: &ChannelSet, p1: &[f64], p2: &[f64]) -> Result<LinkDiagnostics> {
    check_len(ch, p1)?;
    check_len(ch, p2)?;
    Ok(LinkDiagnostics {
        a: p1.iter().zip(ch.g21()).map(|(p, g)| p * g).collect(),
        b: p2.iter().zip(ch.g22()).map(|(p, g)| p * g).collect(),
    })
}

/// `sum_n log2(1 + b_n / (1 + a_n))`.
///
/// Subcarriers the ID transmitter leaves empty contribute nothing whatever the
/// interference on them, so this also covers the rate with shared unutilized
/// subcarriers.
pub fn achievable_rate(ch: &ChannelSet, p1: &[f64], p2: &[f64]) -> Result<f64> {
    check_len(ch, p1)?;
    check_len(ch, p2)?;
    Ok(rate_unchecked(ch, p1, p2))
}

pub(crate) fn rate_unchecked(ch: &ChannelSet, p1: &[f64], p2: &[f64]) -> f64 {
    p1.iter()
        .zip(p2)
        .zip(ch.g21().iter().zip(ch.g22()))
        .map(|((p1, p2), (g21, g22))| (p2 * g22 / (1.0 + p1 * g21)).ln_1p())
        .sum::<f64>()
        / std::f64::consts::LN_2
}

/// Total energy at the EH receiver, `sum_n p1_n |h11_n|^2 + p2_n |h12_n|^2`.
pub fn harvested_energy(ch: &ChannelSet, p1: &[f64], p2: &[f64]) -> Result<f64> {
    check_len(ch, p1)?;
    check_len(ch, p2)?;
    Ok(dot(p1, ch.g11()) + dot(p2, ch.g12()))
}

/// Energy the EH receiver collects from the ID transmitter.
pub fn energy_from_id(ch: &ChannelSet, p2: &[f64]) -> f64 {
    dot(p2, ch.g12())
}

/// Energy the EH receiver collects from its own transmitter.
pub fn energy_from_eh(ch: &ChannelSet, p1: &[f64]) -> f64 {
    dot(p1, ch.g11())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
