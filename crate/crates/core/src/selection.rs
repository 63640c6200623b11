//! Single-subcarrier selection rules for the EH transmitter.
//!
//! Subcarrier indices are 0-based. Every rule breaks ties towards the lowest
//! index.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::error::{invalid, SwiptError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyKind {
    /// Largest gain towards the EH receiver.
    #[serde(rename = "maxcg")]
    MaxCg,
    /// Smallest leakage towards the ID receiver.
    #[serde(rename = "mincg")]
    MinCg,
    /// Signal to leakage and energy ratio.
    #[serde(rename = "sler")]
    Sler,
    /// Signal to leakage ratio restricted to subcarriers meeting the energy constraint.
    #[serde(rename = "slrec")]
    Slrec,
    /// SLREC that prefers subcarriers the ID transmitter leaves unused.
    #[serde(rename = "slrec-sharing")]
    SlrecSharing,
    /// Best single subcarrier found by running the power allocation on all of them.
    #[serde(rename = "exhaustive")]
    Exhaustive,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::MaxCg,
        StrategyKind::MinCg,
        StrategyKind::Sler,
        StrategyKind::Slrec,
        StrategyKind::SlrecSharing,
        StrategyKind::Exhaustive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::MaxCg => "maxcg",
            StrategyKind::MinCg => "mincg",
            StrategyKind::Sler => "sler",
            StrategyKind::Slrec => "slrec",
            StrategyKind::SlrecSharing => "slrec-sharing",
            StrategyKind::Exhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = SwiptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            invalid(format!(
                "unknown strategy '{s}' (expected one of maxcg, mincg, sler, slrec, slrec-sharing, exhaustive)"
            ))
        })
    }
}

/// Inputs to the energy-aware selection rules.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionContext {
    /// Energy constraint in microwatts.
    pub ebar: f64,
    /// Transmit power budget in microwatts.
    pub budget: f64,
    pub beta: f64,
    /// Energy the EH receiver collects from the ID transmitter.
    pub e12: f64,
    /// Subcarriers the ID transmitter leaves unused, when shared.
    pub unutilized: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    Index(usize),
    /// No subcarrier can satisfy the energy constraint.
    Infeasible,
}

impl Selection {
    pub fn index(self) -> Option<usize> {
        match self {
            Selection::Index(n) => Some(n),
            Selection::Infeasible => None,
        }
    }
}

/// Position of the largest score, lowest index on ties. `+inf` scores are
/// allowed; NaN never wins.
fn argmax_by<I: Iterator<Item = (usize, f64)>>(scores: I) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (n, s) in scores {
        match best {
            _ if s.is_nan() => {}
            Some((_, b)) if s <= b => {}
            _ => best = Some((n, s)),
        }
    }
    best.map(|(n, _)| n)
}

/// `|h11|^2 / |h21|^2`, infinite for a leakage-free subcarrier that reaches the
/// EH receiver and zero when both gains vanish.
fn leakage_ratio(g11: f64, g21: f64) -> f64 {
    if g21 == 0.0 {
        if g11 > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        g11 / g21
    }
}

pub fn select_maxcg(ch: &ChannelSet) -> usize {
    argmax_by(ch.g11().iter().copied().enumerate()).unwrap_or(0)
}

pub fn select_mincg(ch: &ChannelSet) -> usize {
    argmax_by(ch.g21().iter().map(|g| -g).enumerate()).unwrap_or(0)
}

/// Maximizes `|h11|^2 / (|h21|^2 + beta * max(ebar/P - |h11|^2, 0))`. A zero
/// denominator counts as an infinite ratio.
pub fn select_sler(ch: &ChannelSet, ctx: &SelectionContext) -> usize {
    let need = ctx.ebar / ctx.budget;
    let scores = ch.g11().iter().zip(ch.g21()).map(|(&g11, &g21)| {
        let denom = g21 + ctx.beta * (need - g11).max(0.0);
        if denom == 0.0 {
            f64::INFINITY
        } else {
            g11 / denom
        }
    });
    argmax_by(scores.enumerate()).unwrap_or(0)
}

/// Subcarriers on which the full budget closes the energy gap left by the ID
/// transmitter: `P |h11_n|^2 >= ebar - e12`.
pub fn slrec_candidates(ch: &ChannelSet, ctx: &SelectionContext) -> Vec<usize> {
    let gap = ctx.ebar - ctx.e12;
    ch.g11().iter().enumerate().filter(|(_, g)| ctx.budget * **g >= gap).map(|(n, _)| n).collect()
}

pub fn select_slrec(ch: &ChannelSet, ctx: &SelectionContext) -> Selection {
    let candidates = slrec_candidates(ch, ctx);
    best_leakage_ratio(ch, &candidates)
}

fn best_leakage_ratio(ch: &ChannelSet, candidates: &[usize]) -> Selection {
    let scores = candidates.iter().map(|&n| (n, leakage_ratio(ch.g11()[n], ch.g21()[n])));
    match argmax_by(scores) {
        Some(n) => Selection::Index(n),
        None => Selection::Infeasible,
    }
}

/// SLREC with knowledge of the unused subcarriers: among energy-feasible
/// candidates that are unused by the ID transmitter pick the strongest EH gain,
/// otherwise fall back to plain SLREC.
pub fn select_slrec_sharing(ch: &ChannelSet, ctx: &SelectionContext) -> Selection {
    let candidates = slrec_candidates(ch, ctx);
    if candidates.is_empty() {
        return Selection::Infeasible;
    }
    let unused = ctx.unutilized.as_deref().unwrap_or(&[]);
    let free = candidates.iter().filter(|n| unused.contains(n)).map(|&n| (n, ch.g11()[n]));
    match argmax_by(free) {
        Some(n) => Selection::Index(n),
        None => best_leakage_ratio(ch, &candidates),
    }
}

/// Energy-only transmitter `k` (1 or 2): the subcarrier with the largest sum of
/// gains towards both receivers.
pub fn select_two_eh(ch: &ChannelSet, k: usize) -> usize {
    let (to_rx1, to_rx2) = match k {
        1 => (ch.g11(), ch.g21()),
        _ => (ch.g12(), ch.g22()),
    };
    argmax_by(to_rx1.iter().zip(to_rx2).map(|(a, b)| a + b).enumerate()).unwrap_or(0)
}

/// Dispatches the closed-form rules. Exhaustive search is not a closed-form
/// rule and yields `None`.
pub fn select(kind: StrategyKind, ch: &ChannelSet, ctx: &SelectionContext) -> Option<Selection> {
    Some(match kind {
        StrategyKind::MaxCg => Selection::Index(select_maxcg(ch)),
        StrategyKind::MinCg => Selection::Index(select_mincg(ch)),
        StrategyKind::Sler => Selection::Index(select_sler(ch, ctx)),
        StrategyKind::Slrec => select_slrec(ch, ctx),
        StrategyKind::SlrecSharing => select_slrec_sharing(ch, ctx),
        StrategyKind::Exhaustive => return None,
    })
}
