//! Rate-energy curves: energy sweeps per strategy, the exhaustive single
//! subcarrier upper bound, Monte Carlo averaging and a brute-force check of
//! single-subcarrier optimality.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{trial_channels, ChannelSet};
use crate::config::SimConfig;
use crate::error::{invalid, Result, SwiptError};
use crate::metrics::{dot, rate_unchecked, PowerAllocation, REPoint};
use crate::optimizer::{run_algorithm1, solve_p2_dual, waterfill, AlgoConfig, Algorithm1Outcome};
use crate::selection::{select, Selection, SelectionContext, StrategyKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub ebar: f64,
    /// Mean rate over the feasible trials (NaN when none is feasible).
    pub rate: f64,
    /// Mean harvested energy over the feasible trials.
    pub energy: f64,
    pub feasible_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RECurve {
    pub strategy: StrategyKind,
    /// Ordered by increasing `ebar`.
    pub points: Vec<CurvePoint>,
    pub trials: usize,
}

/// What the ID transmitter does when the EH transmitter is silent. SLREC uses
/// its harvested energy and the sharing variant its unused subcarriers; the
/// simulator evaluates both with full knowledge of the channels.
#[derive(Debug, Clone, PartialEq)]
pub struct IdReference {
    pub p2: PowerAllocation,
    pub e12: f64,
    pub unutilized: Vec<usize>,
    pub rate: f64,
}

impl IdReference {
    pub fn new(ch: &ChannelSet, budget: f64) -> Result<Self> {
        let p2 = waterfill(ch.g22(), budget)?.allocation;
        let e12 = dot(p2.powers(), ch.g12());
        let rate = rate_unchecked(ch, &vec![0.0; ch.n_subcarriers()], p2.powers());
        let unutilized = p2.zero_set();
        Ok(Self { p2, e12, unutilized, rate })
    }

    pub fn context(&self, ebar: f64, budget: f64, beta: f64) -> SelectionContext {
        SelectionContext { ebar, budget, beta, e12: self.e12, unutilized: Some(self.unutilized.clone()) }
    }
}

/// Result of one strategy at one energy constraint on one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyPoint {
    pub ebar: f64,
    /// `None` when the selection rule found no feasible subcarrier.
    pub outcome: Option<Algorithm1Outcome>,
}

impl StrategyPoint {
    pub fn point(&self) -> REPoint {
        match &self.outcome {
            Some(o) => o.point,
            None => REPoint { rate: 0.0, energy: 0.0, feasible: false },
        }
    }

    pub fn nbar(&self) -> Option<usize> {
        self.outcome.as_ref().map(|o| o.nbar)
    }
}

/// Solves all strategies on one realization, sharing the per-subcarrier runs
/// between strategies that pick the same subcarrier.
pub struct RealizationSolver<'a> {
    ch: &'a ChannelSet,
    budget: f64,
    beta: f64,
    cfg: AlgoConfig,
    reference: IdReference,
}

impl<'a> RealizationSolver<'a> {
    pub fn new(ch: &'a ChannelSet, budget: f64, beta: f64, cfg: AlgoConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { ch, budget, beta, cfg, reference: IdReference::new(ch, budget)? })
    }

    pub fn reference(&self) -> &IdReference {
        &self.reference
    }

    /// Every strategy in `strategies` at one energy constraint, in order.
    pub fn solve_at(&self, strategies: &[StrategyKind], ebar: f64) -> Result<Vec<StrategyPoint>> {
        let n = self.ch.n_subcarriers();
        let mut runs: Vec<Option<Algorithm1Outcome>> = vec![None; n];
        let mut run = |nbar: usize| -> Result<Algorithm1Outcome> {
            if runs[nbar].is_none() {
                runs[nbar] = Some(run_algorithm1(self.ch, nbar, ebar, self.budget, &self.cfg)?);
            }
            Ok(runs[nbar].clone().expect("cached above"))
        };
        let ctx = self.reference.context(ebar, self.budget, self.beta);
        strategies
            .iter()
            .map(|&kind| {
                let outcome = match select(kind, self.ch, &ctx) {
                    Some(Selection::Index(nbar)) => Some(run(nbar)?),
                    Some(Selection::Infeasible) => None,
                    None => {
                        let all = (0..n).map(&mut run).collect::<Result<Vec<_>>>()?;
                        best_feasible(all)
                    }
                };
                Ok(StrategyPoint { ebar, outcome })
            })
            .collect()
    }
}

fn best_feasible(outcomes: Vec<Algorithm1Outcome>) -> Option<Algorithm1Outcome> {
    let mut best: Option<Algorithm1Outcome> = None;
    let mut fallback: Option<Algorithm1Outcome> = None;
    for o in outcomes {
        if o.point.feasible {
            if best.as_ref().is_none_or(|b| o.point.rate > b.point.rate) {
                best = Some(o);
            }
        } else if fallback.is_none() {
            fallback = Some(o);
        }
    }
    best.or(fallback)
}

/// Runs the power allocation on every subcarrier and keeps the feasible run
/// with the highest rate (lowest index on ties). Requires global channel
/// knowledge at the EH transmitter.
pub fn exhaustive_search(ch: &ChannelSet, ebar: f64, budget: f64, cfg: &AlgoConfig) -> Result<Algorithm1Outcome> {
    let all =
        (0..ch.n_subcarriers()).map(|nbar| run_algorithm1(ch, nbar, ebar, budget, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(best_feasible(all).expect("at least one subcarrier"))
}

/// One strategy over an increasing grid of energy constraints.
pub fn sweep_points(
    ch: &ChannelSet,
    strategy: StrategyKind,
    ebar_grid: &[f64],
    budget: f64,
    beta: f64,
    cfg: &AlgoConfig,
) -> Result<Vec<StrategyPoint>> {
    check_grid(ebar_grid)?;
    let solver = RealizationSolver::new(ch, budget, beta, *cfg)?;
    ebar_grid.iter().map(|&ebar| Ok(solver.solve_at(&[strategy], ebar)?.remove(0))).collect()
}

/// Single-realization R-E curve (`trials = 1`).
pub fn sweep_re_region(
    ch: &ChannelSet,
    strategy: StrategyKind,
    ebar_grid: &[f64],
    budget: f64,
    beta: f64,
    cfg: &AlgoConfig,
) -> Result<RECurve> {
    let points = sweep_points(ch, strategy, ebar_grid, budget, beta, cfg)?;
    let mut acc = Accumulator::new(ebar_grid);
    acc.add(points.iter().map(StrategyPoint::point));
    Ok(acc.finish(strategy))
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid("energy grid must not be empty"));
    }
    if grid.iter().any(|e| !(*e >= 0.0 && e.is_finite())) {
        return Err(invalid("energy grid values must be finite and nonnegative"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("energy grid must be strictly increasing"));
    }
    Ok(())
}

/// Largest energy the EH receiver can collect: both transmitters at full power
/// on their strongest subcarrier towards it.
pub fn max_reachable_energy(ch: &ChannelSet, budget: f64) -> f64 {
    let g11 = ch.g11().iter().copied().fold(0.0, f64::max);
    let g12 = ch.g12().iter().zip(ch.g22()).filter(|(_, g22)| **g22 > 0.0).map(|(g, _)| *g).fold(0.0, f64::max);
    budget * (g11 + g12)
}

/// `points` evenly spaced constraints from 0 to `max`.
pub fn uniform_grid(max: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![0.0];
    }
    (0..points).map(|k| max * k as f64 / (points - 1) as f64).collect()
}

/// The common energy grid of a Monte Carlo run.
pub fn ensemble_grid(cfg: &SimConfig, channels: &[ChannelSet]) -> Vec<f64> {
    let max = if cfg.ebar_max_uw > 0.0 {
        cfg.ebar_max_uw
    } else {
        channels.iter().map(|ch| max_reachable_energy(ch, cfg.budget_uw)).sum::<f64>() / channels.len() as f64
    };
    uniform_grid(max, cfg.ebar_points)
}

struct Accumulator {
    grid: Vec<f64>,
    rate: Vec<f64>,
    energy: Vec<f64>,
    feasible: Vec<usize>,
    trials: usize,
}

impl Accumulator {
    fn new(grid: &[f64]) -> Self {
        let k = grid.len();
        Self { grid: grid.to_vec(), rate: vec![0.0; k], energy: vec![0.0; k], feasible: vec![0; k], trials: 0 }
    }

    fn add(&mut self, points: impl Iterator<Item = REPoint>) {
        for (i, p) in points.enumerate() {
            if p.feasible {
                self.rate[i] += p.rate;
                self.energy[i] += p.energy;
                self.feasible[i] += 1;
            }
        }
        self.trials += 1;
    }

    fn finish(self, strategy: StrategyKind) -> RECurve {
        let trials = self.trials;
        let points = (0..self.grid.len())
            .map(|i| {
                let k = self.feasible[i];
                let mean = |s: f64| if k > 0 { s / k as f64 } else { f64::NAN };
                CurvePoint {
                    ebar: self.grid[i],
                    rate: mean(self.rate[i]),
                    energy: mean(self.energy[i]),
                    feasible_fraction: k as f64 / trials as f64,
                }
            })
            .collect();
        RECurve { strategy, points, trials }
    }
}

/// Averages R-E curves over `cfg.trials` seeded channel realizations.
///
/// Trials run on the current rayon pool; the reduction happens in trial order
/// so the result does not depend on the number of threads.
pub fn monte_carlo_region(cfg: &SimConfig) -> Result<Vec<RECurve>> {
    cfg.validate()?;
    let channels = (0..cfg.trials as u64).map(|t| trial_channels(cfg, t)).collect::<Result<Vec<_>>>()?;
    let grid = ensemble_grid(cfg, &channels);
    let algo = cfg.algo_config();

    let per_trial: Vec<Vec<Vec<REPoint>>> = channels
        .par_iter()
        .map(|ch| -> Result<Vec<Vec<REPoint>>> {
            let solver = RealizationSolver::new(ch, cfg.budget_uw, cfg.beta, algo)?;
            // [ebar][strategy]
            grid.iter()
                .map(|&ebar| Ok(solver.solve_at(&cfg.strategies, ebar)?.iter().map(StrategyPoint::point).collect()))
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(cfg
        .strategies
        .iter()
        .enumerate()
        .map(|(s, &kind)| {
            let mut acc = Accumulator::new(&grid);
            for trial in &per_trial {
                acc.add(trial.iter().map(|at_ebar| at_ebar[s]));
            }
            acc.finish(kind)
        })
        .collect())
}

/// Best rates found when the EH transmitter spreads its power over `m`
/// subcarriers.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposition1Report {
    pub ebar: f64,
    /// `best_rate[m - 1]`; `None` when no allocation of that order met the
    /// energy constraint.
    pub best_rate: Vec<Option<f64>>,
}

impl Proposition1Report {
    pub fn overall_best(&self) -> Option<f64> {
        self.best_rate.iter().flatten().copied().reduce(f64::max)
    }

    /// Whether the single-subcarrier rate is within `tol` bits of the best.
    pub fn single_subcarrier_optimal(&self, tol: f64) -> bool {
        match (self.best_rate[0], self.overall_best()) {
            (Some(one), Some(best)) => one >= best - tol,
            (None, None) => true,
            _ => false,
        }
    }
}

/// Brute-force comparison of single- and multi-subcarrier EH transmission.
///
/// `m = 1` is the exhaustive single-subcarrier search. For `m >= 2` the EH
/// power is spread uniformly over every `m`-subset with total power on a grid
/// of `grid_steps` levels (zero included), and the ID allocation is solved
/// exactly for each. The multi-subcarrier figures are therefore lower bounds
/// on the true optimum that tighten with `grid_steps`.
pub fn verify_proposition1(
    ch: &ChannelSet,
    ebar: f64,
    budget: f64,
    m_max: usize,
    grid_steps: usize,
    cfg: &AlgoConfig,
) -> Result<Proposition1Report> {
    let n = ch.n_subcarriers();
    if m_max == 0 || m_max > n {
        return Err(invalid(format!("m_max must lie in 1..={n}, got {m_max}")));
    }
    if n > 20 {
        return Err(invalid("subset enumeration is limited to 20 subcarriers"));
    }
    if grid_steps == 0 {
        return Err(invalid("grid_steps must be at least 1"));
    }
    let tol_e = cfg.energy_tolerance(ebar);
    let single = exhaustive_search(ch, ebar, budget, cfg)?;
    let mut best_rate = vec![single.point.feasible.then_some(single.point.rate)];

    for m in 2..=m_max {
        let mut best: Option<f64> = None;
        for mask in (0u32..1 << n).filter(|mask| mask.count_ones() as usize == m) {
            for k in 0..=grid_steps {
                let each = budget * k as f64 / grid_steps as f64 / m as f64;
                let p1: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { each } else { 0.0 }).collect();
                let sol = match solve_p2_dual(ch, &p1, ebar, budget) {
                    Ok(sol) => sol,
                    Err(SwiptError::Infeasible { .. }) => continue,
                    Err(e) => return Err(e),
                };
                if dot(&p1, ch.g11()) + sol.id_energy < ebar - tol_e {
                    continue;
                }
                let rate = rate_unchecked(ch, &p1, sol.p2.powers());
                if best.is_none_or(|b| rate > b) {
                    best = Some(rate);
                }
            }
        }
        best_rate.push(best);
    }
    Ok(Proposition1Report { ebar, best_rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::trial_channels;

    fn cfg() -> SimConfig {
        SimConfig::default()
    }

    #[test]
    fn zero_constraint_gives_interference_free_rate() {
        let c = cfg();
        let ch = trial_channels(&c, 0).unwrap();
        let reference = IdReference::new(&ch, c.budget_uw).unwrap();
        for kind in StrategyKind::ALL {
            let curve = sweep_re_region(&ch, kind, &[0.0], c.budget_uw, c.beta, &c.algo_config()).unwrap();
            assert_eq!(curve.points.len(), 1);
            assert_eq!(curve.points[0].rate, reference.rate, "{kind}");
            assert!((curve.points[0].energy - reference.e12).abs() < 1e-9 * reference.e12);
        }
    }

    #[test]
    fn grid_must_increase() {
        let c = cfg();
        let ch = trial_channels(&c, 0).unwrap();
        let a = c.algo_config();
        assert!(sweep_re_region(&ch, StrategyKind::MaxCg, &[], 1.0, 1.0, &a).is_err());
        assert!(sweep_re_region(&ch, StrategyKind::MaxCg, &[1.0, 1.0], 1.0, 1.0, &a).is_err());
    }

    #[test]
    fn exhaustive_is_an_upper_bound() {
        let c = cfg();
        let ch = trial_channels(&c, 3).unwrap();
        let solver = RealizationSolver::new(&ch, c.budget_uw, c.beta, c.algo_config()).unwrap();
        let grid = uniform_grid(max_reachable_energy(&ch, c.budget_uw), 12);
        for ebar in grid {
            let pts = solver.solve_at(&StrategyKind::ALL, ebar).unwrap();
            let ex = pts[5].point();
            for p in &pts[..5] {
                let p = p.point();
                if p.feasible {
                    assert!(ex.feasible && ex.rate >= p.rate - 1e-6);
                }
            }
        }
    }

    #[test]
    fn single_subcarrier_exhaustive() {
        let ch = ChannelSet::from_powers(&[2e-3], &[1e-3], &[5e-4], &[1e-3]).unwrap();
        let a = AlgoConfig::default();
        let ex = exhaustive_search(&ch, 30.0, 1e4, &a).unwrap();
        let direct = run_algorithm1(&ch, 0, 30.0, 1e4, &a).unwrap();
        assert_eq!(ex, direct);
    }

    #[test]
    fn ensemble_curve_shapes() {
        let c = SimConfig { trials: 3, ebar_points: 6, ..cfg() };
        let curves = monte_carlo_region(&c).unwrap();
        assert_eq!(curves.len(), 6);
        for curve in &curves {
            assert_eq!(curve.trials, 3);
            assert_eq!(curve.points.len(), 6);
            assert!(curve.points.windows(2).all(|w| w[0].ebar < w[1].ebar));
            assert!(curve.points.iter().all(|p| (0.0..=1.0).contains(&p.feasible_fraction)));
        }
        // NaN marks all-infeasible points, so compare the printed form
        assert_eq!(format!("{:?}", monte_carlo_region(&c).unwrap()), format!("{curves:?}"));
    }

    #[test]
    fn one_trial_equals_single_sweep() {
        let c = SimConfig { trials: 1, ebar_points: 5, strategies: vec![StrategyKind::Slrec], ..cfg() };
        let ch = trial_channels(&c, 0).unwrap();
        let grid = uniform_grid(max_reachable_energy(&ch, c.budget_uw), 5);
        let single = sweep_re_region(&ch, StrategyKind::Slrec, &grid, c.budget_uw, c.beta, &c.algo_config()).unwrap();
        assert_eq!(format!("{:?}", monte_carlo_region(&c).unwrap()), format!("{:?}", vec![single]));
    }

    #[test]
    fn proposition1_degenerate_cases() {
        let c = SimConfig { n_subcarriers: 3, ..cfg() };
        let ch = trial_channels(&c, 0).unwrap();
        let a = c.algo_config();
        let ebar = 0.5 * max_reachable_energy(&ch, c.budget_uw);
        let one = verify_proposition1(&ch, ebar, c.budget_uw, 1, 10, &a).unwrap();
        let ex = exhaustive_search(&ch, ebar, c.budget_uw, &a).unwrap();
        assert_eq!(one.best_rate, vec![ex.point.feasible.then_some(ex.point.rate)]);

        let zero = verify_proposition1(&ch, 0.0, c.budget_uw, 3, 10, &a).unwrap();
        let free = IdReference::new(&ch, c.budget_uw).unwrap().rate;
        for r in &zero.best_rate {
            assert_eq!(r.unwrap(), free);
        }
    }
}
