//! Frequency-selective two-user interference channels.
//!
//! Each link is an `L`-tap multipath channel with an exponentially decaying
//! power delay profile. The taps are zero-padded to `N` and transformed to
//! per-subcarrier coefficients with the DFT scaled by `sqrt(N)` relative to the
//! unitary transform, so a single unit tap gives unit-magnitude flat gains and
//! `E|h_n|^2 = 1` for every subcarrier. Path loss and the relative cross-link
//! loss are applied afterwards as amplitude factors.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::config::SimConfig;
use crate::error::{invalid, Result};

/// Multipath taps of one link, in delay order.
#[derive(Debug, Clone, PartialEq)]
pub struct TapVector {
    taps: Vec<Complex64>,
}

impl TapVector {
    pub fn new(taps: Vec<Complex64>) -> Result<Self> {
        if taps.is_empty() {
            return Err(invalid("tap vector must hold at least one tap"));
        }
        Ok(Self { taps })
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// `sum_l |tap_l|^2`
    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|t| t.norm_sqr()).sum()
    }
}

/// Per-subcarrier coefficients of one link (the diagonal of its channel matrix).
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalChannel {
    gains: Vec<Complex64>,
}

impl DiagonalChannel {
    pub fn new(gains: Vec<Complex64>) -> Self {
        Self { gains }
    }

    /// Real, nonnegative amplitudes `sqrt(power_n)`.
    pub fn from_powers(powers: &[f64]) -> Result<Self> {
        if let Some(p) = powers.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(invalid(format!("channel power {p} is not a finite nonnegative value")));
        }
        Ok(Self::new(powers.iter().map(|p| Complex64::new(p.sqrt(), 0.0)).collect()))
    }

    pub fn gains(&self) -> &[Complex64] {
        &self.gains
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    /// `|h_n|^2` for every subcarrier.
    pub fn powers(&self) -> Vec<f64> {
        self.gains.iter().map(|h| h.norm_sqr()).collect()
    }

    fn scaled(&self, amp: f64) -> Self {
        Self::new(self.gains.iter().map(|h| h * amp).collect())
    }
}

/// The four links of the interference channel.
///
/// `hik` is the link from transmitter `k` to receiver `i`; receiver 1 harvests
/// energy and receiver 2 decodes. Squared magnitudes are cached since every
/// solver works with channel powers only.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    h11: DiagonalChannel,
    h12: DiagonalChannel,
    h21: DiagonalChannel,
    h22: DiagonalChannel,
    delta: f64,
    pathloss_amp: f64,
    g11: Vec<f64>,
    g12: Vec<f64>,
    g21: Vec<f64>,
    g22: Vec<f64>,
}

impl ChannelSet {
    pub fn new(
        h11: DiagonalChannel,
        h12: DiagonalChannel,
        h21: DiagonalChannel,
        h22: DiagonalChannel,
        delta: f64,
        pathloss_amp: f64,
    ) -> Result<Self> {
        let n = h11.len();
        if n == 0 {
            return Err(invalid("channels need at least one subcarrier"));
        }
        if [&h12, &h21, &h22].iter().any(|h| h.len() != n) {
            return Err(invalid("all four links must share the same number of subcarriers"));
        }
        Ok(Self {
            g11: h11.powers(),
            g12: h12.powers(),
            g21: h21.powers(),
            g22: h22.powers(),
            h11,
            h12,
            h21,
            h22,
            delta,
            pathloss_amp,
        })
    }

    /// Builds a channel set directly from per-subcarrier powers `|h_ik,n|^2`.
    pub fn from_powers(g11: &[f64], g12: &[f64], g21: &[f64], g22: &[f64]) -> Result<Self> {
        Self::new(
            DiagonalChannel::from_powers(g11)?,
            DiagonalChannel::from_powers(g12)?,
            DiagonalChannel::from_powers(g21)?,
            DiagonalChannel::from_powers(g22)?,
            1.0,
            1.0,
        )
    }

    /// Exchanges the roles of the two users, turning an (EH1, ID2) set into
    /// the (EH2, ID1) configuration and vice versa.
    pub fn swap_roles(&self) -> Self {
        Self {
            h11: self.h22.clone(),
            h12: self.h21.clone(),
            h21: self.h12.clone(),
            h22: self.h11.clone(),
            delta: self.delta,
            pathloss_amp: self.pathloss_amp,
            g11: self.g22.clone(),
            g12: self.g21.clone(),
            g21: self.g12.clone(),
            g22: self.g11.clone(),
        }
    }

    pub fn n_subcarriers(&self) -> usize {
        self.g11.len()
    }

    pub fn h11(&self) -> &DiagonalChannel {
        &self.h11
    }
    pub fn h12(&self) -> &DiagonalChannel {
        &self.h12
    }
    pub fn h21(&self) -> &DiagonalChannel {
        &self.h21
    }
    pub fn h22(&self) -> &DiagonalChannel {
        &self.h22
    }

    /// EH transmitter to EH receiver.
    pub fn g11(&self) -> &[f64] {
        &self.g11
    }
    /// ID transmitter to EH receiver.
    pub fn g12(&self) -> &[f64] {
        &self.g12
    }
    /// EH transmitter to ID receiver (the interference link).
    pub fn g21(&self) -> &[f64] {
        &self.g21
    }
    /// ID transmitter to ID receiver.
    pub fn g22(&self) -> &[f64] {
        &self.g22
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn pathloss_amp(&self) -> f64 {
        self.pathloss_amp
    }
}

/// RNG stream for one Monte Carlo trial. Streams of distinct trials never overlap.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// Draws `len` circularly-symmetric complex Gaussian taps with variances
/// proportional to `exp(-decay_rate * l)`, normalized to unit total power.
pub fn generate_taps<R: Rng + ?Sized>(rng: &mut R, len: usize, decay_rate: f64) -> Result<TapVector> {
    if len == 0 {
        return Err(invalid("tap count must be at least 1"));
    }
    if !(decay_rate > 0.0 && decay_rate.is_finite()) {
        return Err(invalid(format!("tap decay rate must be positive, got {decay_rate}")));
    }
    let variances = tap_variances(len, decay_rate);
    let taps = variances
        .iter()
        .map(|v| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * (v / 2.0).sqrt()
        })
        .collect();
    TapVector::new(taps)
}

/// Power delay profile `c * exp(-decay_rate * l)` with `sum = 1`.
pub fn tap_variances(len: usize, decay_rate: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..len).map(|l| (-decay_rate * l as f64).exp()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

/// `h_k = sum_l tap_l * exp(-2 pi i k l / N)`, i.e. the unitary DFT of the
/// zero-padded taps multiplied by `sqrt(N)`.
pub fn taps_to_subcarrier_gains(taps: &TapVector, n: usize) -> Result<DiagonalChannel> {
    if n < taps.len() {
        return Err(invalid(format!("subcarrier count {n} is smaller than the tap count {}", taps.len())));
    }
    let gains = (0..n)
        .map(|k| {
            taps.taps()
                .iter()
                .enumerate()
                .map(|(l, t)| {
                    let phase = -2.0 * PI * ((k * l) % n) as f64 / n as f64;
                    t * Complex64::from_polar(1.0, phase)
                })
                .sum()
        })
        .collect();
    Ok(DiagonalChannel::new(gains))
}

/// Draws the four links from `rng` in the order h11, h12, h21, h22.
pub fn build_channel_set<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<ChannelSet> {
    config.validate()?;
    let n = config.n_subcarriers;
    let draw = |rng: &mut R| -> Result<DiagonalChannel> {
        let taps = generate_taps(rng, config.tap_count, config.tap_decay)?;
        taps_to_subcarrier_gains(&taps, n)
    };
    let h11 = draw(rng)?;
    let h12 = draw(rng)?;
    let h21 = draw(rng)?;
    let h22 = draw(rng)?;

    let amp = config.pathloss_power.sqrt();
    let cross = amp * config.delta_cross.sqrt();
    let set = ChannelSet::new(
        h11.scaled(amp),
        h12.scaled(cross),
        h21.scaled(cross),
        h22.scaled(amp),
        config.delta_cross,
        amp,
    )?;
    Ok(if config.eh_user == 2 { set.swap_roles() } else { set })
}

/// Channel realization of one Monte Carlo trial.
pub fn trial_channels(config: &SimConfig, trial: u64) -> Result<ChannelSet> {
    build_channel_set(config, &mut trial_rng(config.master_seed, trial))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_tap_variance_is_one() {
        let v = tap_variances(1, 3.7);
        assert_eq!(v, vec![1.0]);
    }

    #[test]
    fn three_tap_profile() {
        let v = tap_variances(3, 1.0);
        let z = 1.0 + (-1.0f64).exp() + (-2.0f64).exp();
        assert_relative_eq!(v[0], 1.0 / z, epsilon = 1e-15);
        assert_relative_eq!(v[1], (-1.0f64).exp() / z, epsilon = 1e-15);
        assert_relative_eq!(v[2], (-2.0f64).exp() / z, epsilon = 1e-15);
        assert_relative_eq!(v.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_taps_rejected() {
        let mut rng = trial_rng(1, 0);
        assert!(generate_taps(&mut rng, 0, 1.0).is_err());
        assert!(generate_taps(&mut rng, 2, 0.0).is_err());
    }

    #[test]
    fn mean_tap_power_is_unit() {
        let mut rng = trial_rng(42, 0);
        let draws = 100_000;
        let mean = (0..draws).map(|_| generate_taps(&mut rng, 3, 1.0).unwrap().energy()).sum::<f64>() / draws as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean tap power {mean}");
    }

    #[test]
    fn single_unit_tap_is_flat() {
        let taps = TapVector::new(vec![c(1.0)]).unwrap();
        let h = taps_to_subcarrier_gains(&taps, 4).unwrap();
        for g in h.gains() {
            assert_relative_eq!(g.re, 1.0, epsilon = 1e-15);
            assert_relative_eq!(g.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_taps_give_zero_gains() {
        let taps = TapVector::new(vec![c(0.0); 3]).unwrap();
        let h = taps_to_subcarrier_gains(&taps, 8).unwrap();
        assert!(h.powers().iter().all(|p| *p == 0.0));
    }

    #[test]
    fn two_point_dft() {
        // Direct 2-point DFT: (1 + 1, 1 - 1) = (2, 0).
        let taps = TapVector::new(vec![c(1.0), c(1.0)]).unwrap();
        let p = taps_to_subcarrier_gains(&taps, 2).unwrap().powers();
        assert_relative_eq!(p[0], 4.0, epsilon = 1e-12);
        assert!(p[1] < 1e-24);
    }

    #[test]
    fn fewer_subcarriers_than_taps_rejected() {
        let taps = TapVector::new(vec![c(1.0); 3]).unwrap();
        assert!(taps_to_subcarrier_gains(&taps, 2).is_err());
    }

    #[test]
    fn parseval_holds() {
        let mut rng = trial_rng(9, 3);
        for n in [3usize, 4, 8, 16, 64] {
            let taps = generate_taps(&mut rng, 3, 1.0).unwrap();
            let h = taps_to_subcarrier_gains(&taps, n).unwrap();
            let lhs: f64 = h.powers().iter().sum();
            let rhs = n as f64 * taps.energy();
            assert!((lhs - rhs).abs() <= 1e-10 * rhs, "n={n}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn build_is_deterministic() {
        let cfg = SimConfig::default();
        let a = trial_channels(&cfg, 5).unwrap();
        let b = trial_channels(&cfg, 5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, trial_channels(&cfg, 6).unwrap());
    }

    #[test]
    fn no_cross_coupling_at_zero_delta() {
        let cfg = SimConfig { delta_cross: 0.0, ..SimConfig::default() };
        let ch = trial_channels(&cfg, 0).unwrap();
        assert!(ch.g12().iter().chain(ch.g21()).all(|g| *g == 0.0));
        assert!(ch.g11().iter().any(|g| *g > 0.0));
    }

    #[test]
    fn cross_links_scale_with_sqrt_delta() {
        let a = trial_channels(&SimConfig { delta_cross: 0.8, ..SimConfig::default() }, 2).unwrap();
        let b = trial_channels(&SimConfig { delta_cross: 0.2, ..SimConfig::default() }, 2).unwrap();
        let ratio = (0.8f64 / 0.2).sqrt();
        for (x, y) in a.h21().gains().iter().zip(b.h21().gains()) {
            assert_relative_eq!(x.norm(), y.norm() * ratio, max_relative = 1e-12);
        }
        assert_eq!(a.h11(), b.h11());
    }

    #[test]
    fn direct_links_carry_path_loss() {
        let cfg = SimConfig::default();
        let ch = trial_channels(&cfg, 0).unwrap();
        let mut rng = trial_rng(cfg.master_seed, 0);
        let taps = generate_taps(&mut rng, 3, 1.0).unwrap();
        let raw = taps_to_subcarrier_gains(&taps, 8).unwrap().powers();
        for (g, r) in ch.g11().iter().zip(&raw) {
            assert_relative_eq!(*g, r * 1e-3, max_relative = 1e-12);
        }
    }

    #[test]
    fn role_swap_is_an_involution() {
        let ch = trial_channels(&SimConfig::default(), 1).unwrap();
        let sw = ch.swap_roles();
        assert_eq!(sw.g11(), ch.g22());
        assert_eq!(sw.g12(), ch.g21());
        assert_eq!(sw.swap_roles(), ch);
    }
}
