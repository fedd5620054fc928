//! OFDM channel model: frequency grid, power-delay profiles, channel
//! realizations and noisy LS pilot observations.
//!
//! The model is frequency-domain only. A realization draws independent
//! circularly-symmetric Gaussian taps with per-delay powers from the PDP
//! and maps them to the channel frequency response (CFR) on the usable
//! subcarriers through the DFT. The channel is constant over a symbol, so
//! no waveform/CP simulation is needed.

use crate::linalg::{CMat, CVec};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::TAU;

/// Frequency grid of one OFDM symbol.
///
/// The DC subcarrier (index 0) and the spectrum-edge subcarriers are null;
/// the `K` usable indices are stored in spectral order, lowest negative
/// frequency first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OfdmConfig {
    dft_size: usize,
    usable: Vec<usize>,
    cp_len: usize,
}

impl OfdmConfig {
    /// Centered allocation: usable indices `{N-floor(K/2)..N-1}` followed by
    /// `{1..ceil(K/2)}`, leaving DC and the remaining edge carriers null.
    pub fn centered(dft_size: usize, usable_count: usize) -> Result<Self> {
        if usable_count == 0 || usable_count > dft_size.saturating_sub(1) {
            return Err(Error::InvalidConfig(format!(
                "usable count {usable_count} must lie in 1..={}",
                dft_size.saturating_sub(1)
            )));
        }
        let up = usable_count.div_ceil(2);
        let down = usable_count / 2;
        let usable = (dft_size - down..dft_size).chain(1..=up).collect();
        Self::from_indices(dft_size, usable)
    }

    /// Builds a grid from explicit usable indices (spectral order preserved).
    pub fn from_indices(dft_size: usize, usable: Vec<usize>) -> Result<Self> {
        if dft_size % 4 != 0 {
            return Err(Error::InvalidConfig(format!(
                "DFT size {dft_size} must be divisible by 4 for the N/4 cyclic prefix"
            )));
        }
        if usable.iter().any(|&i| i == 0 || i >= dft_size) {
            return Err(Error::InvalidConfig(
                "usable indices must exclude DC and stay below the DFT size".into(),
            ));
        }
        let mut seen = vec![false; dft_size];
        for &i in &usable {
            if seen[i] {
                return Err(Error::InvalidConfig(format!("duplicate usable index {i}")));
            }
            seen[i] = true;
        }
        Ok(Self {
            cp_len: dft_size / 4,
            dft_size,
            usable,
        })
    }

    pub fn dft_size(&self) -> usize {
        self.dft_size
    }

    pub fn usable_count(&self) -> usize {
        self.usable.len()
    }

    pub fn cp_len(&self) -> usize {
        self.cp_len
    }

    pub fn usable_indices(&self) -> &[usize] {
        &self.usable
    }
}

/// Power-delay profile shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdpKind {
    Exponential,
    Uniform,
}

/// Power-delay profile over integer delays `0..=tau_max` (sample periods).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PdpSpec {
    pub kind: PdpKind,
    pub tau_max: usize,
}

impl PdpSpec {
    pub fn exponential(tau_max: usize) -> Self {
        Self {
            kind: PdpKind::Exponential,
            tau_max,
        }
    }

    pub fn uniform(tau_max: usize) -> Self {
        Self {
            kind: PdpKind::Uniform,
            tau_max,
        }
    }

    /// The maximum delay must stay within the cyclic prefix.
    pub fn validate_for(&self, cfg: &OfdmConfig) -> Result<()> {
        if self.tau_max > cfg.cp_len() {
            return Err(Error::InvalidConfig(format!(
                "tau_max {} exceeds the CP length {}",
                self.tau_max,
                cfg.cp_len()
            )));
        }
        Ok(())
    }
}

/// Tap powers of the PDP, normalized to unit total power.
///
/// Exponential: `P_l = C e^(-l/tau_max)` (a single unit tap when
/// `tau_max = 0`); uniform: `P_l = 1/(tau_max+1)`.
pub fn pdp_powers(spec: &PdpSpec) -> Vec<f64> {
    let len = spec.tau_max + 1;
    let mut p = match spec.kind {
        PdpKind::Exponential => {
            if spec.tau_max == 0 {
                return vec![1.0];
            }
            (0..len)
                .map(|l| (-(l as f64) / spec.tau_max as f64).exp())
                .collect::<Vec<_>>()
        }
        PdpKind::Uniform => vec![1.0; len],
    };
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    p
}

/// Frequency-domain correlation of the CFR on the usable subcarriers:
/// `R[a,b] = sum_l P_l exp(-j 2 pi (idx_a - idx_b) l / N)`.
///
/// Hermitian with unit diagonal; depends on index differences only.
pub fn freq_correlation(spec: &PdpSpec, cfg: &OfdmConfig) -> CMat {
    let powers = pdp_powers(spec);
    let n = cfg.dft_size() as f64;
    let idx = cfg.usable_indices();
    let k = idx.len();
    CMat::from_fn(k, k, |a, b| {
        let delta = idx[a] as f64 - idx[b] as f64;
        powers
            .iter()
            .enumerate()
            .map(|(l, &p)| Complex64::from_polar(p, -TAU * delta * l as f64 / n))
            .sum()
    })
}

/// One channel draw: tap-domain coefficients and the CFR they induce.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub taps: CVec,
    pub cfr: CVec,
}

/// DFT columns mapping taps to the usable-subcarrier CFR, precomputed so
/// bulk sampling does not re-evaluate complex exponentials.
#[derive(Debug, Clone)]
pub struct TapBasis {
    /// K x (tau_max+1); entry (k, l) = exp(-j 2 pi idx_k l / N).
    basis: CMat,
    /// Per-tap standard deviation of each real component, sqrt(P_l / 2).
    component_std: Vec<f64>,
}

impl TapBasis {
    pub fn new(spec: &PdpSpec, cfg: &OfdmConfig) -> Self {
        let powers = pdp_powers(spec);
        let n = cfg.dft_size() as f64;
        let idx = cfg.usable_indices();
        let basis = CMat::from_fn(idx.len(), powers.len(), |k, l| {
            Complex64::from_polar(1.0, -TAU * idx[k] as f64 * l as f64 / n)
        });
        let component_std = powers.iter().map(|p| (p / 2.0).sqrt()).collect();
        Self {
            basis,
            component_std,
        }
    }

    pub fn tap_count(&self) -> usize {
        self.component_std.len()
    }

    fn draw_taps<R: Rng>(&self, rng: &mut R) -> CVec {
        CVec::from_iterator(
            self.tap_count(),
            self.component_std.iter().map(|&s| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re * s, im * s)
            }),
        )
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> ChannelRealization {
        let taps = self.draw_taps(rng);
        let cfr = &self.basis * &taps;
        ChannelRealization { taps, cfr }
    }
}

/// Draws a channel realization: taps `~ CN(0, P_l)` independent across
/// delays, CFR formed by the DFT sum.
pub fn sample_channel<R: Rng>(spec: &PdpSpec, cfg: &OfdmConfig, rng: &mut R) -> ChannelRealization {
    TapBasis::new(spec, cfg).sample(rng)
}

/// LS pilot observation: the CFR plus i.i.d. circularly-symmetric complex
/// Gaussian noise with per-entry variance `sigma2`.
pub fn observe_ls<R: Rng>(cfr: &CVec, sigma2: f64, rng: &mut R) -> CVec {
    debug_assert!(sigma2 >= 0.0);
    if sigma2 == 0.0 {
        return cfr.clone();
    }
    let s = (sigma2 / 2.0).sqrt();
    CVec::from_iterator(
        cfr.len(),
        cfr.iter().map(|&h| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            h + Complex64::new(re * s, im * s)
        }),
    )
}

/// How the PDP of a scenario is chosen per realization.
#[derive(Debug, Clone, PartialEq)]
pub enum PdpRule {
    /// Every realization uses the same PDP.
    Fixed(PdpSpec),
    /// Exponential PDP whose maximum delay is drawn uniformly from the set
    /// for each realization.
    QuasiStationary(Vec<usize>),
}

/// Channel scenario: PDP selection rule plus the operating SNR.
///
/// Pilots and channel have unit power, so the noise variance is
/// `sigma2 = 10^(-snr_db/10)` and the LS estimator's MSE equals `sigma2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelScenario {
    pub pdp_rule: PdpRule,
    pub snr_db: f64,
}

impl ChannelScenario {
    pub fn stationary(spec: PdpSpec, snr_db: f64) -> Self {
        Self {
            pdp_rule: PdpRule::Fixed(spec),
            snr_db,
        }
    }

    pub fn quasi_stationary(tau_set: Vec<usize>, snr_db: f64) -> Result<Self> {
        if tau_set.is_empty() {
            return Err(Error::InvalidConfig(
                "quasi-stationary tau set must be non-empty".into(),
            ));
        }
        Ok(Self {
            pdp_rule: PdpRule::QuasiStationary(tau_set),
            snr_db,
        })
    }

    pub fn sigma2(&self) -> f64 {
        10f64.powf(-self.snr_db / 10.0)
    }

    pub fn validate_for(&self, cfg: &OfdmConfig) -> Result<()> {
        match &self.pdp_rule {
            PdpRule::Fixed(spec) => spec.validate_for(cfg),
            PdpRule::QuasiStationary(set) => set
                .iter()
                .try_for_each(|&t| PdpSpec::exponential(t).validate_for(cfg)),
        }
    }

    /// Compact provenance tag for reports.
    pub fn label(&self) -> String {
        match &self.pdp_rule {
            PdpRule::Fixed(spec) => {
                let kind = match spec.kind {
                    PdpKind::Exponential => "exp",
                    PdpKind::Uniform => "uniform",
                };
                format!("{kind}(tau={})@{}dB", spec.tau_max, self.snr_db)
            }
            PdpRule::QuasiStationary(set) => format!(
                "quasi(tau={}..{})@{}dB",
                set.iter().min().unwrap(),
                set.iter().max().unwrap(),
                self.snr_db
            ),
        }
    }
}

/// Precomputed per-tau bases for drawing scenario realizations in bulk.
#[derive(Debug, Clone)]
pub struct ScenarioSampler {
    bases: Vec<TapBasis>,
    sigma2: f64,
}

impl ScenarioSampler {
    pub fn new(scenario: &ChannelScenario, cfg: &OfdmConfig) -> Result<Self> {
        scenario.validate_for(cfg)?;
        let bases = match &scenario.pdp_rule {
            PdpRule::Fixed(spec) => vec![TapBasis::new(spec, cfg)],
            PdpRule::QuasiStationary(set) => set
                .iter()
                .map(|&t| TapBasis::new(&PdpSpec::exponential(t), cfg))
                .collect(),
        };
        Ok(Self {
            bases,
            sigma2: scenario.sigma2(),
        })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Draws `(true CFR, noisy LS observation)`.
    pub fn sample_pair<R: Rng>(&self, rng: &mut R) -> (CVec, CVec) {
        let (_, cfr, obs) = self.sample_pair_tagged(rng);
        (cfr, obs)
    }

    /// As [`sample_pair`](Self::sample_pair), also reporting which PDP of
    /// the rule produced the draw (always 0 for stationary scenarios).
    pub fn sample_pair_tagged<R: Rng>(&self, rng: &mut R) -> (usize, CVec, CVec) {
        let idx = if self.bases.len() == 1 {
            0
        } else {
            rng.random_range(0..self.bases.len())
        };
        let cfr = self.bases[idx].sample(rng).cfr;
        let obs = observe_ls(&cfr, self.sigma2, rng);
        (idx, cfr, obs)
    }
}
