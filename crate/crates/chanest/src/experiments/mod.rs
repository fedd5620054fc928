//! Dataset generation, Monte Carlo MSE evaluation and the figure runners.

pub mod runners;

use crate::channel::{ChannelScenario, OfdmConfig, ScenarioSampler};
use crate::estimators::{apply_estimator, Estimator};
use crate::linalg::CMat;
use crate::par::{self, RunningStats};
use crate::rng::{derive_stream, StreamDomain};
use crate::{Error, Result};
use serde::Serialize;

/// Labeled training data: `M` pairs of (noisy LS estimate, true CFR),
/// stored column-wise as `D x M` matrices. Samples come from independent
/// channel realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    inputs: CMat,
    labels: CMat,
    pub scenario: String,
    pub seed: u64,
}

impl TrainingSet {
    pub fn from_parts(inputs: CMat, labels: CMat, scenario: String, seed: u64) -> Result<Self> {
        if inputs.ncols() == 0 {
            return Err(Error::InvalidConfig("training set needs at least one sample".into()));
        }
        if inputs.shape() != labels.shape() {
            return Err(Error::DimensionMismatch {
                expected: inputs.ncols(),
                got: labels.ncols(),
            });
        }
        Ok(Self {
            inputs,
            labels,
            scenario,
            seed,
        })
    }

    /// Complex input dimension D.
    pub fn dim(&self) -> usize {
        self.inputs.nrows()
    }

    /// Number of samples M.
    pub fn len(&self) -> usize {
        self.inputs.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.ncols() == 0
    }

    pub fn inputs(&self) -> &CMat {
        &self.inputs
    }

    pub fn labels(&self) -> &CMat {
        &self.labels
    }

    /// Restricts every sample to a subset of rows (a subsymbol block).
    pub fn restrict_rows(&self, rows: &[usize]) -> TrainingSet {
        let take = |src: &CMat| {
            CMat::from_fn(rows.len(), src.ncols(), |i, j| src[(rows[i], j)])
        };
        TrainingSet {
            inputs: take(&self.inputs),
            labels: take(&self.labels),
            scenario: self.scenario.clone(),
            seed: self.seed,
        }
    }
}

/// Draws `m` independent (LS observation, true CFR) pairs from the
/// scenario. Bit-identical for a fixed `(scenario, cfg, m, seed)`; the
/// stream is derived under the training domain, disjoint from evaluation.
pub fn generate_training_set(
    scenario: &ChannelScenario,
    cfg: &OfdmConfig,
    m: usize,
    seed: u64,
) -> Result<TrainingSet> {
    if m == 0 {
        return Err(Error::InvalidConfig("training set needs at least one sample".into()));
    }
    let sampler = ScenarioSampler::new(scenario, cfg)?;
    let k = cfg.usable_count();
    let mut rng = derive_stream(seed, StreamDomain::Training, 0);
    let mut inputs = CMat::zeros(k, m);
    let mut labels = CMat::zeros(k, m);
    for j in 0..m {
        let (cfr, obs) = sampler.sample_pair(&mut rng);
        labels.set_column(j, &cfr);
        inputs.set_column(j, &obs);
    }
    TrainingSet::from_parts(inputs, labels, scenario.label(), seed)
}

/// One Monte Carlo MSE measurement.
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub estimator_id: String,
    pub scenario: String,
    pub snr_db: f64,
    pub n_trials: u64,
    /// Mean per-subcarrier squared error.
    pub mse: f64,
    pub mse_std_error: f64,
    /// Scaled MSE difference versus the analytic optimum, when one exists
    /// (stationary scenarios only).
    pub alpha: Option<f64>,
    pub seed: u64,
}

/// Joint evaluation of several estimators on the same evaluation draws.
///
/// Sharing draws makes the difference statistics vs the first estimator
/// far tighter than independent runs would be.
#[derive(Debug, Clone)]
pub struct MultiEval {
    /// Per-estimator (mse, standard error).
    pub per_estimator: Vec<(f64, f64)>,
    /// (mean, standard error) of the per-symbol squared-error difference
    /// of estimator i versus estimator 0.
    pub diff_vs_first: Vec<(f64, f64)>,
    pub n_trials: u64,
}

/// Estimates each estimator's MSE over `n_trials` fresh realizations drawn
/// from evaluation streams disjoint from all training streams.
pub fn evaluate_mse_multi(
    estimators: &[&Estimator],
    scenario: &ChannelScenario,
    cfg: &OfdmConfig,
    n_trials: u64,
    seed: u64,
) -> Result<MultiEval> {
    if n_trials == 0 {
        return Err(Error::InvalidConfig("evaluation needs at least one trial".into()));
    }
    let k = cfg.usable_count();
    for e in estimators {
        if let Some(d) = e.dimension() {
            if d != k {
                return Err(Error::DimensionMismatch { expected: k, got: d });
            }
        }
    }
    let sampler = ScenarioSampler::new(scenario, cfg)?;
    let n_est = estimators.len();

    struct ChunkStats {
        per: Vec<RunningStats>,
        diff: Vec<RunningStats>,
        err: Option<Error>,
    }

    let chunks = par::map_chunks(n_trials as usize, par::DEFAULT_CHUNK, |chunk_id, range| {
        let mut rng = derive_stream(seed, StreamDomain::Evaluation, chunk_id as u64);
        let mut per = vec![RunningStats::default(); n_est];
        let mut diff = vec![RunningStats::default(); n_est];
        let mut sq = vec![0.0f64; n_est];
        for _ in range {
            let (cfr, obs) = sampler.sample_pair(&mut rng);
            for (e_idx, est) in estimators.iter().enumerate() {
                let out = match apply_estimator(est, &obs) {
                    Ok(v) => v,
                    Err(e) => {
                        return ChunkStats {
                            per,
                            diff,
                            err: Some(e),
                        }
                    }
                };
                let se: f64 = out
                    .iter()
                    .zip(cfr.iter())
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    / k as f64;
                sq[e_idx] = se;
                per[e_idx].push(se);
            }
            for i in 0..n_est {
                diff[i].push(sq[i] - sq[0]);
            }
        }
        ChunkStats {
            per,
            diff,
            err: None,
        }
    });

    let mut per = vec![RunningStats::default(); n_est];
    let mut diff = vec![RunningStats::default(); n_est];
    for c in chunks {
        if let Some(e) = c.err {
            return Err(e);
        }
        for i in 0..n_est {
            per[i].merge(&c.per[i]);
            diff[i].merge(&c.diff[i]);
        }
    }
    Ok(MultiEval {
        per_estimator: per.iter().map(|s| (s.mean(), s.std_error())).collect(),
        diff_vs_first: diff.iter().map(|s| (s.mean(), s.std_error())).collect(),
        n_trials,
    })
}

/// Monte Carlo MSE of one estimator; `mse_opt`, when given, fills the
/// report's scaled MSE difference versus that analytic optimum.
pub fn evaluate_mse(
    estimator: &Estimator,
    estimator_id: &str,
    scenario: &ChannelScenario,
    cfg: &OfdmConfig,
    n_trials: u64,
    seed: u64,
    mse_opt: Option<f64>,
) -> Result<EvalReport> {
    let multi = evaluate_mse_multi(&[estimator], scenario, cfg, n_trials, seed)?;
    let (mse, se) = multi.per_estimator[0];
    Ok(EvalReport {
        estimator_id: estimator_id.to_string(),
        scenario: scenario.label(),
        snr_db: scenario.snr_db,
        n_trials,
        mse,
        mse_std_error: se,
        alpha: mse_opt.map(|opt| scaled_mse_difference(mse, opt)),
        seed,
    })
}

/// `(mse_learned - mse_opt) / mse_opt`; may be slightly negative under
/// Monte Carlo noise and is reported as-is.
pub fn scaled_mse_difference(mse_learned: f64, mse_opt: f64) -> f64 {
    assert!(mse_opt > 0.0, "optimum MSE must be positive");
    (mse_learned - mse_opt) / mse_opt
}

/// Splits the usable subcarriers into `K/block` contiguous blocks of size
/// `block` (positions within the usable-index list).
pub fn partition_symbol(cfg: &OfdmConfig, block: usize) -> Result<Vec<Vec<usize>>> {
    let k = cfg.usable_count();
    if block == 0 || k % block != 0 {
        return Err(Error::NonDivisible { block, total: k });
    }
    Ok((0..k / block)
        .map(|b| (b * block..(b + 1) * block).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{freq_correlation, PdpSpec};
    use crate::estimators::{lmmse_mse_theoretical, lmmse_weights, LinearWeights};
    use crate::linalg::CMat;
    use num_complex::Complex64;

    fn cfg16_4() -> OfdmConfig {
        OfdmConfig::centered(16, 4).unwrap()
    }

    #[test]
    fn noiseless_scenario_inputs_equal_labels() {
        let cfg = cfg16_4();
        let scenario = ChannelScenario::stationary(PdpSpec::exponential(2), f64::INFINITY);
        let ts = generate_training_set(&scenario, &cfg, 20, 3).unwrap();
        assert_eq!(ts.inputs(), ts.labels());
    }

    #[test]
    fn generation_is_bit_deterministic() {
        let cfg = cfg16_4();
        let scenario = ChannelScenario::stationary(PdpSpec::exponential(2), 5.0);
        let a = generate_training_set(&scenario, &cfg, 64, 11).unwrap();
        let b = generate_training_set(&scenario, &cfg, 64, 11).unwrap();
        assert_eq!(a, b);
        let c = generate_training_set(&scenario, &cfg, 64, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn quasi_stationary_delays_are_uniform() {
        // chi-square goodness of fit on the realized tau histogram,
        // significance 0.01, 10^5 draws over 16 cells.
        let cfg = OfdmConfig::centered(64, 60).unwrap();
        let scenario = ChannelScenario::quasi_stationary((1..=16).collect(), 10.0).unwrap();
        let sampler = ScenarioSampler::new(&scenario, &cfg).unwrap();
        let mut rng = derive_stream(21, StreamDomain::Training, 0);
        let n = 100_000;
        let mut counts = [0u64; 16];
        for _ in 0..n {
            let (tau_idx, _, _) = sampler.sample_pair_tagged(&mut rng);
            counts[tau_idx] += 1;
        }
        let expected = n as f64 / 16.0;
        let stat: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        // 15 degrees of freedom
        let p = 1.0 - crate::analysis::chi2_cdf(stat, 15).unwrap();
        assert!(p > 0.01, "GOF statistic {stat}, p = {p}");
    }

    #[test]
    fn ls_mse_equals_noise_variance() {
        let cfg = cfg16_4();
        let scenario = ChannelScenario::stationary(PdpSpec::exponential(2), 0.0);
        let report = evaluate_mse(
            &Estimator::LsIdentity,
            "ls",
            &scenario,
            &cfg,
            100_000,
            5,
            None,
        )
        .unwrap();
        assert!(
            (report.mse - 1.0).abs() <= 3.0 * report.mse_std_error,
            "LS mse {} +- {}",
            report.mse,
            report.mse_std_error
        );
    }

    #[test]
    fn zero_estimator_measures_channel_power() {
        let cfg = cfg16_4();
        let scenario = ChannelScenario::stationary(PdpSpec::exponential(2), 10.0);
        let zero = Estimator::Linear(LinearWeights::new(CMat::zeros(4, 4)).unwrap());
        let report = evaluate_mse(&zero, "zero", &scenario, &cfg, 100_000, 6, None).unwrap();
        assert!((report.mse - 1.0).abs() <= 3.0 * report.mse_std_error);
    }

    #[test]
    fn wiener_monte_carlo_matches_theory() {
        let cfg = cfg16_4();
        let spec = PdpSpec::exponential(2);
        let scenario = ChannelScenario::stationary(spec, 10.0);
        let r = freq_correlation(&spec, &cfg);
        let w = lmmse_weights(&r, scenario.sigma2()).unwrap();
        let theory = lmmse_mse_theoretical(&r, scenario.sigma2()).unwrap();
        let report = evaluate_mse(
            &Estimator::Linear(w),
            "lmmse",
            &scenario,
            &cfg,
            100_000,
            7,
            Some(theory),
        )
        .unwrap();
        assert!(
            (report.mse - theory).abs() <= 3.0 * report.mse_std_error,
            "mc {} vs theory {theory}",
            report.mse
        );
        // alpha against the analytic optimum is tiny for the optimum itself
        assert!(report.alpha.unwrap().abs() < 0.05);
    }

    #[test]
    fn evaluation_is_worker_count_invariant_in_spirit() {
        // same seed, two calls: identical statistics (chunk layout is fixed)
        let cfg = cfg16_4();
        let scenario = ChannelScenario::stationary(PdpSpec::exponential(2), 0.0);
        let a = evaluate_mse(&Estimator::LsIdentity, "ls", &scenario, &cfg, 30_000, 9, None).unwrap();
        let b = evaluate_mse(&Estimator::LsIdentity, "ls", &scenario, &cfg, 30_000, 9, None).unwrap();
        assert_eq!(a.mse.to_bits(), b.mse.to_bits());
        assert_eq!(a.mse_std_error.to_bits(), b.mse_std_error.to_bits());
    }

    #[test]
    fn std_error_shrinks_like_sqrt_trials() {
        let cfg = cfg16_4();
        let scenario = ChannelScenario::stationary(PdpSpec::exponential(2), 0.0);
        let a = evaluate_mse(&Estimator::LsIdentity, "ls", &scenario, &cfg, 20_000, 9, None).unwrap();
        let b = evaluate_mse(&Estimator::LsIdentity, "ls", &scenario, &cfg, 80_000, 9, None).unwrap();
        let ratio = a.mse_std_error / b.mse_std_error;
        assert!((ratio - 2.0).abs() < 0.2, "se ratio {ratio}");
    }

    #[test]
    fn paired_evaluation_ties_estimators_to_the_same_draws() {
        let cfg = cfg16_4();
        let spec = PdpSpec::exponential(2);
        let scenario = ChannelScenario::stationary(spec, 10.0);
        let r = freq_correlation(&spec, &cfg);
        let w = Estimator::Linear(lmmse_weights(&r, scenario.sigma2()).unwrap());
        let multi =
            evaluate_mse_multi(&[&Estimator::LsIdentity, &w], &scenario, &cfg, 50_000, 3).unwrap();
        // diff of estimator 0 vs itself is exactly zero
        assert_eq!(multi.diff_vs_first[0].0, 0.0);
        // Wiener beats LS, and the paired std error beats what two
        // independent evaluations would give
        let (d, d_se) = multi.diff_vs_first[1];
        assert!(d < 0.0 && d.abs() > 3.0 * d_se);
        let (_, se0) = multi.per_estimator[0];
        let (_, se1) = multi.per_estimator[1];
        assert!(d_se < (se0 * se0 + se1 * se1).sqrt());
    }

    #[test]
    fn wiener_dominance_across_stationary_scenarios() {
        // Monte Carlo MSE(lmmse) <= MSE(ls identity) = sigma2 everywhere.
        for (tau, snr) in [(0usize, 0.0), (2, 0.0), (2, 10.0), (3, -5.0)] {
            let cfg = cfg16_4();
            let spec = PdpSpec::exponential(tau);
            let scenario = ChannelScenario::stationary(spec, snr);
            let r = freq_correlation(&spec, &cfg);
            let w = Estimator::Linear(lmmse_weights(&r, scenario.sigma2()).unwrap());
            let multi =
                evaluate_mse_multi(&[&Estimator::LsIdentity, &w], &scenario, &cfg, 40_000, 8)
                    .unwrap();
            let (d, d_se) = multi.diff_vs_first[1];
            assert!(
                d <= 3.0 * d_se,
                "tau={tau} snr={snr}: lmmse should not lose to ls ({d} +- {d_se})"
            );
        }
    }

    #[test]
    fn scaled_difference_arithmetic() {
        assert_eq!(scaled_mse_difference(0.5, 0.5), 0.0);
        assert!((scaled_mse_difference(0.11, 0.10) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn partition_shapes_and_errors() {
        let cfg = OfdmConfig::centered(512, 480).unwrap();
        let blocks = partition_symbol(&cfg, 60).unwrap();
        assert_eq!(blocks.len(), 8);
        assert!(blocks.iter().all(|b| b.len() == 60));
        // concatenation covers the usable positions exactly once, in order
        let flat: Vec<usize> = blocks.concat();
        assert_eq!(flat, (0..480).collect::<Vec<_>>());

        let single = partition_symbol(&cfg, 480).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].len(), 480);

        assert!(matches!(
            partition_symbol(&cfg, 70),
            Err(Error::NonDivisible { block: 70, total: 480 })
        ));
    }

    #[test]
    fn restrict_rows_views_the_right_slice() {
        let inputs = CMat::from_fn(4, 3, |i, j| Complex64::new(i as f64, j as f64));
        let labels = inputs.map(|c| c * Complex64::new(2.0, 0.0));
        let ts = TrainingSet::from_parts(inputs, labels, "t".into(), 0).unwrap();
        let sub = ts.restrict_rows(&[1, 3]);
        assert_eq!(sub.dim(), 2);
        assert_eq!(sub.len(), 3);
        assert_eq!(sub.inputs()[(0, 2)], Complex64::new(1.0, 2.0));
        assert_eq!(sub.inputs()[(1, 0)], Complex64::new(3.0, 0.0));
    }
}
