//! Figure runners: each produces one CSV artifact, a JSON metadata sidecar
//! and (optionally) an SVG companion plot. Every runner is deterministic
//! given `(params, master seed)` and independent of the worker count.

use super::{
    evaluate_mse_multi, generate_training_set, partition_symbol, scaled_mse_difference,
};
use crate::analysis::build_alpha_curve;
use crate::channel::{ChannelScenario, OfdmConfig, PdpSpec, ScenarioSampler};
use crate::estimators::{
    lmmse_mse_theoretical, lmmse_weights, robust_lmmse_weights, train_linear, train_mlp, Estimator,
    LinearWeights, MlpHyper,
};
use crate::par::{self, RunningStats};
use crate::plot::{line_plot, PlotSpec, Series};
use crate::report::{cell_f, cell_u, write_metadata, ArtifactPaths, CsvTable};
use crate::rng::{derive_stream, sub_seed, StreamDomain};
use crate::{channel::freq_correlation, Result};
use serde::Serialize;
use std::fs;
use std::path::PathBuf;

/// Shared runner settings.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Overrides each runner's default evaluation trial count.
    pub trials: Option<u64>,
    pub plot: bool,
}

impl RunContext {
    pub fn new(seed: u64, out_dir: PathBuf) -> Self {
        Self {
            seed,
            out_dir,
            trials: None,
            plot: false,
        }
    }

    fn trials_or(&self, default: u64) -> u64 {
        self.trials.unwrap_or(default)
    }
}

fn finish(
    ctx: &RunContext,
    stem: &str,
    table: &CsvTable,
    metadata: serde_json::Value,
    svg: Option<String>,
) -> Result<ArtifactPaths> {
    let paths = ArtifactPaths::new(&ctx.out_dir, stem, svg.is_some());
    table.write_to(&paths.csv)?;
    write_metadata(&paths.metadata, &metadata)?;
    if let (Some(svg_path), Some(svg_text)) = (&paths.svg, svg) {
        fs::create_dir_all(svg_path.parent().unwrap())?;
        fs::write(svg_path, svg_text)?;
    }
    Ok(paths)
}

fn meta_base(ctx: &RunContext, command: &str, params: &impl Serialize) -> serde_json::Value {
    serde_json::json!({
        "command": command,
        "seed": ctx.seed,
        "params": serde_json::to_value(params).expect("params serialize"),
        "version": env!("CARGO_PKG_VERSION"),
    })
}

/// Smallest power-of-two DFT size that fits `k` usable carriers plus the
/// DC/edge nulls and keeps the maximum delay inside the cyclic prefix.
pub fn dft_size_for(k: usize, tau_max: usize) -> usize {
    let mut n = 8;
    while n < k + 4 || n / 4 <= tau_max {
        n *= 2;
    }
    n
}

// ---------------------------------------------------------------------------
// alpha-curve
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct AlphaCurveParams {
    pub epsilon: f64,
    pub kappa_grid: Vec<u64>,
}

impl Default for AlphaCurveParams {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            kappa_grid: (1..=50).map(|i| i * 100).collect(),
        }
    }
}

/// Tabulates the alpha-vs-kappa curve at fixed confidence.
pub fn run_alpha_curve(ctx: &RunContext, params: &AlphaCurveParams) -> Result<ArtifactPaths> {
    let curve = build_alpha_curve(&params.kappa_grid, params.epsilon)?;
    let mut table = CsvTable::new(vec!["kappa", "alpha", "epsilon"]);
    for &(kappa, alpha) in &curve.points {
        table.push_row(vec![cell_u(kappa), cell_f(alpha), cell_f(curve.epsilon)]);
    }
    let svg = ctx.plot.then(|| {
        let series = vec![Series::new(
            format!("eps = {}", params.epsilon),
            curve
                .points
                .iter()
                .map(|&(k, a)| (k as f64, a))
                .collect(),
        )];
        line_plot(
            &PlotSpec {
                title: "scaled MSE difference bound vs sample-size indicator".into(),
                x_label: "kappa = 2M".into(),
                y_label: "alpha".into(),
                log_y: true,
            },
            &series,
        )
    });
    finish(ctx, "alpha_curve", &table, meta_base(ctx, "alpha-curve", params), svg)
}

// ---------------------------------------------------------------------------
// fig5: trained-linear vs LMMSE over SNR at small K
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct Fig5Params {
    pub dft_size: usize,
    pub m: usize,
    pub tau_max: usize,
    pub k_list: Vec<usize>,
    pub snr_db: Vec<f64>,
    pub trials: u64,
}

impl Default for Fig5Params {
    fn default() -> Self {
        Self {
            dft_size: 16,
            m: 600,
            tau_max: 2,
            k_list: vec![4, 8, 12],
            snr_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
            trials: 200_000,
        }
    }
}

/// MSE of the trained linear estimator against the analytic LMMSE filter,
/// per usable-carrier count and SNR.
pub fn run_fig5(ctx: &RunContext, params: &Fig5Params) -> Result<ArtifactPaths> {
    let trials = ctx.trials_or(params.trials);
    let mut table = CsvTable::new(vec![
        "k",
        "snr_db",
        "mse_trained",
        "mse_trained_se",
        "mse_lmmse",
        "mse_lmmse_se",
        "mse_lmmse_theory",
        "alpha_hat",
        "alpha_hat_se",
    ]);
    let mut series: Vec<Series> = Vec::new();
    for &k in &params.k_list {
        let cfg = OfdmConfig::centered(params.dft_size, k)?;
        let spec = PdpSpec::exponential(params.tau_max);
        let r = freq_correlation(&spec, &cfg);
        let mut pts_tr = Vec::new();
        let mut pts_lm = Vec::new();
        for &snr in &params.snr_db {
            let scenario = ChannelScenario::stationary(spec, snr);
            let sigma2 = scenario.sigma2();
            let wiener = Estimator::Linear(lmmse_weights(&r, sigma2)?);
            let theory = lmmse_mse_theoretical(&r, sigma2)?;
            let train_seed = sub_seed(ctx.seed, &[10, k as u64, snr.to_bits()]);
            let ts = generate_training_set(&scenario, &cfg, params.m, train_seed)?;
            let trained = Estimator::Linear(train_linear(&ts)?);
            let eval_seed = sub_seed(ctx.seed, &[11, k as u64, snr.to_bits()]);
            let multi =
                evaluate_mse_multi(&[&wiener, &trained], &scenario, &cfg, trials, eval_seed)?;
            let (mse_lm, se_lm) = multi.per_estimator[0];
            let (mse_tr, se_tr) = multi.per_estimator[1];
            let (_, d_se) = multi.diff_vs_first[1];
            let alpha = scaled_mse_difference(mse_tr, mse_lm);
            let alpha_se = d_se / mse_lm;
            table.push_row(vec![
                cell_u(k as u64),
                cell_f(snr),
                cell_f(mse_tr),
                cell_f(se_tr),
                cell_f(mse_lm),
                cell_f(se_lm),
                cell_f(theory),
                cell_f(alpha),
                cell_f(alpha_se),
            ]);
            pts_tr.push((snr, mse_tr));
            pts_lm.push((snr, mse_lm));
        }
        series.push(Series::new(format!("trained K={k}"), pts_tr));
        series.push(Series::new(format!("lmmse K={k}"), pts_lm));
    }
    let mut meta = meta_base(ctx, "fig5", params);
    meta["trials"] = serde_json::json!(trials);
    let svg = ctx.plot.then(|| {
        line_plot(
            &PlotSpec {
                title: "trained-linear vs LMMSE MSE".into(),
                x_label: "SNR (dB)".into(),
                y_label: "MSE".into(),
                log_y: true,
            },
            &series,
        )
    });
    finish(ctx, "fig5", &table, meta, svg)
}

// ---------------------------------------------------------------------------
// alpha-vs-k
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct AlphaVsKParams {
    pub m: usize,
    pub tau_max: usize,
    pub k_list: Vec<usize>,
    pub snr_db: Vec<f64>,
    pub trials: u64,
}

impl Default for AlphaVsKParams {
    fn default() -> Self {
        Self {
            m: 600,
            tau_max: 2,
            k_list: vec![4, 12, 30, 60, 120],
            snr_db: vec![-10.0, -5.0, 0.0, 10.0, 20.0],
            trials: 200_000,
        }
    }
}

/// Scaled MSE difference of the trained linear module versus the input
/// dimension `K`, per SNR. The DFT size scales with `K`.
pub fn run_alpha_vs_k(ctx: &RunContext, params: &AlphaVsKParams) -> Result<ArtifactPaths> {
    let trials = ctx.trials_or(params.trials);
    let mut table = CsvTable::new(vec![
        "k",
        "n",
        "snr_db",
        "alpha_hat",
        "alpha_hat_se",
        "mse_trained",
        "mse_trained_se",
        "mse_lmmse",
        "mse_lmmse_se",
        "mse_lmmse_theory",
    ]);
    let mut per_snr: Vec<Series> = params
        .snr_db
        .iter()
        .map(|snr| Series::new(format!("{snr} dB"), Vec::new()))
        .collect();
    for &k in &params.k_list {
        let n = dft_size_for(k, params.tau_max);
        let cfg = OfdmConfig::centered(n, k)?;
        let spec = PdpSpec::exponential(params.tau_max);
        let r = freq_correlation(&spec, &cfg);
        for (s_idx, &snr) in params.snr_db.iter().enumerate() {
            let scenario = ChannelScenario::stationary(spec, snr);
            let sigma2 = scenario.sigma2();
            let wiener = Estimator::Linear(lmmse_weights(&r, sigma2)?);
            let theory = lmmse_mse_theoretical(&r, sigma2)?;
            let ts = generate_training_set(
                &scenario,
                &cfg,
                params.m,
                sub_seed(ctx.seed, &[20, k as u64, snr.to_bits()]),
            )?;
            let trained = Estimator::Linear(train_linear(&ts)?);
            let multi = evaluate_mse_multi(
                &[&wiener, &trained],
                &scenario,
                &cfg,
                trials,
                sub_seed(ctx.seed, &[21, k as u64, snr.to_bits()]),
            )?;
            let (mse_lm, se_lm) = multi.per_estimator[0];
            let (mse_tr, se_tr) = multi.per_estimator[1];
            let (_, d_se) = multi.diff_vs_first[1];
            let alpha = scaled_mse_difference(mse_tr, mse_lm);
            let alpha_se = d_se / mse_lm;
            table.push_row(vec![
                cell_u(k as u64),
                cell_u(n as u64),
                cell_f(snr),
                cell_f(alpha),
                cell_f(alpha_se),
                cell_f(mse_tr),
                cell_f(se_tr),
                cell_f(mse_lm),
                cell_f(se_lm),
                cell_f(theory),
            ]);
            per_snr[s_idx].points.push((k as f64, alpha));
        }
    }
    let mut meta = meta_base(ctx, "alpha-vs-k", params);
    meta["trials"] = serde_json::json!(trials);
    let svg = ctx.plot.then(|| {
        line_plot(
            &PlotSpec {
                title: "scaled MSE difference vs input dimension".into(),
                x_label: "input dimension K".into(),
                y_label: "alpha".into(),
                log_y: false,
            },
            &per_snr,
        )
    });
    finish(ctx, "alpha_vs_k", &table, meta, svg)
}

// ---------------------------------------------------------------------------
// alpha-vs-m
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct AlphaVsMParams {
    pub dft_size: usize,
    pub tau_max: usize,
    pub k_list: Vec<usize>,
    pub snr_db: f64,
    /// Sample sizes are swept as multiples of K.
    pub m_over_k: Vec<f64>,
    /// Independent trainings averaged per point.
    pub train_reps: usize,
    pub alpha_target: f64,
    pub trials: u64,
}

impl Default for AlphaVsMParams {
    fn default() -> Self {
        Self {
            dft_size: 256,
            tau_max: 2,
            k_list: vec![120, 180, 240],
            snr_db: 0.0,
            m_over_k: vec![1.2, 1.5, 2.0, 3.0, 5.0, 8.0, 12.0, 16.0, 24.0],
            train_reps: 4,
            alpha_target: 0.1,
            trials: 20_000,
        }
    }
}

/// Scaled MSE difference versus the training-set size for several input
/// dimensions; the metadata records the smallest swept `M` meeting the
/// alpha target per `K`.
pub fn run_alpha_vs_m(ctx: &RunContext, params: &AlphaVsMParams) -> Result<ArtifactPaths> {
    let trials = ctx.trials_or(params.trials);
    let mut table = CsvTable::new(vec!["k", "m", "alpha_hat", "alpha_hat_se"]);
    let mut series: Vec<Series> = Vec::new();
    let mut m_required = serde_json::Map::new();
    for &k in &params.k_list {
        let cfg = OfdmConfig::centered(params.dft_size, k)?;
        let spec = PdpSpec::exponential(params.tau_max);
        let r = freq_correlation(&spec, &cfg);
        let scenario = ChannelScenario::stationary(spec, params.snr_db);
        let sigma2 = scenario.sigma2();
        let wiener = Estimator::Linear(lmmse_weights(&r, sigma2)?);
        let mut pts = Vec::new();
        let mut required: Option<u64> = None;
        for &ratio in &params.m_over_k {
            let m = (ratio * k as f64).round() as usize;
            let mut stats = RunningStats::default();
            for rep in 0..params.train_reps {
                let ts = generate_training_set(
                    &scenario,
                    &cfg,
                    m,
                    sub_seed(ctx.seed, &[30, k as u64, m as u64, rep as u64]),
                )?;
                let trained = Estimator::Linear(train_linear(&ts)?);
                let multi = evaluate_mse_multi(
                    &[&wiener, &trained],
                    &scenario,
                    &cfg,
                    trials,
                    sub_seed(ctx.seed, &[31, k as u64, m as u64, rep as u64]),
                )?;
                let (mse_lm, _) = multi.per_estimator[0];
                let (mse_tr, _) = multi.per_estimator[1];
                stats.push(scaled_mse_difference(mse_tr, mse_lm));
            }
            let alpha = stats.mean();
            let alpha_se = stats.std_error();
            table.push_row(vec![
                cell_u(k as u64),
                cell_u(m as u64),
                cell_f(alpha),
                cell_f(alpha_se),
            ]);
            pts.push((m as f64, alpha));
            if required.is_none() && alpha <= params.alpha_target {
                required = Some(m as u64);
            }
        }
        m_required.insert(
            k.to_string(),
            required.map_or(serde_json::Value::Null, |m| serde_json::json!(m)),
        );
        series.push(Series::new(format!("K={k}"), pts));
    }
    let mut meta = meta_base(ctx, "alpha-vs-m", params);
    meta["trials"] = serde_json::json!(trials);
    meta["m_required"] = serde_json::Value::Object(m_required);
    let svg = ctx.plot.then(|| {
        line_plot(
            &PlotSpec {
                title: "scaled MSE difference vs training-set size".into(),
                x_label: "training samples M".into(),
                y_label: "alpha".into(),
                log_y: true,
            },
            &series,
        )
    });
    finish(ctx, "alpha_vs_m", &table, meta, svg)
}

// ---------------------------------------------------------------------------
// dnn-quasi
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct DnnQuasiParams {
    pub dft_size: usize,
    pub k: usize,
    pub tau_set: Vec<usize>,
    /// Upper bound on the maximum delay, used by the robust LMMSE filter.
    pub tau_upper: usize,
    pub snr_db: Vec<f64>,
    pub m_large: usize,
    pub m_small: usize,
    pub hyper_large: MlpHyper,
    pub hyper_small: MlpHyper,
    pub trials: u64,
}

impl Default for DnnQuasiParams {
    fn default() -> Self {
        // The large-set training gets a raised step size and a tight epoch
        // cap so the full SNR sweep stays inside its runtime budget; both
        // settings are recorded in the metadata sidecar.
        let hyper_large = MlpHyper {
            learning_rate: 3e-3,
            max_epochs: 150,
            ..MlpHyper::default()
        };
        let hyper_small = MlpHyper {
            learning_rate: 3e-3,
            max_epochs: 2000,
            ..MlpHyper::default()
        };
        Self {
            dft_size: 64,
            k: 60,
            tau_set: (1..=16).collect(),
            tau_upper: 16,
            snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            m_large: 50_000,
            m_small: 600,
            hyper_large,
            hyper_small,
            trials: 20_000,
        }
    }
}

/// Quasi-stationary comparison: LS, robust LMMSE, and the MLP trained with
/// a large and a small dataset, per SNR.
pub fn run_dnn_quasi(ctx: &RunContext, params: &DnnQuasiParams) -> Result<ArtifactPaths> {
    let trials = ctx.trials_or(params.trials);
    let cfg = OfdmConfig::centered(params.dft_size, params.k)?;
    let mut table = CsvTable::new(vec![
        "snr_db",
        "mse_ls",
        "mse_ls_se",
        "mse_robust",
        "mse_robust_se",
        "mse_mlp_large",
        "mse_mlp_large_se",
        "mse_mlp_small",
        "mse_mlp_small_se",
    ]);
    let mut series: Vec<Series> = ["ls", "robust lmmse", "mlp large", "mlp small"]
        .iter()
        .map(|l| Series::new(l.to_string(), Vec::new()))
        .collect();
    for &snr in &params.snr_db {
        let scenario = ChannelScenario::quasi_stationary(params.tau_set.clone(), snr)?;
        let sigma2 = scenario.sigma2();
        let robust = Estimator::Linear(robust_lmmse_weights(params.tau_upper, &cfg, sigma2)?);

        let ts_large = generate_training_set(
            &scenario,
            &cfg,
            params.m_large,
            sub_seed(ctx.seed, &[40, snr.to_bits()]),
        )?;
        let mlp_large = Estimator::Mlp(train_mlp(
            &ts_large,
            &params.hyper_large,
            sub_seed(ctx.seed, &[41, snr.to_bits()]),
        )?);
        let ts_small = generate_training_set(
            &scenario,
            &cfg,
            params.m_small,
            sub_seed(ctx.seed, &[42, snr.to_bits()]),
        )?;
        let mlp_small = Estimator::Mlp(train_mlp(
            &ts_small,
            &params.hyper_small,
            sub_seed(ctx.seed, &[43, snr.to_bits()]),
        )?);

        let multi = evaluate_mse_multi(
            &[&Estimator::LsIdentity, &robust, &mlp_large, &mlp_small],
            &scenario,
            &cfg,
            trials,
            sub_seed(ctx.seed, &[44, snr.to_bits()]),
        )?;
        let mut row = vec![cell_f(snr)];
        for (i, &(mse, se)) in multi.per_estimator.iter().enumerate() {
            row.push(cell_f(mse));
            row.push(cell_f(se));
            series[i].points.push((snr, mse));
        }
        table.push_row(row);
    }
    let mut meta = meta_base(ctx, "dnn-quasi", params);
    meta["trials"] = serde_json::json!(trials);
    let svg = ctx.plot.then(|| {
        line_plot(
            &PlotSpec {
                title: "quasi-stationary channel: MLP vs conventional estimators".into(),
                x_label: "SNR (dB)".into(),
                y_label: "MSE".into(),
                log_y: true,
            },
            &series,
        )
    });
    finish(ctx, "dnn_quasi", &table, meta, svg)
}

// ---------------------------------------------------------------------------
// partition
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct PartitionParams {
    pub dft_size: usize,
    pub k: usize,
    pub m: usize,
    pub tau_max: usize,
    pub blocks: Vec<usize>,
    pub snr_db: Vec<f64>,
    pub trials: u64,
}

impl Default for PartitionParams {
    fn default() -> Self {
        Self {
            dft_size: 512,
            k: 480,
            m: 600,
            tau_max: 64,
            blocks: vec![30, 60, 120, 240, 480],
            snr_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            trials: 20_000,
        }
    }
}

/// Per-block trained linear estimators under symbol partitioning, with the
/// LS baseline, over an SNR sweep. One weight matrix is trained per block
/// position from the same `M` symbols restricted to that block.
pub fn run_partition(ctx: &RunContext, params: &PartitionParams) -> Result<ArtifactPaths> {
    let trials = ctx.trials_or(params.trials);
    let cfg = OfdmConfig::centered(params.dft_size, params.k)?;
    let spec = PdpSpec::exponential(params.tau_max);
    let k = params.k;

    let mut table = CsvTable::new(vec!["estimator", "snr_db", "mse", "mse_se"]);
    let labels: Vec<String> = std::iter::once("ls".to_string())
        .chain(params.blocks.iter().map(|b| format!("block-{b}")))
        .collect();
    let mut series: Vec<Series> = labels
        .iter()
        .map(|l| Series::new(l.clone(), Vec::new()))
        .collect();
    let mut rows: Vec<Vec<String>> = Vec::new();

    for &snr in &params.snr_db {
        let scenario = ChannelScenario::stationary(spec, snr);
        let ts = generate_training_set(
            &scenario,
            &cfg,
            params.m,
            sub_seed(ctx.seed, &[50, snr.to_bits()]),
        )?;
        // per block size: one trained filter per block position
        let mut filters: Vec<Vec<(usize, LinearWeights)>> = Vec::new();
        for &block in &params.blocks {
            let positions = partition_symbol(&cfg, block)?;
            let mut per_position = Vec::with_capacity(positions.len());
            for pos in &positions {
                let sub = ts.restrict_rows(pos);
                per_position.push((pos[0], train_linear(&sub)?));
            }
            filters.push(per_position);
        }

        let sampler = ScenarioSampler::new(&scenario, &cfg)?;
        let n_cfgs = 1 + params.blocks.len();
        let eval_seed = sub_seed(ctx.seed, &[51, snr.to_bits()]);
        let chunks = par::map_chunks(trials as usize, par::DEFAULT_CHUNK, |chunk_id, range| {
            let mut rng = derive_stream(eval_seed, StreamDomain::Evaluation, chunk_id as u64);
            let mut stats = vec![RunningStats::default(); n_cfgs];
            for _ in range {
                let (cfr, obs) = sampler.sample_pair(&mut rng);
                // LS baseline
                let ls: f64 = obs
                    .iter()
                    .zip(cfr.iter())
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    / k as f64;
                stats[0].push(ls);
                for (c_idx, per_position) in filters.iter().enumerate() {
                    let mut total = 0.0;
                    for (start, w) in per_position {
                        let d = w.dim();
                        let est = w.matrix() * obs.rows(*start, d);
                        total += est
                            .iter()
                            .zip(cfr.rows(*start, d).iter())
                            .map(|(a, b)| (a - b).norm_sqr())
                            .sum::<f64>();
                    }
                    stats[c_idx + 1].push(total / k as f64);
                }
            }
            stats
        });
        let mut stats = vec![RunningStats::default(); n_cfgs];
        for c in chunks {
            for (s, cs) in stats.iter_mut().zip(&c) {
                s.merge(cs);
            }
        }
        for (i, s) in stats.iter().enumerate() {
            rows.push(vec![
                labels[i].clone(),
                cell_f(snr),
                cell_f(s.mean()),
                cell_f(s.std_error()),
            ]);
            series[i].points.push((snr, s.mean()));
        }
    }
    // group rows by estimator for a stable, readable layout
    for label in &labels {
        for row in rows.iter().filter(|r| &r[0] == label) {
            table.push_row(row.clone());
        }
    }

    let mut meta = meta_base(ctx, "partition", params);
    meta["trials"] = serde_json::json!(trials);
    // log-domain SNR average per estimator, the figure's summary statistic
    let mut geo = serde_json::Map::new();
    for s in &series {
        let mean_log =
            s.points.iter().map(|&(_, y)| y.ln()).sum::<f64>() / s.points.len() as f64;
        geo.insert(s.label.clone(), serde_json::json!(mean_log.exp()));
    }
    meta["snr_geometric_mean_mse"] = serde_json::Value::Object(geo);
    let svg = ctx.plot.then(|| {
        line_plot(
            &PlotSpec {
                title: "symbol partitioning: MSE per block size".into(),
                x_label: "SNR (dB)".into(),
                y_label: "MSE".into(),
                log_y: true,
            },
            &series,
        )
    });
    finish(ctx, "partition", &table, meta, svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn tmp_ctx(name: &str) -> RunContext {
        let dir = std::env::temp_dir().join(format!("chanest-runner-{name}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        RunContext::new(1, dir)
    }

    #[test]
    fn dft_size_rule() {
        assert_eq!(dft_size_for(4, 2), 16);
        assert_eq!(dft_size_for(12, 2), 16);
        assert_eq!(dft_size_for(30, 2), 64);
        assert_eq!(dft_size_for(60, 2), 64);
        assert_eq!(dft_size_for(120, 2), 128);
        // CP constraint dominates when tau_max is large
        assert_eq!(dft_size_for(4, 16), 128);
    }

    #[test]
    fn alpha_curve_runner_writes_deterministic_artifacts() {
        let ctx = tmp_ctx("curve");
        let params = AlphaCurveParams {
            epsilon: 0.05,
            kappa_grid: vec![200, 600, 1200],
        };
        let a = run_alpha_curve(&ctx, &params).unwrap();
        let first = fs::read_to_string(&a.csv).unwrap();
        assert!(first.starts_with("kappa,alpha,epsilon\n"));
        assert_eq!(first.lines().count(), 4);
        let b = run_alpha_curve(&ctx, &params).unwrap();
        assert_eq!(first, fs::read_to_string(&b.csv).unwrap());
        assert!(a.metadata.exists());
        let _ = fs::remove_dir_all(&ctx.out_dir);
    }

    #[test]
    fn fig5_runner_small_smoke() {
        let mut ctx = tmp_ctx("fig5");
        ctx.trials = Some(4_000);
        let params = Fig5Params {
            k_list: vec![4],
            snr_db: vec![0.0, 10.0],
            ..Fig5Params::default()
        };
        let paths = run_fig5(&ctx, &params).unwrap();
        let text = fs::read_to_string(&paths.csv).unwrap();
        assert_eq!(text.lines().count(), 3);
        // lmmse theory column is positive and below sigma2
        let line: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        let theory: f64 = line[6].parse().unwrap();
        assert!(theory > 0.0 && theory < 1.0);
        let _ = fs::remove_dir_all(&ctx.out_dir);
    }

    #[test]
    fn partition_runner_small_smoke() {
        let mut ctx = tmp_ctx("part");
        ctx.trials = Some(500);
        let params = PartitionParams {
            dft_size: 64,
            k: 48,
            m: 120,
            tau_max: 8,
            blocks: vec![12, 48],
            snr_db: vec![10.0],
            ..PartitionParams::default()
        };
        let paths = run_partition(&ctx, &params).unwrap();
        let text = fs::read_to_string(&paths.csv).unwrap();
        // header + 3 estimators x 1 snr
        assert_eq!(text.lines().count(), 4);
        assert!(text.contains("ls,"));
        assert!(text.contains("block-12,"));
        let _ = fs::remove_dir_all(&ctx.out_dir);
    }
}
