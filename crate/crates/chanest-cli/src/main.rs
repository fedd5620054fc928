//! Command-line front end: parses flags and an optional JSON config file
//! (flags override file values override defaults), dispatches the runners,
//! and emits CSV artifacts with JSON metadata sidecars plus optional SVG
//! plots.

mod validate;

use anyhow::{bail, Context, Result};
use chanest::experiments::runners::{
    run_alpha_curve, run_alpha_vs_k, run_alpha_vs_m, run_dnn_quasi, run_fig5, run_partition,
    AlphaCurveParams, AlphaVsKParams, AlphaVsMParams, DnnQuasiParams, Fig5Params, PartitionParams,
    RunContext,
};
use chanest::report::ArtifactPaths;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "chanest",
    about = "OFDM channel-estimation laboratory: sample-complexity curves and Monte Carlo experiments",
    version
)]
struct Cli {
    /// Master seed for every derived random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (default: $CHANEST_OUT or ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Override the evaluation trial count of the chosen runner.
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Also write an SVG line plot next to the CSV.
    #[arg(long, global = true)]
    plot: bool,

    /// JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct SweepArgs {
    /// DFT size N.
    #[arg(long)]
    n: Option<usize>,

    /// Training-set size M.
    #[arg(long)]
    m: Option<usize>,

    /// Maximum delay of the exponential PDP, in sample periods.
    #[arg(long = "tau-max")]
    tau_max: Option<usize>,

    /// Usable-carrier counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,

    /// SNR grid in dB, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    snr: Option<Vec<f64>>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate the alpha-vs-kappa curve at fixed confidence.
    AlphaCurve {
        /// Probability that the optimum's training loss beats the learned one.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Kappa grid as start:stop:step.
        #[arg(long)]
        kappa: Option<String>,
    },
    /// Trained-linear vs LMMSE MSE over SNR at small K.
    Fig5(SweepArgs),
    /// Scaled MSE difference vs input dimension.
    AlphaVsK(SweepArgs),
    /// Scaled MSE difference vs training-set size (SNR: first of --snr).
    AlphaVsM(SweepArgs),
    /// Quasi-stationary comparison: LS, robust LMMSE, MLP (large/small set).
    DnnQuasi {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Delay set as start:stop or a comma list.
        #[arg(long = "tau-set")]
        tau_set: Option<String>,
        /// Large training-set size.
        #[arg(long = "m-large")]
        m_large: Option<usize>,
    },
    /// Symbol-partitioning study: per-block trained estimators.
    Partition {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Block sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        blocks: Option<Vec<usize>>,
    },
    /// Run the invariant/oracle checks and report pass/fail per check.
    Validate {
        /// Only the fast closed-form checks.
        #[arg(long)]
        quick: bool,
    },
}

/// JSON config schema; keys mirror the CLI flags in kebab-case.
#[derive(Debug, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    out: Option<PathBuf>,
    workers: Option<usize>,
    trials: Option<u64>,
    plot: Option<bool>,
    epsilon: Option<f64>,
    kappa: Option<String>,
    n: Option<usize>,
    m: Option<usize>,
    m_large: Option<usize>,
    tau_max: Option<usize>,
    tau_set: Option<String>,
    k: Option<Vec<usize>>,
    snr: Option<Vec<f64>>,
    blocks: Option<Vec<usize>>,
}

fn parse_kappa_spec(text: &str) -> Result<Vec<u64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        bail!("kappa spec {text:?} must be start:stop:step");
    }
    let start: u64 = parts[0].parse().context("kappa start")?;
    let stop: u64 = parts[1].parse().context("kappa stop")?;
    let step: u64 = parts[2].parse().context("kappa step")?;
    if step == 0 || stop < start {
        bail!("kappa spec {text:?} must have step > 0 and stop >= start");
    }
    Ok((start..=stop).step_by(step as usize).collect())
}

fn parse_tau_set(text: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = text.split_once(':') {
        let lo: usize = a.parse().context("tau-set start")?;
        let hi: usize = b.parse().context("tau-set stop")?;
        if hi < lo {
            bail!("tau-set {text:?} must have stop >= start");
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("tau-set entry {s:?}")))
        .collect()
}

fn report(paths: &ArtifactPaths) {
    println!("wrote {}", paths.csv.display());
    println!("wrote {}", paths.metadata.display());
    if let Some(svg) = &paths.svg {
        println!("wrote {}", svg.display());
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let file: FileConfig = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config file {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config file {}", path.display()))?
        }
        None => FileConfig::default(),
    };

    if let Some(workers) = cli.workers.or(file.workers) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .context("initializing the worker pool")?;
    }

    let out_dir = cli
        .out
        .or(file.out)
        .or_else(|| std::env::var_os("CHANEST_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let mut ctx = RunContext::new(cli.seed.or(file.seed).unwrap_or(1), out_dir);
    ctx.trials = cli.trials.or(file.trials);
    ctx.plot = cli.plot || file.plot.unwrap_or(false);

    match cli.command {
        Command::AlphaCurve { epsilon, kappa } => {
            let mut params = AlphaCurveParams::default();
            if let Some(eps) = epsilon.or(file.epsilon) {
                params.epsilon = eps;
            }
            if let Some(spec) = kappa.or(file.kappa) {
                params.kappa_grid = parse_kappa_spec(&spec)?;
            }
            report(&run_alpha_curve(&ctx, &params)?);
        }
        Command::Fig5(sweep) => {
            let mut params = Fig5Params::default();
            if let Some(n) = sweep.n.or(file.n) {
                params.dft_size = n;
            }
            if let Some(m) = sweep.m.or(file.m) {
                params.m = m;
            }
            if let Some(t) = sweep.tau_max.or(file.tau_max) {
                params.tau_max = t;
            }
            if let Some(k) = sweep.k.or(file.k) {
                params.k_list = k;
            }
            if let Some(snr) = sweep.snr.or(file.snr) {
                params.snr_db = snr;
            }
            report(&run_fig5(&ctx, &params)?);
        }
        Command::AlphaVsK(sweep) => {
            let mut params = AlphaVsKParams::default();
            if let Some(m) = sweep.m.or(file.m) {
                params.m = m;
            }
            if let Some(t) = sweep.tau_max.or(file.tau_max) {
                params.tau_max = t;
            }
            if let Some(k) = sweep.k.or(file.k) {
                params.k_list = k;
            }
            if let Some(snr) = sweep.snr.or(file.snr) {
                params.snr_db = snr;
            }
            report(&run_alpha_vs_k(&ctx, &params)?);
        }
        Command::AlphaVsM(sweep) => {
            let mut params = AlphaVsMParams::default();
            if let Some(n) = sweep.n.or(file.n) {
                params.dft_size = n;
            }
            if let Some(t) = sweep.tau_max.or(file.tau_max) {
                params.tau_max = t;
            }
            if let Some(k) = sweep.k.or(file.k) {
                params.k_list = k;
            }
            if let Some(snr) = sweep.snr.or(file.snr) {
                params.snr_db = *snr
                    .first()
                    .context("alpha-vs-m needs one SNR value")?;
            }
            report(&run_alpha_vs_m(&ctx, &params)?);
        }
        Command::DnnQuasi {
            sweep,
            tau_set,
            m_large,
        } => {
            let mut params = DnnQuasiParams::default();
            if let Some(n) = sweep.n.or(file.n) {
                params.dft_size = n;
            }
            if let Some(k) = sweep.k.or(file.k) {
                params.k = *k.first().context("dnn-quasi needs one K value")?;
            }
            if let Some(m) = sweep.m.or(file.m) {
                params.m_small = m;
            }
            if let Some(m) = m_large.or(file.m_large) {
                params.m_large = m;
            }
            if let Some(set) = tau_set.or(file.tau_set) {
                params.tau_set = parse_tau_set(&set)?;
                params.tau_upper = *params
                    .tau_set
                    .iter()
                    .max()
                    .context("tau-set must be non-empty")?;
            }
            if let Some(snr) = sweep.snr.or(file.snr) {
                params.snr_db = snr;
            }
            report(&run_dnn_quasi(&ctx, &params)?);
        }
        Command::Partition { sweep, blocks } => {
            let mut params = PartitionParams::default();
            if let Some(n) = sweep.n.or(file.n) {
                params.dft_size = n;
            }
            if let Some(k) = sweep.k.or(file.k) {
                params.k = *k.first().context("partition needs one K value")?;
            }
            if let Some(m) = sweep.m.or(file.m) {
                params.m = m;
            }
            if let Some(t) = sweep.tau_max.or(file.tau_max) {
                params.tau_max = t;
            }
            if let Some(b) = blocks.or(file.blocks) {
                params.blocks = b;
            }
            if let Some(snr) = sweep.snr.or(file.snr) {
                params.snr_db = snr;
            }
            report(&run_partition(&ctx, &params)?);
        }
        Command::Validate { quick } => {
            let failures = validate::run_checks(quick, ctx.seed);
            if failures > 0 {
                bail!("{failures} validation check(s) failed");
            }
        }
    }
    Ok(())
}
