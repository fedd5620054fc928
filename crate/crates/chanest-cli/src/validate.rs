//! The `validate` subcommand: named invariant and oracle checks with one
//! pass/fail line each. `--quick` runs only the closed-form tier.

use chanest::analysis::{
    alpha_for_epsilon, chi2_cdf, chi2_pdf, epsilon_monte_carlo, epsilon_quadrature,
    sufficient_sample_size,
};
use chanest::channel::{freq_correlation, pdp_powers, ChannelScenario, OfdmConfig, PdpSpec};
use chanest::estimators::{
    lmmse_mse_theoretical, lmmse_weights, train_linear, Estimator,
};
use chanest::experiments::runners::{run_alpha_curve, AlphaCurveParams, RunContext};
use chanest::experiments::{evaluate_mse, generate_training_set, partition_symbol};
use chanest::linalg::{hermitian_eigenvalues, identity};

type Check = (&'static str, fn(u64) -> Result<(), String>);

fn ok_if(cond: bool, detail: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(detail)
    }
}

fn pdp_normalization(_seed: u64) -> Result<(), String> {
    for tau in [0usize, 1, 2, 16, 64] {
        for spec in [PdpSpec::exponential(tau), PdpSpec::uniform(tau)] {
            let p = pdp_powers(&spec);
            let sum: f64 = p.iter().sum();
            ok_if((sum - 1.0).abs() < 1e-12, format!("{spec:?} sums to {sum}"))?;
        }
    }
    let p = pdp_powers(&PdpSpec::exponential(2));
    ok_if(
        (p[0] - 0.50648).abs() < 1e-5,
        format!("exp tau=2 head power {}", p[0]),
    )
}

fn correlation_structure(_seed: u64) -> Result<(), String> {
    let cfg = OfdmConfig::centered(64, 24).map_err(|e| e.to_string())?;
    let r = freq_correlation(&PdpSpec::exponential(5), &cfg);
    for a in 0..24 {
        ok_if(
            (r[(a, a)].re - 1.0).abs() < 1e-12 && r[(a, a)].im.abs() < 1e-12,
            format!("diagonal {a} is {}", r[(a, a)]),
        )?;
    }
    let herm = (0..24).all(|a| (0..24).all(|b| (r[(a, b)] - r[(b, a)].conj()).norm() < 1e-12));
    ok_if(herm, "correlation is not Hermitian".into())?;
    let min_eig = hermitian_eigenvalues(&r)[0];
    ok_if(min_eig >= -1e-9, format!("smallest eigenvalue {min_eig}"))
}

fn scalar_wiener(_seed: u64) -> Result<(), String> {
    let r = identity(1);
    let w = lmmse_weights(&r, 1.0).map_err(|e| e.to_string())?;
    ok_if(
        (w.matrix()[(0, 0)].re - 0.5).abs() < 1e-14,
        format!("scalar gain {}", w.matrix()[(0, 0)]),
    )?;
    let mse = lmmse_mse_theoretical(&r, 1.0).map_err(|e| e.to_string())?;
    ok_if((mse - 0.5).abs() < 1e-14, format!("scalar mse {mse}"))
}

fn noiseless_limit(_seed: u64) -> Result<(), String> {
    let cfg = OfdmConfig::centered(16, 4).map_err(|e| e.to_string())?;
    let r = freq_correlation(&PdpSpec::uniform(3), &cfg);
    let w = lmmse_weights(&r, 1e-9).map_err(|e| e.to_string())?;
    let dev = (w.matrix() - identity(4))
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    ok_if(dev < 1e-6, format!("max |W - I| = {dev}"))
}

fn chi2_closed_forms(_seed: u64) -> Result<(), String> {
    let cdf = chi2_cdf(2.0, 2).map_err(|e| e.to_string())?;
    ok_if(
        (cdf - (1.0 - (-1.0f64).exp())).abs() < 1e-14,
        format!("cdf(2, 2) = {cdf}"),
    )?;
    ok_if((chi2_pdf(0.0, 2) - 0.5).abs() < 1e-15, "pdf(0, 2)".into())?;
    ok_if(chi2_pdf(0.0, 7) == 0.0, "pdf(0, 7)".into())
}

fn epsilon_identity(_seed: u64) -> Result<(), String> {
    for kappa in [2u64, 200, 20000] {
        let v = epsilon_quadrature(kappa, 0.0).map_err(|e| e.to_string())?;
        ok_if((v - 0.5).abs() < 1e-6, format!("eps({kappa}, 0) = {v}"))?;
    }
    Ok(())
}

fn curve_anchor(_seed: u64) -> Result<(), String> {
    let a = alpha_for_epsilon(1200, 0.05).map_err(|e| e.to_string())?;
    ok_if(
        (0.08..=0.12).contains(&a),
        format!("alpha(1200, 0.05) = {a}"),
    )
}

fn partition_property(_seed: u64) -> Result<(), String> {
    let cfg = OfdmConfig::centered(512, 480).map_err(|e| e.to_string())?;
    let blocks = partition_symbol(&cfg, 60).map_err(|e| e.to_string())?;
    ok_if(blocks.len() == 8, format!("{} blocks", blocks.len()))?;
    let flat: Vec<usize> = blocks.concat();
    ok_if(
        flat == (0..480).collect::<Vec<_>>(),
        "blocks do not concatenate to the usable positions".into(),
    )
}

fn ls_mse(seed: u64) -> Result<(), String> {
    let cfg = OfdmConfig::centered(16, 4).map_err(|e| e.to_string())?;
    let scenario = ChannelScenario::stationary(PdpSpec::exponential(2), 0.0);
    let report = evaluate_mse(&Estimator::LsIdentity, "ls", &scenario, &cfg, 20_000, seed, None)
        .map_err(|e| e.to_string())?;
    ok_if(
        (report.mse - 1.0).abs() <= 3.0 * report.mse_std_error,
        format!("ls mse {} +- {}", report.mse, report.mse_std_error),
    )
}

fn runner_determinism(seed: u64) -> Result<(), String> {
    let dir = std::env::temp_dir().join(format!("chanest-validate-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let ctx = RunContext::new(seed, dir.clone());
    let params = AlphaCurveParams {
        epsilon: 0.05,
        kappa_grid: vec![200, 1200],
    };
    let a = run_alpha_curve(&ctx, &params).map_err(|e| e.to_string())?;
    let first = std::fs::read(&a.csv).map_err(|e| e.to_string())?;
    let b = run_alpha_curve(&ctx, &params).map_err(|e| e.to_string())?;
    let second = std::fs::read(&b.csv).map_err(|e| e.to_string())?;
    let _ = std::fs::remove_dir_all(&dir);
    ok_if(first == second, "rerun changed the CSV bytes".into())
}

fn sufficient_size(_seed: u64) -> Result<(), String> {
    let m = sufficient_sample_size(0.1, 0.05).map_err(|e| e.to_string())?;
    ok_if((540..=660).contains(&m), format!("sufficient M = {m}"))
}

fn quadrature_vs_monte_carlo(seed: u64) -> Result<(), String> {
    for (kappa, alpha) in [(20u64, 0.05), (200, 0.3), (1200, 0.1)] {
        let want = epsilon_quadrature(kappa, alpha).map_err(|e| e.to_string())?;
        let (est, se) = epsilon_monte_carlo(kappa, alpha, 1_000_000, seed);
        ok_if(
            (est - want).abs() <= 3.0 * se,
            format!("kappa={kappa} alpha={alpha}: quad {want} vs mc {est} (se {se})"),
        )?;
    }
    Ok(())
}

fn wiener_oracle(seed: u64) -> Result<(), String> {
    for (k, snr) in [(4usize, 0.0), (8, 10.0)] {
        let cfg = OfdmConfig::centered(16, k).map_err(|e| e.to_string())?;
        let spec = PdpSpec::exponential(2);
        let scenario = ChannelScenario::stationary(spec, snr);
        let r = freq_correlation(&spec, &cfg);
        let w = lmmse_weights(&r, scenario.sigma2()).map_err(|e| e.to_string())?;
        let theory = lmmse_mse_theoretical(&r, scenario.sigma2()).map_err(|e| e.to_string())?;
        let report = evaluate_mse(
            &Estimator::Linear(w),
            "lmmse",
            &scenario,
            &cfg,
            100_000,
            seed,
            Some(theory),
        )
        .map_err(|e| e.to_string())?;
        ok_if(
            (report.mse - theory).abs() <= 3.0 * report.mse_std_error,
            format!("K={k} snr={snr}: mc {} vs theory {theory}", report.mse),
        )?;
    }
    Ok(())
}

fn training_convergence(seed: u64) -> Result<(), String> {
    let cfg = OfdmConfig::centered(16, 4).map_err(|e| e.to_string())?;
    let spec = PdpSpec::exponential(2);
    let scenario = ChannelScenario::stationary(spec, 10.0);
    let r = freq_correlation(&spec, &cfg);
    let wiener = lmmse_weights(&r, scenario.sigma2()).map_err(|e| e.to_string())?;
    let dist = |m: usize| -> Result<f64, String> {
        let ts = generate_training_set(&scenario, &cfg, m, seed).map_err(|e| e.to_string())?;
        let w = train_linear(&ts).map_err(|e| e.to_string())?;
        Ok((w.matrix() - wiener.matrix()).norm())
    };
    let far = dist(1_000)?;
    let near = dist(100_000)?;
    ok_if(near < far, format!("distance {far} -> {near}"))
}

pub fn run_checks(quick: bool, seed: u64) -> usize {
    let quick_checks: &[Check] = &[
        ("pdp-normalization", pdp_normalization),
        ("correlation-structure", correlation_structure),
        ("scalar-wiener", scalar_wiener),
        ("noiseless-limit", noiseless_limit),
        ("chi2-closed-forms", chi2_closed_forms),
        ("epsilon-identity", epsilon_identity),
        ("curve-anchor", curve_anchor),
        ("partition-property", partition_property),
        ("ls-mse", ls_mse),
        ("runner-determinism", runner_determinism),
    ];
    let full_checks: &[Check] = &[
        ("sufficient-size", sufficient_size),
        ("quadrature-vs-monte-carlo", quadrature_vs_monte_carlo),
        ("wiener-oracle", wiener_oracle),
        ("training-convergence", training_convergence),
    ];

    let mut failures = 0;
    let selected: Vec<&Check> = if quick {
        quick_checks.iter().collect()
    } else {
        quick_checks.iter().chain(full_checks.iter()).collect()
    };
    for (name, check) in selected {
        match check(seed) {
            Ok(()) => println!("check {name}: PASS"),
            Err(detail) => {
                failures += 1;
                println!("check {name}: FAIL ({detail})");
            }
        }
    }
    failures
}
