//! Linear estimators: analytic LMMSE, robust LMMSE built from a worst-case
//! uniform PDP, and the least-squares-trained linear module.

use crate::channel::{freq_correlation, OfdmConfig, PdpSpec};
use crate::experiments::TrainingSet;
use crate::linalg::{hermitian_solve, identity, CMat, CVec};
use crate::{Error, Result};
use num_complex::Complex64;

/// A `D x D` complex filter applied to the vector of LS estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearWeights {
    w: CMat,
}

impl LinearWeights {
    pub fn new(w: CMat) -> Result<Self> {
        if w.nrows() != w.ncols() {
            return Err(Error::DimensionMismatch {
                expected: w.nrows(),
                got: w.ncols(),
            });
        }
        if w.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::NonFinite("linear weight matrix"));
        }
        Ok(Self { w })
    }

    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.w
    }
}

/// Wiener filter `W = R (R + sigma2 I)^(-1)` for a stationary channel with
/// frequency correlation `R` and noise variance `sigma2`.
pub fn lmmse_weights(r_hh: &CMat, sigma2: f64) -> Result<LinearWeights> {
    let k = r_hh.nrows();
    let a = r_hh + identity(k) * Complex64::new(sigma2, 0.0);
    // A Hermitian: A X = R gives X = A^(-1) R, and W = R A^(-1) = X^H.
    let x = hermitian_solve(&a, r_hh).ok_or(Error::IllConditioned(
        "regularized correlation failed its Cholesky factorization",
    ))?;
    LinearWeights::new(x.adjoint())
}

/// LMMSE weights built from a uniform PDP with the worst-case maximum
/// delay; the standard choice when the true PDP is unknown.
///
/// `tau_upper` must dominate every delay the scenario can realize.
pub fn robust_lmmse_weights(
    tau_upper: usize,
    cfg: &OfdmConfig,
    sigma2: f64,
) -> Result<LinearWeights> {
    let spec = PdpSpec::uniform(tau_upper);
    spec.validate_for(cfg)?;
    lmmse_weights(&freq_correlation(&spec, cfg), sigma2)
}

/// Least-squares solution of `min_W sum_m ||W x_m - y_m||^2` over the
/// training set: `W` solves the normal equations `W G = C` with Gram
/// `G = sum_m x_m x_m^H` and cross term `C = sum_m y_m x_m^H`.
pub fn train_linear(ts: &TrainingSet) -> Result<LinearWeights> {
    let d = ts.dim();
    let m = ts.len();
    if m < d {
        return Err(Error::RankDeficient(
            "fewer samples than the input dimension",
        ));
    }
    let x = ts.inputs();
    let y = ts.labels();
    let gram = x * x.adjoint();
    let cross = y * x.adjoint();
    // G Hermitian: solve G Z = C^H, then W = Z^H.
    let z = hermitian_solve(&gram, &cross.adjoint()).ok_or(Error::RankDeficient(
        "Gram matrix failed its Cholesky factorization",
    ))?;
    LinearWeights::new(z.adjoint())
}

/// Applies the filter: plain matrix-vector product.
pub fn apply_linear(w: &LinearWeights, input: &CVec) -> Result<CVec> {
    if input.len() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            got: input.len(),
        });
    }
    Ok(w.matrix() * input)
}

/// Average per-subcarrier MSE of the Wiener filter:
/// `(1/K) tr(R - R (R + sigma2 I)^(-1) R)`.
pub fn lmmse_mse_theoretical(r_hh: &CMat, sigma2: f64) -> Result<f64> {
    let per = lmmse_mse_per_subcarrier(r_hh, sigma2)?;
    Ok(per.iter().sum::<f64>() / per.len() as f64)
}

/// Per-subcarrier Wiener MSE, the diagonal of `R - W R`.
pub fn lmmse_mse_per_subcarrier(r_hh: &CMat, sigma2: f64) -> Result<Vec<f64>> {
    let w = lmmse_weights(r_hh, sigma2)?;
    let residual = r_hh - w.matrix() * r_hh;
    Ok(residual.diagonal().iter().map(|c| c.re).collect())
}

/// MSE of an arbitrary linear filter under a stationary channel with
/// correlation `R`: `(1/K)(tr((W-I) R (W-I)^H) + sigma2 tr(W W^H))`.
///
/// Used as an exact cross-check for Monte Carlo estimates.
pub fn linear_mse_given_correlation(w: &LinearWeights, r_hh: &CMat, sigma2: f64) -> f64 {
    let k = w.dim();
    let a = w.matrix() - identity(k);
    let signal = (&a * r_hh * a.adjoint()).trace().re;
    let noise = sigma2 * w.matrix().iter().map(|c| c.norm_sqr()).sum::<f64>();
    (signal + noise) / k as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelScenario, PdpKind};
    use crate::experiments::generate_training_set;
    use crate::rng::{derive_stream, StreamDomain};
    use rand::Rng;

    fn cfg16_4() -> OfdmConfig {
        OfdmConfig::centered(16, 4).unwrap()
    }

    #[test]
    fn scalar_wiener_gain() {
        let r = CMat::from_element(1, 1, Complex64::new(1.0, 0.0));
        let w = lmmse_weights(&r, 1.0).unwrap();
        assert!((w.matrix()[(0, 0)] - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        assert!((lmmse_mse_theoretical(&r, 1.0).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn noiseless_limit_recovers_identity() {
        // full-rank correlation: 8 uniform taps on 4 subcarriers
        let cfg = cfg16_4();
        let r = freq_correlation(&PdpSpec::uniform(3), &cfg);
        let w = lmmse_weights(&r, 1e-9).unwrap();
        let max_dev = (w.matrix() - identity(4))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        assert!(max_dev < 1e-6, "max |W - I| = {max_dev}");
    }

    #[test]
    fn wiener_solve_satisfies_normal_equation() {
        let cfg = cfg16_4();
        let r = freq_correlation(&PdpSpec::exponential(2), &cfg);
        let sigma2 = 0.1;
        let w = lmmse_weights(&r, sigma2).unwrap();
        let a = &r + identity(4) * Complex64::new(sigma2, 0.0);
        let residual = (w.matrix() * a - &r).norm();
        assert!(residual < 1e-12);
    }

    #[test]
    fn theoretical_mse_monotone_in_noise() {
        let cfg = cfg16_4();
        let r = freq_correlation(&PdpSpec::exponential(2), &cfg);
        let grid = [1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0];
        let vals: Vec<f64> = grid
            .iter()
            .map(|&s2| lmmse_mse_theoretical(&r, s2).unwrap())
            .collect();
        for w in vals.windows(2) {
            assert!(w[1] >= w[0]);
        }
        // uninformative limit: MSE -> channel power 1
        assert!((lmmse_mse_theoretical(&r, 1e7).unwrap() - 1.0).abs() < 1e-5);
        // and every value sits in (0, min(1, sigma2)]
        for (&s2, &v) in grid.iter().zip(&vals) {
            assert!(v > 0.0 && v <= 1.0f64.min(s2) + 1e-12, "s2={s2} v={v}");
        }
    }

    #[test]
    fn robust_equals_uniform_lmmse() {
        let cfg = cfg16_4();
        let sigma2 = 0.25;
        let direct = lmmse_weights(&freq_correlation(&PdpSpec::uniform(3), &cfg), sigma2).unwrap();
        let robust = robust_lmmse_weights(3, &cfg, sigma2).unwrap();
        assert!((direct.matrix() - robust.matrix()).norm() < 1e-14);

        // tau_upper = 0 composes with the all-ones correlation
        let flat = robust_lmmse_weights(0, &cfg, sigma2).unwrap();
        let ones = CMat::from_element(4, 4, Complex64::new(1.0, 0.0));
        let expect = lmmse_weights(&ones, sigma2).unwrap();
        assert!((flat.matrix() - expect.matrix()).norm() < 1e-12);
    }

    #[test]
    fn robust_pays_a_mismatch_penalty() {
        // Quasi-stationary tau in {1..16}: the robust filter averaged over
        // the realizable correlations is worse than the matched filter.
        let cfg = OfdmConfig::centered(64, 60).unwrap();
        let sigma2 = 0.1;
        let robust = robust_lmmse_weights(16, &cfg, sigma2).unwrap();
        let mut robust_mse = 0.0;
        let mut matched_mse = 0.0;
        for tau in 1..=16 {
            let r = freq_correlation(&PdpSpec::exponential(tau), &cfg);
            robust_mse += linear_mse_given_correlation(&robust, &r, sigma2);
            matched_mse += lmmse_mse_theoretical(&r, sigma2).unwrap();
        }
        assert!(
            robust_mse > matched_mse,
            "robust {robust_mse} vs matched {matched_mse}"
        );
    }

    #[test]
    fn train_linear_on_noiseless_data_is_identity() {
        // full-rank inputs: 4 uniform taps span the 4 usable subcarriers
        let cfg = cfg16_4();
        let scenario = ChannelScenario::stationary(PdpSpec::uniform(3), f64::INFINITY);
        assert_eq!(scenario.sigma2(), 0.0);
        let ts = generate_training_set(&scenario, &cfg, 64, 5).unwrap();
        let w = train_linear(&ts).unwrap();
        let max_dev = (w.matrix() - identity(4))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        assert!(max_dev < 1e-8, "max |W - I| = {max_dev}");
    }

    #[test]
    fn train_linear_scalar_closed_form() {
        let x = Complex64::new(0.4, -1.1);
        let y = Complex64::new(-0.3, 0.8);
        let inputs = CMat::from_element(1, 1, x);
        let labels = CMat::from_element(1, 1, y);
        let ts = TrainingSet::from_parts(inputs, labels, "scalar".into(), 0).unwrap();
        let w = train_linear(&ts).unwrap();
        let expect = y * x.conj() / x.norm_sqr();
        assert!((w.matrix()[(0, 0)] - expect).norm() < 1e-14);
    }

    #[test]
    fn train_linear_rejects_underdetermined_sets() {
        let cfg = cfg16_4();
        let scenario = ChannelScenario::stationary(PdpSpec::exponential(2), 0.0);
        let ts = generate_training_set(&scenario, &cfg, 3, 5).unwrap();
        assert!(matches!(
            train_linear(&ts),
            Err(Error::RankDeficient(_))
        ));
    }

    #[test]
    fn trained_weights_approach_wiener_with_more_data() {
        let cfg = cfg16_4();
        let scenario = ChannelScenario::stationary(PdpSpec::exponential(2), 10.0);
        let r = freq_correlation(&PdpSpec::exponential(2), &cfg);
        let wiener = lmmse_weights(&r, scenario.sigma2()).unwrap();

        let dist = |m: usize| {
            let ts = generate_training_set(&scenario, &cfg, m, 31).unwrap();
            let w = train_linear(&ts).unwrap();
            (w.matrix() - wiener.matrix()).norm()
        };
        let far = dist(1_000);
        let near = dist(100_000);
        assert!(
            near < far,
            "Frobenius distance should shrink: {far} -> {near}"
        );
    }

    #[test]
    fn trained_weights_are_a_loss_minimum() {
        // Single-entry perturbations of W* never reduce the training loss.
        let cfg = cfg16_4();
        let scenario = ChannelScenario::stationary(PdpSpec::exponential(2), 0.0);
        let ts = generate_training_set(&scenario, &cfg, 50, 17).unwrap();
        let w = train_linear(&ts).unwrap();

        let loss = |wm: &CMat| -> f64 {
            let residual = wm * ts.inputs() - ts.labels();
            residual.iter().map(|c| c.norm_sqr()).sum()
        };
        let base = loss(w.matrix());
        let delta = 1e-3;
        let mut rng = derive_stream(3, StreamDomain::Model, 0);
        for _ in 0..12 {
            let i = rng.random_range(0..4);
            let j = rng.random_range(0..4);
            for step in [
                Complex64::new(delta, 0.0),
                Complex64::new(-delta, 0.0),
                Complex64::new(0.0, delta),
                Complex64::new(0.0, -delta),
            ] {
                let mut perturbed = w.matrix().clone();
                perturbed[(i, j)] += step;
                assert!(loss(&perturbed) >= base);
            }
        }

        // Residual gradient 2 (W X - Y) X^H vanishes at the optimum.
        let grad = (w.matrix() * ts.inputs() - ts.labels()) * ts.inputs().adjoint() * Complex64::new(2.0, 0.0);
        let max_entry = grad.iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(max_entry < 1e-9, "gradient max entry {max_entry}");
    }

    #[test]
    fn apply_linear_matches_reference_product() {
        let mut rng = derive_stream(8, StreamDomain::Model, 0);
        let mut draw = |_: usize| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let w = CMat::from_fn(4, 4, |_, _| draw(0));
        let x = CVec::from_fn(4, |_, _| draw(0));
        let lw = LinearWeights::new(w.clone()).unwrap();
        let got = apply_linear(&lw, &x).unwrap();
        // independent evaluation with an explicit double loop
        for i in 0..4 {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..4 {
                acc += w[(i, j)] * x[j];
            }
            assert!((got[i] - acc).norm() < 1e-12);
        }

        // identity and zero filters
        let id = LinearWeights::new(identity(4)).unwrap();
        assert_eq!(apply_linear(&id, &x).unwrap(), x);
        let zero = LinearWeights::new(CMat::zeros(4, 4)).unwrap();
        assert!(apply_linear(&zero, &x).unwrap().iter().all(|c| c.norm() == 0.0));

        // dimension mismatch is an error
        let short = CVec::zeros(3);
        assert!(matches!(
            apply_linear(&lw, &short),
            Err(Error::DimensionMismatch { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn uniform_pdp_kind_is_distinct() {
        let p = PdpSpec::uniform(3);
        assert_eq!(p.kind, PdpKind::Uniform);
    }
}
