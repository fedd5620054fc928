//! Channel estimators: LS pass-through, linear filters and the MLP
//! learning module, behind one sum type, plus a JSON wire format for
//! trained estimators.

mod linear;
mod mlp;

pub use linear::{
    apply_linear, linear_mse_given_correlation, lmmse_mse_per_subcarrier, lmmse_mse_theoretical,
    lmmse_weights, robust_lmmse_weights, train_linear, LinearWeights,
};
pub use mlp::{train_mlp, MlpEstimator, MlpGradient, MlpHyper, MlpProvenance};

use crate::linalg::{CMat, CVec};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Any estimator the simulator can evaluate.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    /// Returns the LS estimates unchanged.
    LsIdentity,
    Linear(LinearWeights),
    Mlp(MlpEstimator),
}

impl Estimator {
    /// Input dimension, when the estimator fixes one.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            Estimator::LsIdentity => None,
            Estimator::Linear(w) => Some(w.dim()),
            Estimator::Mlp(m) => Some(m.dim()),
        }
    }
}

/// Applies an estimator to a vector of LS estimates. The output always has
/// the input's dimension.
pub fn apply_estimator(e: &Estimator, input: &CVec) -> Result<CVec> {
    match e {
        Estimator::LsIdentity => Ok(input.clone()),
        Estimator::Linear(w) => apply_linear(w, input),
        Estimator::Mlp(m) => m.apply(input),
    }
}

// --- JSON wire format ------------------------------------------------------
//
// {
//   "type": "ls-identity" | "linear" | "mlp",
//   "dimension": D | null,
//   "weights": linear -> [[re, im], ...] row-major;
//              mlp    -> {"w1": [...], "b1": [...], "w2": [...], "b2": [...]}
//              (real arrays, row-major); null for ls-identity,
//   "hyperparameters": training hyperparameters | null,
//   "seed": training seed | null
// }
//
// Floats are written by serde_json's shortest-round-trip formatter, so a
// parse of the document recovers every weight bit-exactly.

#[derive(Serialize, Deserialize)]
struct EstimatorDoc {
    #[serde(rename = "type")]
    kind: String,
    dimension: Option<usize>,
    weights: Option<serde_json::Value>,
    hyperparameters: Option<MlpHyper>,
    seed: Option<u64>,
}

fn complex_rows(m: &CMat) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    out
}

fn real_rows(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}

impl Estimator {
    pub fn to_json(&self) -> Result<String> {
        let doc = match self {
            Estimator::LsIdentity => EstimatorDoc {
                kind: "ls-identity".into(),
                dimension: None,
                weights: None,
                hyperparameters: None,
                seed: None,
            },
            Estimator::Linear(w) => EstimatorDoc {
                kind: "linear".into(),
                dimension: Some(w.dim()),
                weights: Some(serde_json::to_value(complex_rows(w.matrix()))?),
                hyperparameters: None,
                seed: None,
            },
            Estimator::Mlp(m) => {
                let weights = serde_json::json!({
                    "w1": real_rows(&m.w1),
                    "b1": m.b1.iter().copied().collect::<Vec<f64>>(),
                    "w2": real_rows(&m.w2),
                    "b2": m.b2.iter().copied().collect::<Vec<f64>>(),
                });
                EstimatorDoc {
                    kind: "mlp".into(),
                    dimension: Some(m.dim()),
                    weights: Some(weights),
                    hyperparameters: m.provenance.as_ref().map(|p| p.hyper.clone()),
                    seed: m.provenance.as_ref().map(|p| p.seed),
                }
            }
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Estimator> {
        let doc: EstimatorDoc = serde_json::from_str(text)?;
        match doc.kind.as_str() {
            "ls-identity" => Ok(Estimator::LsIdentity),
            "linear" => {
                let d = doc
                    .dimension
                    .ok_or_else(|| Error::InvalidConfig("linear estimator needs a dimension".into()))?;
                let cells: Vec<[f64; 2]> = serde_json::from_value(
                    doc.weights
                        .ok_or_else(|| Error::InvalidConfig("linear estimator needs weights".into()))?,
                )?;
                if cells.len() != d * d {
                    return Err(Error::DimensionMismatch {
                        expected: d * d,
                        got: cells.len(),
                    });
                }
                let m = CMat::from_fn(d, d, |i, j| {
                    let [re, im] = cells[i * d + j];
                    Complex64::new(re, im)
                });
                Ok(Estimator::Linear(LinearWeights::new(m)?))
            }
            "mlp" => {
                let d = doc
                    .dimension
                    .ok_or_else(|| Error::InvalidConfig("mlp estimator needs a dimension".into()))?;
                #[derive(Deserialize)]
                struct MlpWeights {
                    w1: Vec<f64>,
                    b1: Vec<f64>,
                    w2: Vec<f64>,
                    b2: Vec<f64>,
                }
                let w: MlpWeights = serde_json::from_value(
                    doc.weights
                        .ok_or_else(|| Error::InvalidConfig("mlp estimator needs weights".into()))?,
                )?;
                let (n_in, n_hid) = (2 * d, 4 * d);
                if w.w1.len() != n_hid * n_in || w.w2.len() != n_in * n_hid {
                    return Err(Error::DimensionMismatch {
                        expected: n_hid * n_in,
                        got: w.w1.len(),
                    });
                }
                let w1 = DMatrix::from_fn(n_hid, n_in, |i, j| w.w1[i * n_in + j]);
                let w2 = DMatrix::from_fn(n_in, n_hid, |i, j| w.w2[i * n_hid + j]);
                let mut net = MlpEstimator::from_parts(
                    w1,
                    DVector::from_vec(w.b1),
                    w2,
                    DVector::from_vec(w.b2),
                )?;
                if let (Some(hyper), Some(seed)) = (doc.hyperparameters, doc.seed) {
                    net.provenance = Some(MlpProvenance {
                        hyper,
                        seed,
                        epochs_run: 0,
                        initial_loss: f64::NAN,
                        final_loss: f64::NAN,
                    });
                }
                Ok(Estimator::Mlp(net))
            }
            other => Err(Error::InvalidConfig(format!("unknown estimator type {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{derive_stream, StreamDomain};
    use rand::Rng;

    fn random_cvec(d: usize, seed: u64) -> CVec {
        let mut rng = derive_stream(seed, StreamDomain::Model, 50);
        CVec::from_fn(d, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn ls_identity_passes_through() {
        let x = random_cvec(7, 1);
        let y = apply_estimator(&Estimator::LsIdentity, &x).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn linear_path_delegates_bit_for_bit() {
        let mut rng = derive_stream(2, StreamDomain::Model, 51);
        let m = CMat::from_fn(4, 4, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let w = LinearWeights::new(m).unwrap();
        let x = random_cvec(4, 3);
        let via_enum = apply_estimator(&Estimator::Linear(w.clone()), &x).unwrap();
        let direct = apply_linear(&w, &x).unwrap();
        assert_eq!(via_enum, direct);
    }

    #[test]
    fn apply_preserves_dimension() {
        let x = random_cvec(6, 4);
        for e in [Estimator::LsIdentity] {
            assert_eq!(apply_estimator(&e, &x).unwrap().len(), x.len());
        }
    }

    #[test]
    fn linear_json_round_trip_is_value_exact() {
        let mut rng = derive_stream(5, StreamDomain::Model, 52);
        let m = CMat::from_fn(3, 3, |_, _| {
            Complex64::new(rng.random::<f64>() / 3.0, -rng.random::<f64>() * 7.0)
        });
        let e = Estimator::Linear(LinearWeights::new(m).unwrap());
        let text = e.to_json().unwrap();
        let back = Estimator::from_json(&text).unwrap();
        assert_eq!(e, back);
        // and the document carries the declared fields
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["type"], "linear");
        assert_eq!(v["dimension"], 3);
    }

    #[test]
    fn mlp_json_round_trip_is_value_exact() {
        let d = 2;
        let mut rng = derive_stream(6, StreamDomain::Model, 53);
        let w1 = DMatrix::from_fn(4 * d, 2 * d, |_, _| rng.random_range(-1.0..1.0));
        let w2 = DMatrix::from_fn(2 * d, 4 * d, |_, _| rng.random_range(-1.0..1.0));
        let net = MlpEstimator::from_parts(
            w1,
            DVector::from_fn(4 * d, |i, _| i as f64 / 7.0),
            w2,
            DVector::from_fn(2 * d, |i, _| -(i as f64) / 11.0),
        )
        .unwrap();
        let e = Estimator::Mlp(net);
        let text = e.to_json().unwrap();
        let back = Estimator::from_json(&text).unwrap();
        match (&e, &back) {
            (Estimator::Mlp(a), Estimator::Mlp(b)) => {
                assert_eq!(a.w1, b.w1);
                assert_eq!(a.b1, b.b1);
                assert_eq!(a.w2, b.w2);
                assert_eq!(a.b2, b.b2);
            }
            _ => panic!("round trip changed the estimator type"),
        }
    }

    #[test]
    fn rejects_unknown_type_and_bad_shapes() {
        assert!(Estimator::from_json("{\"type\":\"cnn\",\"dimension\":null,\"weights\":null,\"hyperparameters\":null,\"seed\":null}").is_err());
        let bad = "{\"type\":\"linear\",\"dimension\":2,\"weights\":[[1.0,0.0]],\"hyperparameters\":null,\"seed\":null}";
        assert!(Estimator::from_json(bad).is_err());
    }
}
