//! Shallow MLP learning module: layers `2D -> 4D -> 2D` over the stacked
//! real/imaginary parts, logistic-sigmoid hidden activation, identity
//! input/output activations, trained by mini-batch Adam on mean squared
//! error. Backpropagation is written out here and checked against central
//! finite differences in the tests.

use crate::experiments::TrainingSet;
use crate::linalg::CVec;
use crate::par;
use crate::rng::{derive_stream, StreamDomain};
use crate::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Fixed number of gradient sub-chunks per mini-batch, so the reduction
/// order (and hence the result) does not depend on the worker count.
const GRAD_CHUNKS: usize = 8;

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpHyper {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Early stop when the best epoch loss improves by less than
    /// `min_improvement` over this many epochs.
    pub patience: usize,
    pub min_improvement: f64,
}

impl Default for MlpHyper {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            batch_size: 128,
            max_epochs: 2000,
            patience: 50,
            min_improvement: 1e-6,
        }
    }
}

/// Where a trained network came from, for report metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpProvenance {
    pub hyper: MlpHyper,
    pub seed: u64,
    pub epochs_run: usize,
    pub initial_loss: f64,
    pub final_loss: f64,
}

/// The network. `dim` is the complex input dimension `D`; the real layers
/// are `2D -> 4D -> 2D`.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpEstimator {
    dim: usize,
    pub w1: DMatrix<f64>,
    pub b1: DVector<f64>,
    pub w2: DMatrix<f64>,
    pub b2: DVector<f64>,
    pub provenance: Option<MlpProvenance>,
}

/// Gradient of the batch loss with respect to every parameter.
#[derive(Debug, Clone)]
pub struct MlpGradient {
    pub w1: DMatrix<f64>,
    pub b1: DVector<f64>,
    pub w2: DMatrix<f64>,
    pub b2: DVector<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl MlpEstimator {
    /// Builds a network from explicit parameters, enforcing the
    /// `2D - 4D - 2D` shape.
    pub fn from_parts(
        w1: DMatrix<f64>,
        b1: DVector<f64>,
        w2: DMatrix<f64>,
        b2: DVector<f64>,
    ) -> Result<Self> {
        let input = w1.ncols();
        let hidden = w1.nrows();
        if input == 0 || input % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "input width {input} must be 2D for some D >= 1"
            )));
        }
        if hidden != 2 * input || w2.nrows() != input || w2.ncols() != hidden {
            return Err(Error::InvalidConfig(format!(
                "layer sizes must be {input}-{}-{input}, got {input}-{hidden}-{} with w2 {}x{}",
                2 * input,
                w2.nrows(),
                w2.nrows(),
                w2.ncols()
            )));
        }
        if b1.len() != hidden || b2.len() != input {
            return Err(Error::InvalidConfig("bias lengths must match layers".into()));
        }
        let finite = w1.iter().chain(w2.iter()).all(|v| v.is_finite())
            && b1.iter().chain(b2.iter()).all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("mlp parameters"));
        }
        Ok(Self {
            dim: input / 2,
            w1,
            b1,
            w2,
            b2,
            provenance: None,
        })
    }

    /// Complex input dimension D.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Forward pass on one real input vector of length 2D.
    pub fn forward_real(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut z1 = &self.w1 * x;
        z1 += &self.b1;
        let a1 = z1.map(sigmoid);
        let mut y = &self.w2 * a1;
        y += &self.b2;
        y
    }

    /// Packs `[Re; Im]`, runs the network, unpacks to complex.
    pub fn apply(&self, input: &CVec) -> Result<CVec> {
        let d = self.dim;
        if input.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: input.len(),
            });
        }
        let x = DVector::from_fn(2 * d, |i, _| {
            if i < d {
                input[i].re
            } else {
                input[i - d].im
            }
        });
        let y = self.forward_real(&x);
        Ok(CVec::from_fn(d, |i, _| Complex64::new(y[i], y[i + d])))
    }

    /// Mean over columns of the squared Euclidean error of the 2D outputs.
    pub fn batch_loss(&self, inputs: &DMatrix<f64>, targets: &DMatrix<f64>) -> f64 {
        let (_, _, e) = self.forward_batch(inputs, targets);
        e.norm_squared() / inputs.ncols() as f64
    }

    fn forward_batch(
        &self,
        inputs: &DMatrix<f64>,
        targets: &DMatrix<f64>,
    ) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
        let mut z1 = &self.w1 * inputs;
        z1.column_iter_mut().for_each(|mut c| c += &self.b1);
        let a1 = z1.map(sigmoid);
        let mut y = &self.w2 * &a1;
        y.column_iter_mut().for_each(|mut c| c += &self.b2);
        let e = y - targets;
        (z1, a1, e)
    }

    /// Batch loss and its gradient. The batch is split into fixed chunks
    /// mapped in parallel and combined in chunk order.
    pub fn batch_gradient(
        &self,
        inputs: &DMatrix<f64>,
        targets: &DMatrix<f64>,
    ) -> (f64, MlpGradient) {
        let b = inputs.ncols();
        debug_assert_eq!(b, targets.ncols());
        let chunk = b.div_ceil(GRAD_CHUNKS).max(1);
        let parts = par::map_chunks(b, chunk, |_, range| {
            let xs = inputs.columns(range.start, range.len());
            let ts = targets.columns(range.start, range.len());
            let mut z1 = &self.w1 * xs;
            z1.column_iter_mut().for_each(|mut c| c += &self.b1);
            let a1 = z1.map(sigmoid);
            let mut y = &self.w2 * &a1;
            y.column_iter_mut().for_each(|mut c| c += &self.b2);
            let e = y - ts;
            let loss_sum = e.norm_squared();
            let ones = DVector::from_element(range.len(), 1.0);
            let gw2 = &e * a1.transpose();
            let gb2 = &e * &ones;
            let h = self.w2.transpose() * &e;
            let d1 = h.zip_map(&a1, |hv, av| hv * av * (1.0 - av));
            let gw1 = &d1 * xs.transpose();
            let gb1 = &d1 * &ones;
            (loss_sum, gw1, gb1, gw2, gb2)
        });

        let scale = 2.0 / b as f64;
        let mut loss = 0.0;
        let mut grad = MlpGradient {
            w1: DMatrix::zeros(self.w1.nrows(), self.w1.ncols()),
            b1: DVector::zeros(self.b1.len()),
            w2: DMatrix::zeros(self.w2.nrows(), self.w2.ncols()),
            b2: DVector::zeros(self.b2.len()),
        };
        for (loss_sum, gw1, gb1, gw2, gb2) in parts {
            loss += loss_sum;
            grad.w1 += gw1;
            grad.b1 += gb1;
            grad.w2 += gw2;
            grad.b2 += gb2;
        }
        grad.w1 *= scale;
        grad.b1 *= scale;
        grad.w2 *= scale;
        grad.b2 *= scale;
        (loss / b as f64, grad)
    }
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, hyper: &MlpHyper, params: &mut [&mut [f64]], grads: &[&[f64]]) {
        self.t += 1;
        let bc1 = 1.0 - hyper.beta1.powi(self.t as i32);
        let bc2 = 1.0 - hyper.beta2.powi(self.t as i32);
        let mut offset = 0;
        for (p, g) in params.iter_mut().zip(grads) {
            for (i, (pv, &gv)) in p.iter_mut().zip(g.iter()).enumerate() {
                let k = offset + i;
                self.m[k] = hyper.beta1 * self.m[k] + (1.0 - hyper.beta1) * gv;
                self.v[k] = hyper.beta2 * self.v[k] + (1.0 - hyper.beta2) * gv * gv;
                let mhat = self.m[k] / bc1;
                let vhat = self.v[k] / bc2;
                *pv -= hyper.learning_rate * mhat / (vhat.sqrt() + hyper.adam_eps);
            }
            offset += p.len();
        }
    }
}

/// Stacks the training set as real matrices `[Re; Im]`, 2D x M.
pub(crate) fn stack_real(ts: &TrainingSet) -> (DMatrix<f64>, DMatrix<f64>) {
    let d = ts.dim();
    let m = ts.len();
    let pack = |src: &crate::linalg::CMat| {
        DMatrix::from_fn(2 * d, m, |i, j| {
            if i < d {
                src[(i, j)].re
            } else {
                src[(i - d, j)].im
            }
        })
    };
    (pack(ts.inputs()), pack(ts.labels()))
}

/// Trains the MLP with mini-batch Adam on the mean squared error of the 2D
/// real outputs. Deterministic given `(training set, hyper, seed)` and
/// independent of worker count.
pub fn train_mlp(ts: &TrainingSet, hyper: &MlpHyper, seed: u64) -> Result<MlpEstimator> {
    let d = ts.dim();
    let m = ts.len();
    let (x, t) = stack_real(ts);
    let (n_in, n_hid) = (2 * d, 4 * d);

    let mut rng = derive_stream(seed, StreamDomain::Model, 0);
    let glorot = |rng: &mut rand_chacha::ChaCha12Rng, rows: usize, cols: usize| {
        let limit = (6.0 / (rows + cols) as f64).sqrt();
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-limit..limit))
    };
    let mut net = MlpEstimator {
        dim: d,
        w1: glorot(&mut rng, n_hid, n_in),
        b1: DVector::zeros(n_hid),
        w2: glorot(&mut rng, n_in, n_hid),
        b2: DVector::zeros(n_in),
        provenance: None,
    };

    let n_params = net.w1.len() + net.b1.len() + net.w2.len() + net.b2.len();
    let mut adam = Adam::new(n_params);
    let batch = hyper.batch_size.min(m).max(1);
    let mut perm: Vec<usize> = (0..m).collect();
    let mut xb = DMatrix::zeros(n_in, batch);
    let mut tb = DMatrix::zeros(n_in, batch);

    let mut epoch_losses: Vec<f64> = Vec::with_capacity(hyper.max_epochs);
    let mut best_by_epoch: Vec<f64> = Vec::with_capacity(hyper.max_epochs);

    for _epoch in 0..hyper.max_epochs {
        // Fisher-Yates shuffle from the model stream.
        for i in (1..m).rev() {
            let j = rng.random_range(0..=i);
            perm.swap(i, j);
        }
        let mut loss_sum = 0.0;
        let mut start = 0;
        while start < m {
            let len = batch.min(m - start);
            for (col, &src) in perm[start..start + len].iter().enumerate() {
                xb.set_column(col, &x.column(src));
                tb.set_column(col, &t.column(src));
            }
            let (loss, grad) = if len == batch {
                net.batch_gradient(&xb, &tb)
            } else {
                let xv = xb.columns(0, len).into_owned();
                let tv = tb.columns(0, len).into_owned();
                net.batch_gradient(&xv, &tv)
            };
            if !loss.is_finite() {
                return Err(Error::NonFinite("mlp training loss diverged"));
            }
            loss_sum += loss * len as f64;
            adam.step(
                hyper,
                &mut [
                    net.w1.as_mut_slice(),
                    net.b1.as_mut_slice(),
                    net.w2.as_mut_slice(),
                    net.b2.as_mut_slice(),
                ],
                &[
                    grad.w1.as_slice(),
                    grad.b1.as_slice(),
                    grad.w2.as_slice(),
                    grad.b2.as_slice(),
                ],
            );
            start += len;
        }
        let epoch_loss = loss_sum / m as f64;
        if !epoch_loss.is_finite() {
            return Err(Error::NonFinite("mlp training loss diverged"));
        }
        let best = best_by_epoch
            .last()
            .map_or(epoch_loss, |&b: &f64| b.min(epoch_loss));
        epoch_losses.push(epoch_loss);
        best_by_epoch.push(best);

        let e = epoch_losses.len() - 1;
        if e >= hyper.patience {
            let improvement = best_by_epoch[e - hyper.patience] - best_by_epoch[e];
            if improvement < hyper.min_improvement {
                break;
            }
        }
    }

    net.provenance = Some(MlpProvenance {
        hyper: hyper.clone(),
        seed,
        epochs_run: epoch_losses.len(),
        initial_loss: epoch_losses.first().copied().unwrap_or(f64::NAN),
        final_loss: epoch_losses.last().copied().unwrap_or(f64::NAN),
    });
    Ok(net)
}
