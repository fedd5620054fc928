//! Channel-estimation laboratory for OFDM systems.
//!
//! The crate has two halves that check each other:
//!
//! * [`analysis`] evaluates a hypothesis-testing bound that ties the size of
//!   a training set to the scaled MSE difference between a learned linear
//!   estimator and the Wiener optimum, producing the alpha-vs-kappa curve
//!   and the sufficient sample size it implies.
//! * [`channel`], [`estimators`] and [`experiments`] implement a frequency-
//!   domain OFDM Monte Carlo simulator (LS, LMMSE, robust LMMSE, trained
//!   linear and MLP estimators) that validates the bound empirically.
//!
//! All randomness flows through seeded, explicitly derived streams
//! ([`rng`]), and Monte Carlo loops fan out over fixed chunk boundaries
//! ([`par`]), so every result is bit-reproducible regardless of worker
//! count. Parallel execution uses rayon behind the default `parallel`
//! feature; without it the same chunked loops run sequentially and produce
//! identical output.

pub mod analysis;
pub mod channel;
mod error;
pub mod estimators;
pub mod experiments;
pub mod linalg;
pub mod par;
pub mod plot;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
