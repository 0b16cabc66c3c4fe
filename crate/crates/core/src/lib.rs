//! Compressed-sensing reconstruction with approximate message passing and a
//! Gauss-Bernoulli prior whose support probabilities come from a binary
//! restricted Boltzmann machine.
//!
//! - [`amp`]: the AMP solver and the scalar Bernoulli-Gaussian denoiser.
//! - [`rbm`]: the RBM model, NMF/TAP factorizations, exact enumeration, CD-1.
//! - [`prior`]: the RBM support prior and the iid/empirical baselines.
//! - [`dataset`]: IDX images, binarization, prior fitting, synthetic signals.
//! - [`experiment`]: measurements, reconstruction drivers, metrics, sweeps.
//! - [`config`]: run configuration and the shipped presets.

pub mod amp;
pub mod config;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod math;
pub mod prior;
pub mod rbm;
pub mod rng;

pub use amp::{
    denoise, run_amp, AmpOptions, AmpOutcome, AmpState, GbPrior, MeasurementModel, Posterior, SupportPrior,
};
pub use error::{Error, Result};
pub use prior::{BaselinePrior, RbmSupportPrior};
pub use rbm::{BinaryRbm, Factorization, FpiOptions, MagnetizationState};
