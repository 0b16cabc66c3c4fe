//! CD-1 training on binary data.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::BinaryRbm;
use crate::error::{Error, Result};
use crate::math::sigmoid;

/// Standard deviation of the initial couplings.
pub const INIT_WEIGHT_STD: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cd1Params {
    pub lr: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
}

impl Cd1Params {
    fn validate(&self) -> Result<()> {
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid("lr", format!("{} must be non-negative", self.lr)));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::invalid("weight_decay", format!("{} must be non-negative", self.weight_decay)));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSpec {
    pub n_hidden: usize,
    pub epochs: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl TrainSpec {
    pub fn params(&self) -> Cd1Params {
        Cd1Params {
            lr: self.lr,
            weight_decay: self.weight_decay,
            batch_size: self.batch_size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_hidden == 0 {
            return Err(Error::invalid("n_hidden", "must be positive"));
        }
        self.params().validate()
    }
}

fn check_binary(data: ArrayView2<f64>) -> Result<()> {
    for ((row, col), &value) in data.indexed_iter() {
        if value != 0.0 && value != 1.0 {
            return Err(Error::NonBinary { row, col, value });
        }
    }
    Ok(())
}

/// Zero biases and `N(0, 0.01²)` couplings.
pub fn init_rbm<R: Rng + ?Sized>(n_visible: usize, n_hidden: usize, rng: &mut R) -> Result<BinaryRbm> {
    let normal = Normal::new(0.0, INIT_WEIGHT_STD).expect("valid std");
    let w = Array2::from_shape_fn((n_visible, n_hidden), |_| normal.sample(rng));
    BinaryRbm::new(Array1::zeros(n_visible), Array1::zeros(n_hidden), w)
}

/// One pass of CD-1 over shuffled minibatches of `data` (`samples × n_v`, binary).
pub fn cd1_epoch<R: Rng + ?Sized>(
    rbm: &mut BinaryRbm,
    data: ArrayView2<f64>,
    params: &Cd1Params,
    rng: &mut R,
) -> Result<()> {
    params.validate()?;
    Error::check_dim("training data columns", rbm.n_visible(), data.ncols())?;
    check_binary(data)?;

    let mut order: Vec<usize> = (0..data.nrows()).collect();
    order.shuffle(rng);
    let lr = params.lr;

    for chunk in order.chunks(params.batch_size) {
        let batch = chunk.len() as f64;
        let v0 = data.select(Axis(0), chunk);

        let mut p_h0 = v0.dot(&rbm.w);
        p_h0 += &rbm.hbias;
        p_h0.mapv_inplace(sigmoid);
        let h0 = p_h0.mapv(|p| if rng.random::<f64>() < p { 1.0 } else { 0.0 });

        let mut p_v1 = h0.dot(&rbm.w.t());
        p_v1 += &rbm.vbias;
        p_v1.mapv_inplace(sigmoid);

        let mut p_h1 = p_v1.dot(&rbm.w);
        p_h1 += &rbm.hbias;
        p_h1.mapv_inplace(sigmoid);

        let grad_w = (v0.t().dot(&p_h0) - p_v1.t().dot(&p_h1)) / batch;
        let grad_v = (&v0 - &p_v1).sum_axis(Axis(0)) / batch;
        let grad_h = (&p_h0 - &p_h1).sum_axis(Axis(0)) / batch;

        let decay = params.weight_decay;
        rbm.w.zip_mut_with(&grad_w, |w, &g| *w += lr * (g - decay * *w));
        rbm.vbias.scaled_add(lr, &grad_v);
        rbm.hbias.scaled_add(lr, &grad_h);
    }
    rbm.refresh_derived();
    if rbm.w.iter().chain(rbm.vbias.iter()).chain(rbm.hbias.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "RBM parameters after CD-1 epoch" });
    }
    Ok(())
}

/// Mean squared error of one deterministic up-down pass,
/// `sigm(vbias + W sigm(hbias + Wᵀ v))` against `v`, over the rows of `data`.
pub fn reconstruction_error(rbm: &BinaryRbm, data: ArrayView2<f64>) -> Result<f64> {
    Error::check_dim("data columns", rbm.n_visible(), data.ncols())?;
    if data.nrows() == 0 {
        return Err(Error::invalid("data", "no samples"));
    }
    let mut p_h = data.dot(&rbm.w);
    p_h += &rbm.hbias;
    p_h.mapv_inplace(sigmoid);
    let mut p_v = p_h.dot(&rbm.w.t());
    p_v += &rbm.vbias;
    p_v.mapv_inplace(sigmoid);
    Ok((&p_v - &data).mapv(|d| d * d).mean().expect("non-empty"))
}

pub fn train_rbm(spec: &TrainSpec, data: ArrayView2<f64>) -> Result<BinaryRbm> {
    train_rbm_with(spec, data, |_, _| {})
}

/// Like [`train_rbm`], calling `on_epoch(epoch, &model)` after every epoch
/// (1-based). The generator is `ChaCha8` seeded from `spec.seed`; the same
/// stream draws the initial couplings, the shuffles and the hidden samples.
pub fn train_rbm_with(
    spec: &TrainSpec,
    data: ArrayView2<f64>,
    mut on_epoch: impl FnMut(usize, &BinaryRbm),
) -> Result<BinaryRbm> {
    spec.validate()?;
    check_binary(data)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rbm = init_rbm(data.ncols(), spec.n_hidden, &mut rng)?;
    let params = spec.params();
    for epoch in 1..=spec.epochs {
        cd1_epoch(&mut rbm, data, &params, &mut rng)?;
        on_epoch(epoch, &rbm);
    }
    Ok(rbm)
}
