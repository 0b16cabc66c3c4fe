//! Binary restricted Boltzmann machine with energy
//! `E(v, h) = -vbias·v - hbias·h - vᵀ W h`.
//!
//! Mean-field machinery (naive mean field and TAP) lives in [`meanfield`],
//! the brute-force reference in [`exact`], and CD-1 training in [`train`].

pub mod exact;
pub mod meanfield;
pub mod train;

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

pub use exact::{exact_enumeration, ExactMarginals, MAX_ENUMERATION_UNITS};
pub use meanfield::{
    fpi_step, free_energy, hidden_update, solve_fpi, visible_activation, visible_update, Factorization,
    FpiOptions, FpiOutcome, MagnetizationState,
};
pub use train::{cd1_epoch, init_rbm, reconstruction_error, train_rbm, train_rbm_with, Cd1Params, TrainSpec};

const MAGIC: &[u8; 4] = b"RBM1";

#[derive(Clone, Debug, PartialEq)]
pub struct BinaryRbm {
    vbias: Array1<f64>,
    hbias: Array1<f64>,
    /// `n_v × n_h` couplings.
    w: Array2<f64>,
    /// Elementwise square of `w`, used by the TAP terms.
    w_sq: Array2<f64>,
    /// Row-major `n_h × n_v` transposes of `w` and `w_sq` for the hidden update.
    w_t: Array2<f64>,
    w_sq_t: Array2<f64>,
}

impl BinaryRbm {
    pub fn new(vbias: Array1<f64>, hbias: Array1<f64>, w: Array2<f64>) -> Result<Self> {
        if vbias.is_empty() {
            return Err(Error::invalid("vbias", "need at least one visible unit"));
        }
        if hbias.is_empty() {
            return Err(Error::invalid("hbias", "need at least one hidden unit"));
        }
        Error::check_dim("W rows (visible units)", vbias.len(), w.nrows())?;
        Error::check_dim("W columns (hidden units)", hbias.len(), w.ncols())?;
        if vbias.iter().chain(hbias.iter()).chain(w.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "RBM parameters" });
        }
        let mut rbm = Self {
            vbias,
            hbias,
            w_sq: Array2::zeros((0, 0)),
            w_t: Array2::zeros((0, 0)),
            w_sq_t: Array2::zeros((0, 0)),
            w,
        };
        rbm.refresh_derived();
        Ok(rbm)
    }

    /// All-zero parameters.
    pub fn zeros(n_visible: usize, n_hidden: usize) -> Result<Self> {
        Self::new(
            Array1::zeros(n_visible),
            Array1::zeros(n_hidden),
            Array2::zeros((n_visible, n_hidden)),
        )
    }

    pub fn n_visible(&self) -> usize {
        self.vbias.len()
    }

    pub fn n_hidden(&self) -> usize {
        self.hbias.len()
    }

    pub fn vbias(&self) -> &Array1<f64> {
        &self.vbias
    }

    pub fn hbias(&self) -> &Array1<f64> {
        &self.hbias
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.w
    }

    pub fn weights_sq(&self) -> &Array2<f64> {
        &self.w_sq
    }

    pub fn into_parts(self) -> (Array1<f64>, Array1<f64>, Array2<f64>) {
        (self.vbias, self.hbias, self.w)
    }

    fn refresh_derived(&mut self) {
        self.w_sq = self.w.mapv(|x| x * x);
        self.w_t = self.w.t().as_standard_layout().into_owned();
        self.w_sq_t = self.w_sq.t().as_standard_layout().into_owned();
    }

    /// `RBM1` encoding: magic, little-endian `u32` n_v and n_h, then
    /// little-endian `f64` vbias, hbias and row-major W.
    pub fn to_bytes(&self) -> Vec<u8> {
        let (n_v, n_h) = (self.n_visible(), self.n_hidden());
        let mut out = Vec::with_capacity(12 + 8 * (n_v + n_h + n_v * n_h));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(n_v as u32).to_le_bytes());
        out.extend_from_slice(&(n_h as u32).to_le_bytes());
        for x in self.vbias.iter().chain(self.hbias.iter()).chain(self.w.iter()) {
            out.extend_from_slice(&x.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut rd = ByteReader { bytes, pos: 0 };
        let magic = rd.take(4)?;
        if magic != MAGIC {
            return Err(Error::NotRbmFile);
        }
        let n_v = rd.u32()? as usize;
        let n_h = rd.u32()? as usize;
        let vbias = Array1::from(rd.f64s(n_v)?);
        let hbias = Array1::from(rd.f64s(n_h)?);
        let count = n_v
            .checked_mul(n_h)
            .ok_or_else(|| Error::invalid("RBM1 header", "n_v * n_h overflows"))?;
        let w = Array2::from_shape_vec((n_v, n_h), rd.f64s(count)?)
            .expect("length checked by the reader");
        if rd.pos != bytes.len() {
            return Err(Error::TrailingBytes {
                offset: rd.pos,
                extra: bytes.len() - rd.pos,
            });
        }
        Self::new(vbias, hbias, w)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

struct ByteReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let remaining = self.bytes.len() - self.pos;
        if remaining < len {
            return Err(Error::Truncated {
                offset: self.bytes.len(),
                needed: len - remaining,
            });
        }
        let out = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64s(&mut self, count: usize) -> Result<Vec<f64>> {
        let len = count
            .checked_mul(8)
            .ok_or_else(|| Error::invalid("RBM1 header", "array length overflows"))?;
        let raw = self.take(len)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}
