//! Naive mean-field and TAP factorizations of a binary RBM with an optional
//! external field on the visible layer.

use ndarray::{Array1, ArrayView1, Zip};
use serde::{Deserialize, Serialize};

use super::BinaryRbm;
use crate::error::{Error, Result};
use crate::math::{clamp_mean, sigmoid, xlogx, MEAN_EPS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Factorization {
    /// First-order (naive) mean field.
    Nmf,
    /// Second-order Plefka expansion with the Onsager reaction term.
    Tap,
}

/// Visible and hidden means of a factorized RBM.
#[derive(Clone, Debug, PartialEq)]
pub struct MagnetizationState {
    pub m_v: Array1<f64>,
    pub m_h: Array1<f64>,
}

impl MagnetizationState {
    pub fn zeros(rbm: &BinaryRbm) -> Self {
        Self {
            m_v: Array1::zeros(rbm.n_visible()),
            m_h: Array1::zeros(rbm.n_hidden()),
        }
    }

    pub fn v_v(&self) -> Array1<f64> {
        self.m_v.mapv(|m| m * (1.0 - m))
    }

    pub fn v_h(&self) -> Array1<f64> {
        self.m_h.mapv(|m| m * (1.0 - m))
    }

    fn check(&self, rbm: &BinaryRbm) -> Result<()> {
        Error::check_dim("visible means", rbm.n_visible(), self.m_v.len())?;
        Error::check_dim("hidden means", rbm.n_hidden(), self.m_h.len())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FpiOptions {
    pub method: Factorization,
    /// Threshold on the largest change of a visible mean per sweep.
    pub tol: f64,
    pub max_iter: usize,
    /// Fraction of each freshly computed layer kept per sweep.
    pub damping: f64,
}

impl Default for FpiOptions {
    fn default() -> Self {
        Self {
            method: Factorization::Tap,
            tol: 1e-6,
            max_iter: 200,
            damping: 0.5,
        }
    }
}

impl FpiOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid("fpi tol", format!("{} must be positive", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("fpi max_iter", "must be positive"));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::invalid("fpi damping", format!("{} outside (0, 1]", self.damping)));
        }
        Ok(())
    }
}

fn variances(m: ArrayView1<f64>) -> Array1<f64> {
    m.mapv(|m| m * (1.0 - m))
}

/// Hidden-layer fixed-point map. `m_h_prev` feeds the TAP reaction term only.
pub fn hidden_update(
    rbm: &BinaryRbm,
    m_v: ArrayView1<f64>,
    method: Factorization,
    m_h_prev: ArrayView1<f64>,
) -> Result<Array1<f64>> {
    Error::check_dim("visible means", rbm.n_visible(), m_v.len())?;
    Error::check_dim("previous hidden means", rbm.n_hidden(), m_h_prev.len())?;
    let mut act = rbm.w_t.dot(&m_v) + &rbm.hbias;
    if method == Factorization::Tap {
        let reaction = rbm.w_sq_t.dot(&variances(m_v));
        Zip::from(&mut act)
            .and(&reaction)
            .and(m_h_prev)
            .for_each(|a, &q, &m| *a += (0.5 - m) * q);
    }
    Ok(act.mapv_into(|a| clamp_mean(sigmoid(a))))
}

/// Visible pre-activation without the external field:
/// `vbias + W m_h` plus, for TAP, `(1/2 - m_v_prev) ∘ W² v_h`.
pub fn visible_activation(
    rbm: &BinaryRbm,
    m_h: ArrayView1<f64>,
    method: Factorization,
    m_v_prev: ArrayView1<f64>,
) -> Result<Array1<f64>> {
    Error::check_dim("hidden means", rbm.n_hidden(), m_h.len())?;
    Error::check_dim("previous visible means", rbm.n_visible(), m_v_prev.len())?;
    let mut act = rbm.w.dot(&m_h) + &rbm.vbias;
    if method == Factorization::Tap {
        let reaction = rbm.w_sq.dot(&variances(m_h));
        Zip::from(&mut act)
            .and(&reaction)
            .and(m_v_prev)
            .for_each(|a, &q, &m| *a += (0.5 - m) * q);
    }
    Ok(act)
}

/// Visible-layer fixed-point map with external field (`ln g_i` from AMP, or
/// zeros for the bare RBM).
pub fn visible_update(
    rbm: &BinaryRbm,
    m_h: ArrayView1<f64>,
    field: ArrayView1<f64>,
    method: Factorization,
    m_v_prev: ArrayView1<f64>,
) -> Result<Array1<f64>> {
    Error::check_dim("visible field", rbm.n_visible(), field.len())?;
    let act = visible_activation(rbm, m_h, method, m_v_prev)?;
    Ok(activate(&act, field))
}

fn activate(act: &Array1<f64>, field: ArrayView1<f64>) -> Array1<f64> {
    Zip::from(act)
        .and(field)
        .map_collect(|&a, &f| clamp_mean(sigmoid(a + f)))
}

/// Mean-field free energy with an external visible field. TAP subtracts
/// `½ Σ W²_ij v_v,i v_h,j` from the naive expression. Means are clamped to
/// `[ε, 1-ε]` before evaluation.
pub fn free_energy(
    rbm: &BinaryRbm,
    m_v: ArrayView1<f64>,
    m_h: ArrayView1<f64>,
    field: ArrayView1<f64>,
    method: Factorization,
) -> Result<f64> {
    Error::check_dim("visible means", rbm.n_visible(), m_v.len())?;
    Error::check_dim("hidden means", rbm.n_hidden(), m_h.len())?;
    Error::check_dim("visible field", rbm.n_visible(), field.len())?;
    let prep = |m: ArrayView1<f64>| -> Result<Array1<f64>> {
        if let Some(&bad) = m.iter().find(|m| !(-MEAN_EPS..=1.0 + MEAN_EPS).contains(*m)) {
            return Err(Error::invalid("magnetization", format!("{bad} outside (0, 1)")));
        }
        Ok(m.mapv(clamp_mean))
    };
    let m_v = prep(m_v)?;
    let m_h = prep(m_h)?;

    let entropy = |m: &Array1<f64>| m.iter().map(|&x| xlogx(x) + xlogx(1.0 - x)).sum::<f64>();
    let mut f = -rbm.vbias.dot(&m_v) - rbm.hbias.dot(&m_h) - m_v.dot(&rbm.w.dot(&m_h)) - field.dot(&m_v)
        + entropy(&m_v)
        + entropy(&m_h);
    if method == Factorization::Tap {
        f -= 0.5 * variances(m_v.view()).dot(&rbm.w_sq.dot(&variances(m_h.view())));
    }
    Ok(f)
}

#[derive(Clone, Debug)]
pub struct FpiOutcome {
    pub state: MagnetizationState,
    pub converged: bool,
    pub iters: usize,
    /// Field-free visible activation from the last undamped visible update.
    pub activation: Array1<f64>,
}

/// Damped fixed-point iteration: hidden update, then visible update, each
/// mixed with the previous iterate, until the largest visible change drops
/// below `opts.tol`. Oscillation shows up as `converged == false`.
pub fn solve_fpi(
    rbm: &BinaryRbm,
    field: ArrayView1<f64>,
    opts: &FpiOptions,
    init: MagnetizationState,
) -> Result<FpiOutcome> {
    opts.validate()?;
    init.check(rbm)?;
    Error::check_dim("visible field", rbm.n_visible(), field.len())?;
    let d = opts.damping;
    let mix = |old: &mut Array1<f64>, new: &Array1<f64>| {
        if d == 1.0 {
            old.assign(new);
        } else {
            Zip::from(old).and(new).for_each(|o, &n| *o = (1.0 - d) * *o + d * n);
        }
    };

    let mut state = init;
    let mut activation = Array1::zeros(rbm.n_visible());
    let mut converged = false;
    let mut iters = 0;
    while iters < opts.max_iter {
        let m_h = hidden_update(rbm, state.m_v.view(), opts.method, state.m_h.view())?;
        mix(&mut state.m_h, &m_h);
        activation = visible_activation(rbm, state.m_h.view(), opts.method, state.m_v.view())?;
        let m_v = activate(&activation, field);
        let prev = state.m_v.clone();
        mix(&mut state.m_v, &m_v);
        iters += 1;
        let change = Zip::from(&state.m_v)
            .and(&prev)
            .fold(0.0f64, |acc, &a, &b| acc.max((a - b).abs()));
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    Ok(FpiOutcome {
        state,
        converged,
        iters,
        activation,
    })
}

/// Exactly one undamped hidden update followed by one visible update.
/// Returns the new state and the field-free visible activation.
pub fn fpi_step(
    rbm: &BinaryRbm,
    field: ArrayView1<f64>,
    state: &MagnetizationState,
    method: Factorization,
) -> Result<(MagnetizationState, Array1<f64>)> {
    state.check(rbm)?;
    Error::check_dim("visible field", rbm.n_visible(), field.len())?;
    let m_h = hidden_update(rbm, state.m_v.view(), method, state.m_h.view())?;
    let act = visible_activation(rbm, m_h.view(), method, state.m_v.view())?;
    let m_v = activate(&act, field);
    Ok((MagnetizationState { m_v, m_h }, act))
}
