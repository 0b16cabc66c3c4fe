//! Support priors plugged into [`run_amp`](crate::amp::run_amp): the RBM
//! support prior and the two baselines (iid and empirical per-pixel).

use std::sync::Arc;

use ndarray::{Array1, ArrayView1, ArrayView2, Axis, Zip};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amp::SupportPrior;
use crate::error::{Error, Result};
use crate::math::{clamp_mean, logit, sigmoid};
use crate::rbm::{fpi_step, solve_fpi, BinaryRbm, FpiOptions, MagnetizationState};

/// Default AMP sweep at which the RBM magnetizations start to persist.
pub const DEFAULT_PERSISTENT_START: usize = 50;

/// `ρ_i = sigm(ln m_i - ln(1 - m_i) - ln g_i)`: strips the AMP evidence back
/// out of the visible magnetization. Means are clamped to `[ε, 1-ε]`.
pub fn rho_from_magnetization(m_v: ArrayView1<f64>, ln_g: ArrayView1<f64>) -> Result<Array1<f64>> {
    Error::check_dim("ln g", m_v.len(), ln_g.len())?;
    Ok(Zip::from(m_v)
        .and(ln_g)
        .map_collect(|&m, &g| sigmoid(logit(clamp_mean(m)) - g)))
}

/// How the visible magnetizations are reset before a converging FPI run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisibleInit {
    Zero,
    /// Bernoulli draw from `sigm(vbias)`.
    BiasSample,
}

/// Outcome flags of the prior over one reconstruction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PriorDiagnostics {
    /// Converging-phase FPI runs that hit `max_iter`.
    pub unconverged_fpi: usize,
    pub fpi_runs: usize,
    pub persistent_steps: usize,
}

/// RBM-driven support prior: the AMP evidence `ln g` enters the RBM as a
/// visible field, the RBM is factorized (NMF or TAP), and the per-coefficient
/// sparsities are read back out of the visible layer.
///
/// Before `persistent_start` each call resets the magnetizations and runs the
/// fixed-point iteration to convergence; from then on the magnetizations
/// persist across calls and receive a single step per call.
pub struct RbmSupportPrior {
    rbm: Arc<BinaryRbm>,
    mags: MagnetizationState,
    persistent_start: usize,
    fpi: FpiOptions,
    visible_init: VisibleInit,
    rng: Option<ChaCha8Rng>,
    diagnostics: PriorDiagnostics,
}

impl RbmSupportPrior {
    pub fn new(rbm: Arc<BinaryRbm>, persistent_start: usize, fpi: FpiOptions) -> Result<Self> {
        if persistent_start == 0 {
            return Err(Error::invalid("persistent_start", "must be at least 1"));
        }
        fpi.validate()?;
        let mags = MagnetizationState::zeros(&rbm);
        Ok(Self {
            rbm,
            mags,
            persistent_start,
            fpi,
            visible_init: VisibleInit::Zero,
            rng: None,
            diagnostics: PriorDiagnostics::default(),
        })
    }

    /// Resets visible means by sampling from the visible biases, using `rng`.
    pub fn with_bias_sampled_init(mut self, rng: ChaCha8Rng) -> Self {
        self.visible_init = VisibleInit::BiasSample;
        self.rng = Some(rng);
        self
    }

    pub fn magnetizations(&self) -> &MagnetizationState {
        &self.mags
    }

    pub fn diagnostics(&self) -> PriorDiagnostics {
        self.diagnostics
    }

    pub fn persistent_start(&self) -> usize {
        self.persistent_start
    }

    fn reset(&mut self) {
        self.mags.m_h.fill(0.0);
        match (self.visible_init, self.rng.as_mut()) {
            (VisibleInit::BiasSample, Some(rng)) => {
                for (m, &b) in self.mags.m_v.iter_mut().zip(self.rbm.vbias()) {
                    *m = if rng.random::<f64>() < sigmoid(b) { 1.0 } else { 0.0 };
                }
            }
            _ => self.mags.m_v.fill(0.0),
        }
    }

    /// Advances the magnetizations under field `ln_g` and returns the prior
    /// log-odds `logit(m_v) - ln g`, taken from the visible activation so
    /// that saturated means lose no information.
    fn advance(&mut self, ln_g: ArrayView1<f64>, amp_iter: usize) -> Result<Array1<f64>> {
        Error::check_dim("ln g (visible units)", self.rbm.n_visible(), ln_g.len())?;
        if amp_iter < self.persistent_start {
            self.reset();
            let init = self.mags.clone();
            let out = solve_fpi(&self.rbm, ln_g, &self.fpi, init)?;
            self.diagnostics.fpi_runs += 1;
            if !out.converged {
                self.diagnostics.unconverged_fpi += 1;
            }
            self.mags = out.state;
            Ok(out.activation)
        } else {
            let (next, activation) = fpi_step(&self.rbm, ln_g, &self.mags, self.fpi.method)?;
            self.diagnostics.persistent_steps += 1;
            self.mags = next;
            Ok(activation)
        }
    }

    /// Per-coefficient sparsities for the AMP sweep `amp_iter` (1-based).
    pub fn update_support(&mut self, ln_g: ArrayView1<f64>, amp_iter: usize) -> Result<Array1<f64>> {
        Ok(self.advance(ln_g, amp_iter)?.mapv_into(sigmoid))
    }
}

impl SupportPrior for RbmSupportPrior {
    fn initial_log_odds(&mut self, n: usize) -> Result<Array1<f64>> {
        Error::check_dim("signal length (visible units)", self.rbm.n_visible(), n)?;
        let field = Array1::zeros(n);
        let init = MagnetizationState::zeros(&self.rbm);
        Ok(solve_fpi(&self.rbm, field.view(), &self.fpi, init)?.activation)
    }

    fn log_odds(&mut self, ln_g: ArrayView1<f64>, iter: usize) -> Result<Array1<f64>> {
        self.advance(ln_g, iter)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    IidGb,
    EmpiricalGb,
}

/// Support prior that ignores the AMP evidence.
#[derive(Clone, Debug, PartialEq)]
pub struct BaselinePrior {
    kind: BaselineKind,
    rho: Array1<f64>,
    log_odds: Array1<f64>,
}

impl BaselinePrior {
    /// Same sparsity `rho` for all `n` coefficients.
    pub fn iid(n: usize, rho: f64) -> Result<Self> {
        Self::build(BaselineKind::IidGb, Array1::from_elem(n, rho))
    }

    /// Per-coefficient sparsities.
    pub fn empirical(rho: Array1<f64>) -> Result<Self> {
        Self::build(BaselineKind::EmpiricalGb, rho)
    }

    fn build(kind: BaselineKind, rho: Array1<f64>) -> Result<Self> {
        if let Some(bad) = rho.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::invalid("rho", format!("{bad} outside [0, 1]")));
        }
        let log_odds = rho.mapv(logit);
        Ok(Self { kind, rho, log_odds })
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    pub fn rho(&self) -> &Array1<f64> {
        &self.rho
    }
}

/// The baseline's ρ vector for a signal of length `n`.
pub fn baseline_rho(prior: &BaselinePrior, n: usize) -> Result<Array1<f64>> {
    Error::check_dim("baseline rho", n, prior.rho.len())?;
    Ok(prior.rho.clone())
}

impl SupportPrior for BaselinePrior {
    fn initial_log_odds(&mut self, n: usize) -> Result<Array1<f64>> {
        Error::check_dim("baseline rho", n, self.log_odds.len())?;
        Ok(self.log_odds.clone())
    }

    fn log_odds(&mut self, ln_g: ArrayView1<f64>, _iter: usize) -> Result<Array1<f64>> {
        Error::check_dim("baseline rho", ln_g.len(), self.log_odds.len())?;
        Ok(self.log_odds.clone())
    }
}

/// Per-unit on-frequencies (column means) of a binary sample matrix.
pub fn empirical_rho(binary: ArrayView2<f64>) -> Result<Array1<f64>> {
    if binary.nrows() == 0 {
        return Err(Error::invalid("training set", "no samples"));
    }
    Ok(binary.mean_axis(Axis(0)).expect("non-empty"))
}
