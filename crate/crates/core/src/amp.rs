//! Approximate message passing for `y = F x + w`, `w ~ N(0, Δ)`, under a
//! Gauss-Bernoulli prior with per-coefficient support probabilities.
//!
//! The solver is split into two halves so a structured support prior can sit
//! between them, as the RBM prior does:
//!
//! 1. [`AmpState::update_messages`] refreshes `V, ω` (with the Onsager
//!    correction), the cavity means/variances `R, S`, and the support evidence
//!    `ln g_i` of every coefficient.
//! 2. [`AmpState::apply_denoiser`] runs the scalar Bernoulli-Gaussian
//!    denoiser with the prior log-odds supplied by the caller.
//!
//! [`run_amp`] drives both halves with a [`SupportPrior`] callback in between.

use ndarray::{Array1, Array2, ArrayView1, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{logit, sigmoid};

/// Linear AWGN channel: sensing matrix, observations and noise variance.
#[derive(Clone, Debug)]
pub struct MeasurementModel {
    f: Array2<f64>,
    f_sq: Array2<f64>,
    /// Row-major transposes of `f` and `f_sq`, so both directions of the
    /// matrix-vector products run over contiguous rows.
    f_t: Array2<f64>,
    f_sq_t: Array2<f64>,
    y: Array1<f64>,
    delta: f64,
}

impl MeasurementModel {
    pub fn new(f: Array2<f64>, y: Array1<f64>, delta: f64) -> Result<Self> {
        let (m, n) = f.dim();
        if m == 0 {
            return Err(Error::invalid("F", "must have at least one row"));
        }
        if n == 0 {
            return Err(Error::invalid("F", "must have at least one column"));
        }
        Error::check_dim("observation vector y", m, y.len())?;
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::invalid("delta", format!("{delta} is not a finite non-negative variance")));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "sensing matrix F" });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "observations y" });
        }
        let f_sq = f.mapv(|v| v * v);
        let f_t = f.t().as_standard_layout().into_owned();
        let f_sq_t = f_sq.t().as_standard_layout().into_owned();
        Ok(Self { f, f_sq, f_t, f_sq_t, y, delta })
    }

    pub fn f(&self) -> &Array2<f64> {
        &self.f
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of measurements.
    pub fn m(&self) -> usize {
        self.f.nrows()
    }

    /// Number of unknowns.
    pub fn n(&self) -> usize {
        self.f.ncols()
    }
}

/// Per-coefficient Gauss-Bernoulli prior `(1-ρ_i) δ(x) + ρ_i N(x; μ, σ²)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GbPrior {
    rho: Array1<f64>,
    mu: f64,
    sigma2: f64,
}

impl GbPrior {
    pub fn new(rho: Array1<f64>, mu: f64, sigma2: f64) -> Result<Self> {
        if let Some(bad) = rho.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::invalid("rho", format!("{bad} outside [0, 1]")));
        }
        check_slab(mu, sigma2)?;
        Ok(Self { rho, mu, sigma2 })
    }

    pub fn iid(n: usize, rho: f64, mu: f64, sigma2: f64) -> Result<Self> {
        Self::new(Array1::from_elem(n, rho), mu, sigma2)
    }

    pub fn rho(&self) -> &Array1<f64> {
        &self.rho
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }
}

fn check_slab(mu: f64, sigma2: f64) -> Result<()> {
    if !mu.is_finite() {
        return Err(Error::NonFinite { what: "prior mean mu" });
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::invalid("sigma2", format!("{sigma2} is not a positive variance")));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmpOptions {
    pub max_iter: usize,
    /// Threshold on the root-mean-square change of `a` per sweep.
    pub tol: f64,
    /// Fraction of the freshly computed `(a, c)` kept each sweep.
    pub damping: f64,
}

impl Default for AmpOptions {
    fn default() -> Self {
        Self {
            max_iter: 300,
            tol: 1e-8,
            damping: 0.5,
        }
    }
}

impl AmpOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be positive"));
        }
        if !(self.tol > 0.0) {
            return Err(Error::invalid("tol", format!("{} must be positive", self.tol)));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::invalid("damping", format!("{} outside (0, 1]", self.damping)));
        }
        Ok(())
    }
}

/// Scalar posterior summary returned by the denoiser.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Posterior {
    pub mean: f64,
    pub var: f64,
    /// `ln Z_on - ln Z_off`, independent of ρ.
    pub ln_g: f64,
    /// Posterior probability that the coefficient is non-zero.
    pub pi: f64,
}

/// Support log-likelihood ratio `ln N(R; μ, σ²+S) - ln N(0; R, S)`.
#[inline]
pub fn support_evidence(r: f64, s: f64, mu: f64, sigma2: f64) -> f64 {
    let t = s + sigma2;
    let d = r - mu;
    0.5 * ((s / t).ln() + r * r / s - d * d / t)
}

/// Bernoulli-Gaussian denoiser: posterior of `x` under
/// `[(1-ρ) δ(x) + ρ N(x; μ, σ²)] · N(x; R, S)`.
pub fn denoise(r: f64, s: f64, rho: f64, mu: f64, sigma2: f64) -> Result<Posterior> {
    if !r.is_finite() {
        return Err(Error::NonFinite { what: "cavity mean R" });
    }
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::invalid("S", format!("{s} is not a positive variance")));
    }
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::invalid("rho", format!("{rho} outside [0, 1]")));
    }
    check_slab(mu, sigma2)?;
    Ok(denoise_log_odds(r, s, logit(rho), mu, sigma2))
}

/// [`denoise`] with the prior given as log-odds `ln ρ - ln(1-ρ)`; `±inf` are
/// allowed and pin the support posterior to 1 or 0. Inputs are not validated.
pub fn denoise_log_odds(r: f64, s: f64, log_odds: f64, mu: f64, sigma2: f64) -> Posterior {
    let ln_g = support_evidence(r, s, mu, sigma2);
    let x = if log_odds == f64::NEG_INFINITY || log_odds == f64::INFINITY {
        log_odds
    } else {
        log_odds + ln_g
    };
    let pi = sigmoid(x);
    let off = sigmoid(-x);

    let t = s + sigma2;
    let slab_mean = (r * sigma2 + mu * s) / t;
    let slab_var = s * sigma2 / t;
    let mean = pi * slab_mean;
    // pi (s̄ + m̄²) - (pi m̄)², arranged so it cannot go negative.
    let var = pi * slab_var + pi * off * slab_mean * slab_mean;
    Posterior {
        mean,
        var,
        ln_g,
        pi,
    }
}

/// Iterates of the AMP fixed-point iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct AmpState {
    /// Posterior means.
    pub a: Array1<f64>,
    /// Posterior variances.
    pub c: Array1<f64>,
    pub v: Array1<f64>,
    pub omega: Array1<f64>,
    /// Cavity means.
    pub r: Array1<f64>,
    /// Cavity variances.
    pub s: Array1<f64>,
    pub ln_g: Array1<f64>,
    /// Posterior support probabilities.
    pub pi: Array1<f64>,
    pub iter: usize,
}

impl AmpState {
    /// Starts from the prior mean and variance. The Onsager term is dropped on
    /// the first sweep.
    pub fn init(model: &MeasurementModel, prior: &GbPrior) -> Result<Self> {
        let n = model.n();
        Error::check_dim("prior rho (N)", n, prior.rho.len())?;
        let (mu, sigma2) = (prior.mu, prior.sigma2);
        let a = prior.rho.mapv(|rho| rho * mu);
        let c = prior
            .rho
            .mapv(|rho| (rho * sigma2 + rho * (1.0 - rho) * mu * mu).max(0.0));
        let omega = model.f.dot(&a);
        let v = model.f_sq.dot(&c);
        Ok(Self {
            a,
            c,
            v,
            omega,
            r: Array1::zeros(n),
            s: Array1::zeros(n),
            ln_g: Array1::zeros(n),
            pi: prior.rho.clone(),
            iter: 0,
        })
    }

    fn check_dims(&self, model: &MeasurementModel) -> Result<()> {
        Error::check_dim("state a (N)", model.n(), self.a.len())?;
        Error::check_dim("state c (N)", model.n(), self.c.len())?;
        Error::check_dim("state V (M)", model.m(), self.v.len())?;
        Error::check_dim("state omega (M)", model.m(), self.omega.len())
    }

    /// Refreshes `V, ω, S, R` and the support evidence `ln g`.
    pub fn update_messages(&mut self, model: &MeasurementModel, mu: f64, sigma2: f64) -> Result<()> {
        self.check_dims(model)?;
        let delta = model.delta;
        let v_new = model.f_sq.dot(&self.c);
        let mut omega = model.f.dot(&self.a);
        if self.iter > 0 {
            Zip::from(&mut omega)
                .and(&v_new)
                .and(&model.y)
                .and(&self.omega)
                .and(&self.v)
                .for_each(|w, &v, &y, &w_prev, &v_prev| {
                    *w -= v * (y - w_prev) / (delta + v_prev);
                });
        }
        let inv_denom = v_new.mapv(|v| 1.0 / (delta + v));
        let scaled_resid = (&model.y - &omega) * &inv_denom;
        let s = model.f_sq_t.dot(&inv_denom).mapv(|p| 1.0 / p);
        let r = &self.a + &(&s * &model.f_t.dot(&scaled_resid));

        let iter = self.iter;
        let finite = |x: &Array1<f64>| x.iter().all(|v| v.is_finite());
        if !finite(&v_new) {
            return Err(Error::Divergence { iter, what: "V" });
        }
        if !finite(&omega) {
            return Err(Error::Divergence { iter, what: "omega" });
        }
        if !finite(&s) || s.iter().any(|&v| v <= 0.0) {
            return Err(Error::Divergence { iter, what: "S" });
        }
        if !finite(&r) {
            return Err(Error::Divergence { iter, what: "R" });
        }

        self.ln_g = Zip::from(&r)
            .and(&s)
            .map_collect(|&r, &s| support_evidence(r, s, mu, sigma2));
        self.v = v_new;
        self.omega = omega;
        self.s = s;
        self.r = r;
        Ok(())
    }

    /// Denoises every coefficient with the given prior log-odds, damps `(a, c)`,
    /// and advances the iteration counter. Returns the mean squared change of `a`.
    pub fn apply_denoiser(
        &mut self,
        log_odds: ArrayView1<f64>,
        mu: f64,
        sigma2: f64,
        damping: f64,
    ) -> Result<f64> {
        Error::check_dim("prior log-odds (N)", self.a.len(), log_odds.len())?;
        let keep = 1.0 - damping;
        let mut sq_change = 0.0;
        for i in 0..self.a.len() {
            let post = denoise_log_odds(self.r[i], self.s[i], log_odds[i], mu, sigma2);
            let a_new = keep * self.a[i] + damping * post.mean;
            sq_change += (a_new - self.a[i]) * (a_new - self.a[i]);
            self.a[i] = a_new;
            self.c[i] = keep * self.c[i] + damping * post.var;
            self.pi[i] = post.pi;
            self.ln_g[i] = post.ln_g;
        }
        let iter = self.iter;
        if !self.a.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { iter, what: "a" });
        }
        if !self.c.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { iter, what: "c" });
        }
        self.iter += 1;
        Ok(sq_change / self.a.len() as f64)
    }

    /// One full sweep with a fixed prior. Returns the mean squared change of `a`.
    pub fn iterate(&mut self, model: &MeasurementModel, prior: &GbPrior, opts: &AmpOptions) -> Result<f64> {
        opts.validate()?;
        Error::check_dim("prior rho (N)", model.n(), prior.rho.len())?;
        self.update_messages(model, prior.mu, prior.sigma2)?;
        let log_odds = prior.rho.mapv(logit);
        self.apply_denoiser(log_odds.view(), prior.mu, prior.sigma2, opts.damping)
    }
}

/// Source of per-coefficient support log-odds `ln ρ_i - ln(1-ρ_i)`.
///
/// Log-odds rather than ρ cross this boundary so that a prior whose natural
/// output is an activation (the RBM) loses nothing to a sigmoid/logit round trip.
pub trait SupportPrior {
    /// Log-odds used to build the initial iterate.
    fn initial_log_odds(&mut self, n: usize) -> Result<Array1<f64>>;

    /// Log-odds for the sweep numbered `iter` (1-based), given the current
    /// AMP evidence.
    fn log_odds(&mut self, ln_g: ArrayView1<f64>, iter: usize) -> Result<Array1<f64>>;
}

/// Adapts a closure returning ρ vectors into a [`SupportPrior`].
pub struct RhoFn<F> {
    initial: Array1<f64>,
    f: F,
}

impl<F> RhoFn<F>
where
    F: FnMut(ArrayView1<f64>, usize) -> Array1<f64>,
{
    pub fn new(initial_rho: Array1<f64>, f: F) -> Self {
        Self {
            initial: initial_rho,
            f,
        }
    }
}

impl<F> SupportPrior for RhoFn<F>
where
    F: FnMut(ArrayView1<f64>, usize) -> Array1<f64>,
{
    fn initial_log_odds(&mut self, n: usize) -> Result<Array1<f64>> {
        Error::check_dim("initial rho", n, self.initial.len())?;
        Ok(self.initial.mapv(logit))
    }

    fn log_odds(&mut self, ln_g: ArrayView1<f64>, iter: usize) -> Result<Array1<f64>> {
        let rho = (self.f)(ln_g, iter);
        if let Some(bad) = rho.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::invalid("rho", format!("{bad} outside [0, 1]")));
        }
        Ok(rho.mapv(logit))
    }
}

#[derive(Clone, Debug)]
pub struct AmpOutcome {
    pub converged: bool,
    pub iters: usize,
    pub state: AmpState,
}

impl AmpOutcome {
    /// Signal estimate.
    pub fn estimate(&self) -> &Array1<f64> {
        &self.state.a
    }

    pub fn support_posterior(&self) -> &Array1<f64> {
        &self.state.pi
    }
}

/// Runs AMP until the RMS change of `a` drops below `opts.tol` or
/// `opts.max_iter` sweeps have run. The prior is consulted once per sweep,
/// after the `R, S` update and before the denoiser. Hitting `max_iter` is
/// reported through `converged`, not as an error.
pub fn run_amp(
    model: &MeasurementModel,
    prior: &mut dyn SupportPrior,
    mu: f64,
    sigma2: f64,
    opts: &AmpOptions,
) -> Result<AmpOutcome> {
    opts.validate()?;
    check_slab(mu, sigma2)?;
    let n = model.n();
    let initial = prior.initial_log_odds(n)?;
    Error::check_dim("initial log-odds (N)", n, initial.len())?;
    let gb = GbPrior::new(initial.mapv(sigmoid), mu, sigma2)?;
    let mut state = AmpState::init(model, &gb)?;

    let tol_sq = opts.tol * opts.tol;
    let mut converged = false;
    while state.iter < opts.max_iter {
        state.update_messages(model, mu, sigma2)?;
        let log_odds = prior.log_odds(state.ln_g.view(), state.iter + 1)?;
        let change = state.apply_denoiser(log_odds.view(), mu, sigma2, opts.damping)?;
        if change < tol_sq {
            converged = true;
            break;
        }
    }
    Ok(AmpOutcome {
        converged,
        iters: state.iter,
        state,
    })
}
