//! Measurements, reconstruction drivers for the four compared methods,
//! metrics and result tables.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amp::{run_amp, AmpOptions, MeasurementModel, SupportPrior};
use crate::dataset::image_sparsity;
use crate::error::{Error, Result};
use crate::prior::{BaselinePrior, RbmSupportPrior, VisibleInit, DEFAULT_PERSISTENT_START};
use crate::rbm::{BinaryRbm, Factorization, FpiOptions};
use crate::rng::{derive_seed, task_rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    IidGB,
    EmpiricalGB,
    RbmNmf,
    RbmTap,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::IidGB, Method::EmpiricalGB, Method::RbmNmf, Method::RbmTap];

    pub fn name(self) -> &'static str {
        match self {
            Method::IidGB => "IidGB",
            Method::EmpiricalGB => "EmpiricalGB",
            Method::RbmNmf => "RbmNmf",
            Method::RbmTap => "RbmTap",
        }
    }

    pub fn factorization(self) -> Option<Factorization> {
        match self {
            Method::RbmNmf => Some(Factorization::Nmf),
            Method::RbmTap => Some(Factorization::Tap),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid("method", format!("unknown method {s:?}")))
    }
}

/// Variance of the sensing-matrix entries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensingVariance {
    /// `1/N`: columns have squared norm close to `α`.
    #[default]
    InvN,
    /// `1/√N`.
    InvSqrtN,
}

impl SensingVariance {
    fn variance(self, n: usize) -> f64 {
        match self {
            SensingVariance::InvN => 1.0 / n as f64,
            SensingVariance::InvSqrtN => 1.0 / (n as f64).sqrt(),
        }
    }
}

/// Number of measurements for rate `alpha`: `round(alpha · n)`.
pub fn measurement_count(alpha: f64, n: usize) -> Result<usize> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("alpha", format!("{alpha} outside (0, 1]")));
    }
    let m = (alpha * n as f64).round() as usize;
    if m == 0 {
        return Err(Error::invalid("alpha", format!("round({alpha} * {n}) = 0 measurements")));
    }
    Ok(m)
}

/// Draws `F` (row-major, Gaussian entries) and then the noise, and returns
/// the channel for `y = F x + w`.
pub fn make_measurement<R: Rng + ?Sized>(
    x: ArrayView1<f64>,
    alpha: f64,
    delta: f64,
    sensing: SensingVariance,
    rng: &mut R,
) -> Result<MeasurementModel> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::invalid("delta", format!("{delta} must be non-negative")));
    }
    let n = x.len();
    let m = measurement_count(alpha, n)?;
    let normal = Normal::new(0.0, sensing.variance(n).sqrt()).map_err(|e| Error::invalid("sensing", e.to_string()))?;
    let f = Array2::from_shape_fn((m, n), |_| normal.sample(rng));
    let mut y = f.dot(&x);
    if delta > 0.0 {
        let sd = delta.sqrt();
        for v in y.iter_mut() {
            let z: f64 = StandardNormal.sample(rng);
            *v += sd * z;
        }
    }
    MeasurementModel::new(f, y, delta)
}

/// Matthews correlation coefficient; 0 when any marginal count is zero.
pub fn mcc(est: &[bool], truth: &[bool]) -> Result<f64> {
    Error::check_dim("support vectors", truth.len(), est.len())?;
    let (mut tp, mut tn, mut fp, mut fn_) = (0u64, 0u64, 0u64, 0u64);
    for (&e, &t) in est.iter().zip(truth) {
        match (e, t) {
            (true, true) => tp += 1,
            (false, false) => tn += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
        }
    }
    let (tp, tn, fp, fn_) = (tp as f64, tn as f64, fp as f64, fn_ as f64);
    let den = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok((tp * tn - fp * fn_) / den.sqrt())
}

pub fn mse(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let n = a.len().max(1) as f64;
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / n
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReconResult {
    pub x_hat: Array1<f64>,
    pub support_posterior: Array1<f64>,
    pub mse: f64,
    pub mcc: f64,
    pub converged: bool,
    pub iters: usize,
}

/// Everything a reconstruction needs besides the image itself.
#[derive(Clone, Debug)]
pub struct Models {
    pub rbm: Option<Arc<BinaryRbm>>,
    /// Per-pixel on-frequencies for the empirical baseline.
    pub rho_emp: Option<Array1<f64>>,
    pub mu: f64,
    pub sigma2: f64,
}

/// Solver settings shared by every reconstruction in a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconConfig {
    pub delta: f64,
    #[serde(default)]
    pub amp: AmpOptions,
    /// The factorization is taken from the method; `fpi.method` is ignored.
    #[serde(default)]
    pub fpi: FpiOptions,
    #[serde(default = "default_persistent_start")]
    pub persistent_start: usize,
    #[serde(default)]
    pub sensing: SensingVariance,
    #[serde(default = "default_visible_init")]
    pub visible_init: VisibleInit,
}

fn default_persistent_start() -> usize {
    DEFAULT_PERSISTENT_START
}

fn default_visible_init() -> VisibleInit {
    VisibleInit::Zero
}

impl Default for ReconConfig {
    fn default() -> Self {
        Self {
            delta: 1e-8,
            amp: AmpOptions::default(),
            fpi: FpiOptions::default(),
            persistent_start: DEFAULT_PERSISTENT_START,
            sensing: SensingVariance::InvN,
            visible_init: VisibleInit::Zero,
        }
    }
}

impl ReconConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid("delta", format!("{} must be non-negative", self.delta)));
        }
        if self.persistent_start == 0 {
            return Err(Error::invalid("persistent_start", "must be at least 1"));
        }
        self.amp.validate()?;
        self.fpi.validate()
    }
}

/// Builds the support prior for `method`. `rng` feeds the optional random
/// visible reset of the RBM prior.
pub fn build_prior(
    x_true: ArrayView1<f64>,
    method: Method,
    models: &Models,
    cfg: &ReconConfig,
    rng: ChaCha8Rng,
) -> Result<Box<dyn SupportPrior>> {
    match method {
        Method::IidGB => {
            let rho = image_sparsity(x_true.insert_axis(ndarray::Axis(0)))[0];
            Ok(Box::new(BaselinePrior::iid(x_true.len(), rho)?))
        }
        Method::EmpiricalGB => {
            let rho = models.rho_emp.clone().ok_or_else(|| Error::invalid("models", "EmpiricalGB needs rho_emp"))?;
            Ok(Box::new(BaselinePrior::empirical(rho)?))
        }
        Method::RbmNmf | Method::RbmTap => {
            let rbm = models.rbm.clone().ok_or_else(|| Error::invalid("models", format!("{method} needs an RBM")))?;
            let fpi = FpiOptions {
                method: method.factorization().expect("RBM method"),
                ..cfg.fpi
            };
            let prior = RbmSupportPrior::new(rbm, cfg.persistent_start, fpi)?;
            Ok(match cfg.visible_init {
                VisibleInit::Zero => Box::new(prior),
                VisibleInit::BiasSample => Box::new(prior.with_bias_sampled_init(rng)),
            })
        }
    }
}

/// Measures `x_true` at rate `alpha` with randomness from `rng`, reconstructs
/// it with `method` and scores the result. The prior's own random stream (if
/// any) is split off `rng` after the measurement is drawn.
pub fn reconstruct_one(
    x_true: ArrayView1<f64>,
    method: Method,
    models: &Models,
    cfg: &ReconConfig,
    alpha: f64,
    rng: &mut ChaCha8Rng,
) -> Result<ReconResult> {
    cfg.validate()?;
    let model = make_measurement(x_true, alpha, cfg.delta, cfg.sensing, rng)?;
    let prior_rng = task_rng(rng.random(), "prior");
    let mut prior = build_prior(x_true, method, models, cfg, prior_rng)?;
    let out = run_amp(&model, prior.as_mut(), models.mu, models.sigma2, &cfg.amp)?;

    let x_hat = out.state.a;
    let pi = out.state.pi;
    let est: Vec<bool> = pi.iter().map(|&p| p > 0.5).collect();
    let truth: Vec<bool> = x_true.iter().map(|&x| x > 0.0).collect();
    Ok(ReconResult {
        mse: mse(x_hat.view(), x_true),
        mcc: mcc(&est, &truth)?,
        x_hat,
        support_posterior: pi,
        converged: out.converged,
        iters: out.iters,
    })
}

/// Fraction of images whose sparsity is at most each `alpha`.
pub fn oracle_curve(images: ArrayView2<f64>, alphas: &[f64]) -> Vec<f64> {
    let rho = image_sparsity(images);
    let count = rho.len().max(1) as f64;
    alphas
        .iter()
        .map(|&a| rho.iter().filter(|&&r| r <= a).count() as f64 / count)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
    pub methods: Vec<Method>,
    pub n_test: usize,
    /// Overridden by the run's top-level seed when loaded from a run config.
    #[serde(default)]
    pub seed: u64,
    /// Independent measurement draws per image.
    #[serde(default = "one")]
    pub repeats: usize,
    pub success_mse: f64,
    #[serde(flatten)]
    pub recon: ReconConfig,
}

fn one() -> usize {
    1
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() {
            return Err(Error::invalid("alphas", "empty"));
        }
        for &a in &self.alphas {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::invalid("alphas", format!("{a} outside (0, 1]")));
            }
        }
        if self.alphas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("alphas", "must be strictly ascending"));
        }
        if self.methods.is_empty() {
            return Err(Error::invalid("methods", "empty"));
        }
        if self.n_test == 0 {
            return Err(Error::invalid("n_test", "must be at least 1"));
        }
        if self.repeats == 0 {
            return Err(Error::invalid("repeats", "must be at least 1"));
        }
        if !(self.success_mse > 0.0) {
            return Err(Error::invalid("success_mse", "must be positive"));
        }
        self.recon.validate()
    }

    /// Checks that `models` carries what the configured methods need.
    pub fn check_models(&self, models: &Models, n: usize) -> Result<()> {
        for m in &self.methods {
            match m {
                Method::EmpiricalGB => match &models.rho_emp {
                    Some(r) => Error::check_dim("rho_emp", n, r.len())?,
                    None => return Err(Error::invalid("models", "EmpiricalGB needs rho_emp")),
                },
                Method::RbmNmf | Method::RbmTap => match &models.rbm {
                    Some(r) => Error::check_dim("RBM visible units", n, r.n_visible())?,
                    None => return Err(Error::invalid("models", format!("{m} needs an RBM"))),
                },
                Method::IidGB => {}
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetailRow {
    pub image_id: usize,
    pub alpha: f64,
    pub method: Method,
    pub rho_true: f64,
    /// NaN when the reconstruction failed.
    pub mse: f64,
    pub mcc: f64,
    pub converged: bool,
    pub iters: usize,
    /// Seed of the trial's measurement stream.
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub alpha: f64,
    pub method: Method,
    pub success_rate: f64,
    pub mcc_mean: f64,
    pub mcc_std: f64,
    pub oracle: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub summary: Vec<SummaryRow>,
    pub detail: Vec<DetailRow>,
}

impl SweepTable {
    pub fn success_rate(&self, alpha: f64, method: Method) -> Option<f64> {
        self.row(alpha, method).map(|r| r.success_rate)
    }

    pub fn row(&self, alpha: f64, method: Method) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.alpha == alpha && r.method == method)
    }

    pub fn write_summary<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["alpha", "method", "success_rate", "mcc_mean", "mcc_std", "oracle"])?;
        for r in &self.summary {
            w.write_record([
                r.alpha.to_string(),
                r.method.to_string(),
                r.success_rate.to_string(),
                r.mcc_mean.to_string(),
                r.mcc_std.to_string(),
                r.oracle.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_detail<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["image_id", "alpha", "method", "rho_true", "mse", "mcc", "converged", "iters", "seed"])?;
        for r in &self.detail {
            w.write_record([
                r.image_id.to_string(),
                r.alpha.to_string(),
                r.method.to_string(),
                r.rho_true.to_string(),
                r.mse.to_string(),
                r.mcc.to_string(),
                r.converged.to_string(),
                r.iters.to_string(),
                r.seed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `summary.csv` and `detail.csv` into `dir`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        self.write_summary(std::fs::File::create(dir.join("summary.csv"))?)?;
        self.write_detail(std::fs::File::create(dir.join("detail.csv"))?)
    }
}

/// Parses a detail CSV written by [`SweepTable::write_detail`].
pub fn read_detail<R: std::io::Read>(input: R) -> Result<Vec<DetailRow>> {
    let mut rows = Vec::new();
    for rec in csv::Reader::from_reader(input).records() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let num = |i: usize, name: &'static str| {
            field(i)
                .parse::<f64>()
                .map_err(|e| Error::invalid(name, format!("{:?}: {e}", field(i))))
        };
        let int = |i: usize, name: &'static str| {
            field(i)
                .parse::<u64>()
                .map_err(|e| Error::invalid(name, format!("{:?}: {e}", field(i))))
        };
        rows.push(DetailRow {
            image_id: int(0, "image_id")? as usize,
            alpha: num(1, "alpha")?,
            method: field(2).parse()?,
            rho_true: num(3, "rho_true")?,
            mse: num(4, "mse")?,
            mcc: num(5, "mcc")?,
            converged: field(6)
                .parse()
                .map_err(|_| Error::invalid("converged", field(6).to_string()))?,
            iters: int(7, "iters")? as usize,
            seed: int(8, "seed")?,
        });
    }
    Ok(rows)
}

/// Aggregates detail rows per `(alpha, method)` in the order given. Failed
/// rows (NaN MSE) count as unsuccessful and are left out of the MCC
/// statistics. The MCC spread is the population standard deviation.
pub fn summarize(
    detail: &[DetailRow],
    alphas: &[f64],
    methods: &[Method],
    oracle: &[f64],
    success_mse: f64,
) -> Vec<SummaryRow> {
    let mut out = Vec::with_capacity(alphas.len() * methods.len());
    for (k, &alpha) in alphas.iter().enumerate() {
        for &method in methods {
            let rows: Vec<&DetailRow> = detail.iter().filter(|r| r.alpha == alpha && r.method == method).collect();
            let total = rows.len().max(1) as f64;
            let successes = rows.iter().filter(|r| r.mse <= success_mse).count() as f64;
            let mccs: Vec<f64> = rows.iter().map(|r| r.mcc).filter(|v| v.is_finite()).collect();
            let (mean, std) = if mccs.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                let n = mccs.len() as f64;
                let mean = mccs.iter().sum::<f64>() / n;
                let var = mccs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                (mean, var.sqrt())
            };
            out.push(SummaryRow {
                alpha,
                method,
                success_rate: successes / total,
                mcc_mean: mean,
                mcc_std: std,
                oracle: oracle[k],
            });
        }
    }
    out
}

/// Seed of repeat `rep`'s measurement streams.
pub fn trial_seed(seed: u64, rep: usize) -> u64 {
    derive_seed(seed, &format!("sweep/trial/{rep}"))
}

/// Measurement stream for one `(alpha, image)` pair of a trial. Every method
/// sees the same `F` and noise for a given pair.
pub fn trial_rng(trial_seed: u64, alpha: f64, image_id: usize) -> ChaCha8Rng {
    task_rng(trial_seed, &format!("measure/alpha={alpha}/image={image_id}"))
}

/// Runs every `(alpha, method, image, repeat)` reconstruction on the first
/// `cfg.n_test` rows of `test_images`. Jobs run on the current rayon pool;
/// rows come back in `(alpha, method, image, repeat)` order whatever the
/// completion order.
pub fn run_sweep(cfg: &SweepConfig, test_images: ArrayView2<f64>, models: &Models) -> Result<SweepTable> {
    cfg.validate()?;
    if test_images.nrows() < cfg.n_test {
        return Err(Error::invalid(
            "n_test",
            format!("{} requested, {} test images available", cfg.n_test, test_images.nrows()),
        ));
    }
    let test = test_images.slice(ndarray::s![..cfg.n_test, ..]);
    cfg.check_models(models, test.ncols())?;
    let rho_true = image_sparsity(test);

    let mut jobs = Vec::new();
    for &alpha in &cfg.alphas {
        for &method in &cfg.methods {
            for image in 0..cfg.n_test {
                for rep in 0..cfg.repeats {
                    jobs.push((alpha, method, image, rep));
                }
            }
        }
    }

    let detail: Vec<DetailRow> = jobs
        .par_iter()
        .map(|&(alpha, method, image, rep)| {
            let seed = trial_seed(cfg.seed, rep);
            let mut rng = trial_rng(seed, alpha, image);
            let res = reconstruct_one(test.row(image), method, models, &cfg.recon, alpha, &mut rng);
            let (mse, mcc, converged, iters) = match res {
                Ok(r) => (r.mse, r.mcc, r.converged, r.iters),
                Err(_) => (f64::NAN, f64::NAN, false, 0),
            };
            DetailRow {
                image_id: image,
                alpha,
                method,
                rho_true: rho_true[image],
                mse,
                mcc,
                converged,
                iters,
                seed,
            }
        })
        .collect();

    let oracle = oracle_curve(test, &cfg.alphas);
    let summary = summarize(&detail, &cfg.alphas, &cfg.methods, &oracle, cfg.success_mse);
    Ok(SweepTable { summary, detail })
}

#[cfg(test)]
mod tests {
    use ndarray::array;
    use rand::SeedableRng;

    use super::*;

    #[test]
    fn mcc_reference_cases() {
        let t = [true, false, true, false];
        assert_eq!(mcc(&t, &t).unwrap(), 1.0);
        let c: Vec<bool> = t.iter().map(|v| !v).collect();
        assert_eq!(mcc(&c, &t).unwrap(), -1.0);
        assert_eq!(mcc(&[true, true], &[true, false]).unwrap(), 0.0);
        assert!(mcc(&[true], &[true, false]).is_err());
    }

    #[test]
    fn mcc_confusion_counts() {
        let mut est = Vec::new();
        let mut truth = Vec::new();
        for (e, t, n) in [(true, true, 40), (false, false, 700), (true, false, 10), (false, true, 34)] {
            est.extend(std::iter::repeat(e).take(n));
            truth.extend(std::iter::repeat(t).take(n));
        }
        let expect = (40.0 * 700.0 - 10.0 * 34.0) / (50.0f64 * 74.0 * 710.0 * 734.0).sqrt();
        assert!((mcc(&est, &truth).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn noiseless_measurement_is_exact() {
        let x = array![1.0, 0.0, 0.5, 0.2];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = make_measurement(x.view(), 0.5, 0.0, SensingVariance::InvN, &mut rng).unwrap();
        assert_eq!(model.m(), 2);
        assert_eq!(model.y(), &model.f().dot(&x));
    }

    #[test]
    fn zero_measurements_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = Array1::zeros(10);
        assert!(make_measurement(x.view(), 0.01, 0.0, SensingVariance::InvN, &mut rng).is_err());
        assert!(make_measurement(x.view(), 1.5, 0.0, SensingVariance::InvN, &mut rng).is_err());
    }

    #[test]
    fn column_norms_concentrate() {
        let n = 784;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let model = make_measurement(Array1::zeros(n).view(), 0.5, 0.0, SensingVariance::InvN, &mut rng).unwrap();
        let mean_sq = model.f().iter().map(|v| v * v).sum::<f64>() / n as f64;
        let expect = model.m() as f64 / n as f64;
        assert!((mean_sq / expect - 1.0).abs() < 0.05, "{mean_sq} vs {expect}");
    }

    #[test]
    fn oracle_is_inclusive() {
        let mut img = Array2::zeros((2, 1000));
        img.slice_mut(ndarray::s![0, ..342]).fill(1.0);
        assert_eq!(oracle_curve(img.view(), &[0.0, 0.342, 0.341, 1.0]), vec![0.5, 1.0, 0.5, 1.0]);
    }

    #[test]
    fn zero_image_is_recovered() {
        let models = Models { rbm: None, rho_emp: None, mu: 0.5, sigma2: 0.1 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Array1::zeros(50);
        let r = reconstruct_one(x.view(), Method::IidGB, &models, &ReconConfig::default(), 0.3, &mut rng).unwrap();
        assert_eq!(r.mse, 0.0);
        assert!(r.x_hat.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn missing_model_is_an_error() {
        let models = Models { rbm: None, rho_emp: None, mu: 0.5, sigma2: 0.1 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = Array1::zeros(5);
        assert!(reconstruct_one(x.view(), Method::RbmTap, &models, &ReconConfig::default(), 1.0, &mut rng).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("Tap".parse::<Method>().is_err());
    }
}
