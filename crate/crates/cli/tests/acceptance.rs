//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails. Criteria can be selected by name:
//! `cargo test --test acceptance -- c1 c4`.
//!
//! The MNIST checks read IDX files from `$MNIST_DIR`, falling back to
//! `data/mnist` under the workspace root (see `scripts/fetch_mnist.sh`).

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;
use std::{env, fs};

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbmamp::amp::{denoise, run_amp, AmpOptions};
use rbmamp::config::{Preset, RunConfig};
use rbmamp::dataset::{binarize, load_idx, synth_gb_signal, ImageSet};
use rbmamp::experiment::{make_measurement, mse, reconstruct_one, run_sweep, Method, Models, SensingVariance, SweepTable};
use rbmamp::math::{clamp_mean, logit};
use rbmamp::prior::{empirical_rho, BaselinePrior};
use rbmamp::rbm::{free_energy, solve_fpi, train_rbm, BinaryRbm, Factorization, FpiOptions, MagnetizationState};
use rbmamp_oracles::{fd, quad, rbm as oracle};

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_rbm(rng: &mut ChaCha8Rng, n_v: usize, n_h: usize, w_max: f64, b_max: f64) -> BinaryRbm {
    let vb = Array1::from_shape_fn(n_v, |_| rng.random_range(-b_max..b_max));
    let hb = Array1::from_shape_fn(n_h, |_| rng.random_range(-b_max..b_max));
    let w = Array2::from_shape_fn((n_v, n_h), |_| rng.random_range(-w_max..w_max));
    BinaryRbm::new(vb, hb, w).unwrap()
}

fn tiny(rbm: &BinaryRbm) -> oracle::TinyRbm {
    oracle::TinyRbm {
        vbias: rbm.vbias().to_vec(),
        hbias: rbm.hbias().to_vec(),
        w: rbm.weights().rows().into_iter().map(|r| r.to_vec()).collect(),
    }
}

fn solve(rbm: &BinaryRbm, field: &Array1<f64>, method: Factorization, tol: f64) -> Option<MagnetizationState> {
    let opts = FpiOptions { method, tol, max_iter: 20_000, damping: 0.5 };
    let out = solve_fpi(rbm, field.view(), &opts, MagnetizationState::zeros(rbm)).ok()?;
    out.converged.then_some(out.state)
}

fn c1_denoiser() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut worst_pi, mut worst_mean, mut worst_var) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10_000 {
        let r = rng.random_range(-5.0..5.0);
        let s = 10f64.powf(rng.random_range(-8.0..=2.0));
        let rho = rng.random_range(0.001..0.999);
        let mu = rng.random_range(-2.0..2.0);
        let sigma2 = 10f64.powf(rng.random_range(-3.0..1.0));
        let p = denoise(r, s, rho, mu, sigma2).map_err(|e| e.to_string())?;
        let q = quad::spike_slab_posterior(r, s, rho, mu, sigma2);
        worst_pi = worst_pi.max((p.pi - q.pi).abs() / q.pi);
        worst_mean = worst_mean.max((p.mean - q.mean).abs() / q.mean.abs());
        worst_var = worst_var.max((p.var - q.var).abs() / q.var);
    }
    let worst = worst_pi.max(worst_mean).max(worst_var);
    ensure(
        worst <= 1e-8,
        format!("max rel err pi {worst_pi:.1e}, mean {worst_mean:.1e}, var {worst_var:.1e} over 10^4 draws"),
    )
}

fn c2_stationarity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst = 0.0f64;
    let mut unconverged = 0;
    for _ in 0..100 {
        let (n_v, n_h) = (rng.random_range(1..=10), rng.random_range(1..=10));
        let rbm = random_rbm(&mut rng, n_v, n_h, 0.5, 1.0);
        let field = Array1::from_shape_fn(n_v, |_| rng.random_range(-2.0..2.0));
        for method in [Factorization::Nmf, Factorization::Tap] {
            let Some(st) = solve(&rbm, &field, method, 1e-13) else {
                unconverged += 1;
                continue;
            };
            let x: Vec<f64> = st.m_v.iter().chain(st.m_h.iter()).copied().collect();
            let f = |x: &[f64]| {
                let m_v = Array1::from(x[..n_v].to_vec());
                let m_h = Array1::from(x[n_v..].to_vec());
                free_energy(&rbm, m_v.view(), m_h.view(), field.view(), method).unwrap()
            };
            for g in fd::gradient(f, &x, 1e-6) {
                worst = worst.max(g.abs());
            }
        }
    }
    ensure(
        worst <= 1e-5 && unconverged == 0,
        format!("max |dF/dm| {worst:.1e} over 100 RBMs x {{NMF, TAP}}, {unconverged} unconverged"),
    )
}

fn c3_enumeration() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let (mut nmf_max, mut nmf_sum, mut tap_sum, mut count) = (0.0f64, 0.0, 0.0, 0usize);
    for _ in 0..100 {
        let (n_v, n_h) = (rng.random_range(2..=8), rng.random_range(1..=6));
        let rbm = random_rbm(&mut rng, n_v, n_h, 0.1, 1.0);
        let field = Array1::from_shape_fn(n_v, |_| rng.random_range(-1.0..1.0));
        let exact = oracle::marginals(&tiny(&rbm), field.as_slice().unwrap());
        let truth: Vec<f64> = exact.pv.iter().chain(&exact.ph).copied().collect();
        let nmf = solve(&rbm, &field, Factorization::Nmf, 1e-12).ok_or("NMF did not converge")?;
        let tap = solve(&rbm, &field, Factorization::Tap, 1e-12).ok_or("TAP did not converge")?;
        let nmf_m = nmf.m_v.iter().chain(nmf.m_h.iter());
        let tap_m = tap.m_v.iter().chain(tap.m_h.iter());
        for ((a, b), t) in nmf_m.zip(tap_m).zip(&truth) {
            nmf_max = nmf_max.max((a - t).abs());
            nmf_sum += (a - t).abs();
            tap_sum += (b - t).abs();
            count += 1;
        }
    }
    let (nmf_mean, tap_mean) = (nmf_sum / count as f64, tap_sum / count as f64);
    ensure(
        nmf_max <= 1e-2 && tap_mean <= nmf_mean,
        format!("NMF max err {nmf_max:.1e}, mean err NMF {nmf_mean:.2e} vs TAP {tap_mean:.2e}"),
    )
}

struct Mnist {
    train: ImageSet,
    test: ImageSet,
    dir: PathBuf,
}

fn mnist_dir() -> PathBuf {
    env::var_os("MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"))
}

fn load_mnist() -> Result<Mnist, String> {
    let dir = mnist_dir();
    let load = |name: &str| {
        load_idx(dir.join(name)).map_err(|e| {
            format!("{}: {e} (set MNIST_DIR or run scripts/fetch_mnist.sh)", dir.join(name).display())
        })
    };
    Ok(Mnist {
        train: load("train-images-idx3-ubyte")?,
        test: load("t10k-images-idx3-ubyte")?,
        dir,
    })
}

fn desk_config(mnist: &Mnist) -> RunConfig {
    let mut cfg = Preset::Desk.load().unwrap();
    cfg.data.mnist_train = mnist.dir.join("train-images-idx3-ubyte");
    cfg.data.mnist_test = mnist.dir.join("t10k-images-idx3-ubyte");
    cfg
}

fn training_data(cfg: &RunConfig, mnist: &Mnist) -> Array2<f64> {
    binarize(mnist.train.head(cfg.data.n_train).images.view(), cfg.data.binarize_threshold)
}

fn c4_zero_coupling(mnist: &Mnist) -> Outcome {
    let cfg = desk_config(mnist);
    let rho = empirical_rho(training_data(&cfg, mnist).view()).map_err(|e| e.to_string())?.mapv(clamp_mean);
    let n = rho.len();
    let rbm = BinaryRbm::new(rho.mapv(logit), Array1::zeros(16), Array2::zeros((n, 16))).unwrap();
    let models = Models {
        rbm: Some(Arc::new(rbm)),
        rho_emp: Some(rho),
        mu: cfg.slab.mu,
        sigma2: cfg.slab.sigma2,
    };
    let recon = cfg.sweep_config().recon;
    let mut mismatches = 0;
    for k in 0..10 {
        let x = mnist.test.images.row(k);
        let go = |method| {
            let mut rng = ChaCha8Rng::seed_from_u64(400 + k as u64);
            reconstruct_one(x, method, &models, &recon, 0.3, &mut rng).map_err(|e| e.to_string())
        };
        let emp = go(Method::EmpiricalGB)?;
        for method in [Method::RbmNmf, Method::RbmTap] {
            if go(method)? != emp {
                mismatches += 1;
            }
        }
    }
    ensure(mismatches == 0, format!("{mismatches} of 20 reconstructions differ from EmpiricalGB"))
}

fn c5_synthetic() -> Outcome {
    let (n, rho, alpha, delta) = (1000, 0.1, 0.5, 1e-8);
    let opts = AmpOptions::default();
    let mut ok = 0;
    let mut worst = 0.0f64;
    for trial in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + trial);
        let x = synth_gb_signal(n, rho, 0.0, 1.0, &mut rng).map_err(|e| e.to_string())?;
        let model = make_measurement(x.view(), alpha, delta, SensingVariance::InvN, &mut rng).map_err(|e| e.to_string())?;
        let mut prior = BaselinePrior::iid(n, rho).unwrap();
        let err = match run_amp(&model, &mut prior, 0.0, 1.0, &opts) {
            Ok(out) => mse(out.estimate().view(), x.view()),
            Err(_) => f64::NAN,
        };
        if err <= 1e-6 {
            ok += 1;
        }
        worst = worst.max(if err.is_nan() { f64::INFINITY } else { err });
    }
    ensure(ok >= 95, format!("{ok}/100 trials with MSE <= 1e-6 (worst {worst:.1e})"))
}

struct DeskRun {
    table: SweepTable,
    cfg: RunConfig,
}

fn desk_sweep(mnist: &Mnist, cfg: &RunConfig, sweep: &rbmamp::experiment::SweepConfig) -> Result<SweepTable, String> {
    let data = training_data(cfg, mnist);
    let needs_rbm = sweep.methods.iter().any(|m| m.factorization().is_some());
    let rbm = if needs_rbm {
        let t = Instant::now();
        let rbm = train_rbm(&cfg.train_spec(), data.view()).map_err(|e| e.to_string())?;
        println!("  trained {} hidden units in {:.0}s", cfg.train.n_hidden, t.elapsed().as_secs_f64());
        Some(Arc::new(rbm))
    } else {
        None
    };
    let models = Models {
        rbm,
        rho_emp: Some(empirical_rho(data.view()).map_err(|e| e.to_string())?),
        mu: cfg.slab.mu,
        sigma2: cfg.slab.sigma2,
    };
    run_sweep(sweep, mnist.test.images.view(), &models).map_err(|e| e.to_string())
}

fn run_desk(mnist: &Mnist) -> Result<DeskRun, String> {
    let cfg = desk_config(mnist);
    let t = Instant::now();
    let table = desk_sweep(mnist, &cfg, &cfg.sweep_config())?;
    println!("  desk sweep finished in {:.0}s", t.elapsed().as_secs_f64());
    let out = Path::new(env!("CARGO_TARGET_TMPDIR")).join("desk");
    table.write_dir(&out).map_err(|e| e.to_string())?;
    let mut text = Vec::new();
    table.write_summary(&mut text).map_err(|e| e.to_string())?;
    for line in String::from_utf8_lossy(&text).lines() {
        println!("  {line}");
    }
    Ok(DeskRun { table, cfg })
}

fn success(run: &DeskRun, alpha: f64, method: Method) -> Result<f64, String> {
    run.table.success_rate(alpha, method).ok_or(format!("no {method} row at alpha {alpha}"))
}

fn c6_desk_reproduction(run: &DeskRun) -> Outcome {
    let s = |a, m| success(run, a, m);
    let gap = s(0.22, Method::RbmTap)? - s(0.22, Method::IidGB)?;
    let mut notes = vec![format!("TAP-iid at 0.22: {:+.1} pts", 100.0 * gap)];
    let mut ok = gap >= 0.25;
    for a in [0.2, 0.3] {
        let (tap, emp, iid) = (s(a, Method::RbmTap)?, s(a, Method::EmpiricalGB)?, s(a, Method::IidGB)?);
        ok &= tap >= emp && emp >= iid;
        notes.push(format!("a={a}: tap {tap:.3} emp {emp:.3} iid {iid:.3}"));
    }
    for &a in &run.cfg.sweep.alphas {
        let (tap, nmf) = (s(a, Method::RbmTap)?, s(a, Method::RbmNmf)?);
        if tap < nmf - 0.05 - 1e-12 {
            ok = false;
            notes.push(format!("a={a}: tap {tap:.3} < nmf {nmf:.3} - 5 pts"));
        }
    }
    ensure(ok, notes.join("; "))
}

fn c7_mcc(run: &DeskRun) -> Outcome {
    let mcc = |m| {
        run.table
            .row(0.1, m)
            .map(|r| r.mcc_mean)
            .ok_or(format!("no {m} row at alpha 0.1"))
    };
    let (tap, iid) = (mcc(Method::RbmTap)?, mcc(Method::IidGB)?);
    ensure(tap - iid >= 0.2, format!("mean MCC at 0.1: tap {tap:.3} vs iid {iid:.3}"))
}

fn c8_hidden_units(mnist: &Mnist, run: &DeskRun) -> Outcome {
    let mut rates = Vec::new();
    for n_hidden in [16, 64] {
        let mut cfg = run.cfg.clone();
        cfg.train.n_hidden = n_hidden;
        let mut sweep = cfg.sweep_config();
        sweep.alphas = vec![0.2];
        sweep.methods = vec![Method::RbmTap];
        let table = desk_sweep(mnist, &cfg, &sweep)?;
        rates.push((n_hidden, table.success_rate(0.2, Method::RbmTap).unwrap()));
    }
    rates.push((run.cfg.train.n_hidden, success(run, 0.2, Method::RbmTap)?));
    let ok = rates.windows(2).all(|w| w[1].1 >= w[0].1 - 0.05 - 1e-12);
    let detail: Vec<String> = rates.iter().map(|(h, s)| format!("n_h={h}: {s:.3}")).collect();
    ensure(ok, format!("RbmTap success at 0.2: {}", detail.join(", ")))
}

fn c9_determinism(mnist: &Mnist) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut cfg = desk_config(mnist);
    cfg.data.n_train = 1000;
    cfg.train.n_hidden = 16;
    cfg.train.epochs = 2;
    cfg.paths.model_out = dir.path().join("rbm.bin");
    cfg.paths.model_in = cfg.paths.model_out.clone();
    cfg.paths.results_dir = dir.path().join("results");
    cfg.sweep.alphas = vec![0.25, 0.4];
    cfg.sweep.n_test = 3;
    cfg.sweep.repeats = 2;
    let cfg_path = dir.path().join("run.toml");
    fs::write(&cfg_path, cfg.to_toml().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;

    let run = |args: &[&str]| -> Result<Vec<u8>, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_rbmamp"))
            .args(args)
            .arg("--config")
            .arg(&cfg_path)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("rbmamp {args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
        }
        Ok(out.stdout)
    };
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        let mut snap = vec![run(&["train"])?, run(&["sweep"])?, run(&["inspect"])?];
        for f in [dir.path().join("rbm.bin"), dir.path().join("results/summary.csv"), dir.path().join("results/detail.csv")] {
            snap.push(fs::read(&f).map_err(|e| format!("{}: {e}", f.display()))?);
        }
        snapshots.push(snap);
    }
    ensure(
        snapshots[0] == snapshots[1],
        "train, sweep and inspect outputs and files compared across two runs".to_string(),
    )
}

struct Report {
    filter: Vec<String>,
    failed: usize,
}

impl Report {
    fn wanted(&self, id: &str) -> bool {
        self.filter.is_empty() || self.filter.iter().any(|f| f.eq_ignore_ascii_case(id))
    }

    fn check(&mut self, id: &str, title: &str, f: impl FnOnce() -> Outcome) {
        if !self.wanted(id) {
            return;
        }
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if outcome.is_err() {
            self.failed += 1;
        }
        println!("{tag} {id} {title}: {detail} [{secs:.1}s]");
    }
}

fn main() -> ExitCode {
    let filter: Vec<String> = env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut report = Report { filter, failed: 0 };

    report.check("C1", "denoiser matches quadrature", c1_denoiser);
    report.check("C2", "mean-field fixed points are stationary", c2_stationarity);
    report.check("C3", "mean-field marginals vs enumeration", c3_enumeration);

    let mnist_ids = ["C4", "C6", "C7", "C8", "C9"];
    let mnist = if mnist_ids.iter().any(|id| report.wanted(id)) { Some(load_mnist()) } else { None };
    let mnist = mnist.as_ref().map(|m| m.as_ref());

    let need = |r: &mut Report, id: &str, title: &str, f: &dyn Fn(&Mnist) -> Outcome| match mnist {
        Some(Ok(m)) => r.check(id, title, || f(m)),
        Some(Err(e)) => r.check(id, title, || Err(e.clone())),
        None => {}
    };
    need(&mut report, "C4", "decoupled RBM prior equals empirical baseline", &c4_zero_coupling);
    report.check("C5", "synthetic recovery with iid prior", c5_synthetic);

    let desk = if ["C6", "C7", "C8"].iter().any(|id| report.wanted(id)) {
        match mnist {
            Some(Ok(m)) => Some(run_desk(m)),
            Some(Err(e)) => Some(Err(e.clone())),
            None => None,
        }
    } else {
        None
    };
    if let Some(desk) = &desk {
        let with = |f: &dyn Fn(&DeskRun) -> Outcome| match desk {
            Ok(run) => f(run),
            Err(e) => Err(format!("desk sweep failed: {e}")),
        };
        report.check("C6", "desk-scale success curves", || with(&c6_desk_reproduction));
        report.check("C7", "low-rate support correlation", || with(&c7_mcc));
        report.check("C8", "success grows with hidden units", || {
            with(&|run| c8_hidden_units(mnist.unwrap().unwrap(), run))
        });
    }
    need(&mut report, "C9", "reruns are byte-identical", &c9_determinism);

    if report.failed > 0 {
        println!("{} criteria failed", report.failed);
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
