use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use rbmamp::config::{Preset, RunConfig};
use rbmamp::dataset::{binarize, load_idx, ImageSet};
use rbmamp::experiment::{run_sweep, Method, Models};
use rbmamp::prior::empirical_rho;
use rbmamp::rbm::{reconstruction_error, train_rbm_with, BinaryRbm};
use rbmamp::{Error, Result};

/// Compressed-sensing reconstruction of MNIST digits with AMP and RBM priors.
#[derive(Parser, Debug)]
#[command(name = "rbmamp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (TOML). Defaults to the desk preset.
    #[arg(long, global = true, conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Shipped configuration to use instead of --config.
    #[arg(long, global = true, value_enum)]
    preset: Option<PresetArg>,

    /// Overrides the configuration's top-level seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Reconstruction worker threads for `sweep` (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train an RBM on the binarized training digits and write the model.
    Train,
    /// Reconstruct test digits over the alpha grid and write CSV results.
    Sweep,
    /// Print a summary of a model file.
    Inspect {
        /// Model file (default: paths.model_in of the configuration).
        model: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PresetArg {
    Paper,
    Desk,
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Csv(_) | Error::WrongMagic { .. } | Error::NotRbmFile | Error::Truncated { .. } | Error::TrailingBytes { .. } => 3,
        Error::NonFinite { .. } | Error::Divergence { .. } => 4,
        _ => 2,
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match (&cli.config, cli.preset) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(PresetArg::Paper)) => Preset::Paper.load()?,
        (None, Some(PresetArg::Desk) | None) => Preset::Desk.load()?,
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.jobs == Some(0) {
        return Err(Error::invalid("jobs", "must be at least 1"));
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Referenced inputs must exist when the configuration is validated.
fn require_file(what: &'static str, path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::invalid(what, format!("{}: no such file", path.display())))
    }
}

fn load_training(cfg: &RunConfig) -> Result<ndarray::Array2<f64>> {
    let train = load_idx(&cfg.data.mnist_train)?;
    if train.count() < cfg.data.n_train {
        return Err(Error::invalid(
            "data.n_train",
            format!("{} requested, {} images in {}", cfg.data.n_train, train.count(), cfg.data.mnist_train.display()),
        ));
    }
    Ok(binarize(train.head(cfg.data.n_train).images.view(), cfg.data.binarize_threshold))
}

fn write_model(rbm: &BinaryRbm, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    rbm.save(path)
}

fn cmd_train(cfg: &RunConfig) -> Result<()> {
    require_file("training images", &cfg.data.mnist_train)?;
    require_file("test images", &cfg.data.mnist_test)?;
    let data = load_training(cfg)?;
    let test = load_idx(&cfg.data.mnist_test)?;
    if test.count() < cfg.train.holdout {
        return Err(Error::invalid("train.holdout", format!("only {} test images", test.count())));
    }
    let holdout = binarize(
        test.range(test.count() - cfg.train.holdout, test.count()).images.view(),
        cfg.data.binarize_threshold,
    );

    let spec = cfg.train_spec();
    println!(
        "training {} hidden units on {} samples for {} epochs",
        spec.n_hidden,
        data.nrows(),
        spec.epochs
    );
    let mut out = io::stdout().lock();
    let mut diag_err = None;
    let rbm = train_rbm_with(&spec, data.view(), |epoch, rbm| match reconstruction_error(rbm, holdout.view()) {
        Ok(err) => {
            let _ = writeln!(out, "epoch {epoch:>4}  holdout_recon_error {err:.6}");
        }
        Err(e) => diag_err = Some(e),
    })?;
    if let Some(e) = diag_err {
        return Err(e);
    }
    write_model(&rbm, &cfg.paths.model_out)?;
    println!("wrote {}", cfg.paths.model_out.display());
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig, jobs: Option<usize>) -> Result<()> {
    let sweep = cfg.sweep_config();
    let needs_rbm = sweep.methods.iter().any(|m| m.factorization().is_some());
    let needs_emp = sweep.methods.contains(&Method::EmpiricalGB);
    require_file("test images", &cfg.data.mnist_test)?;
    if needs_emp {
        require_file("training images", &cfg.data.mnist_train)?;
    }
    if needs_rbm {
        require_file("model", &cfg.paths.model_in)?;
    }

    let test: ImageSet = load_idx(&cfg.data.mnist_test)?;
    let rbm = if needs_rbm { Some(Arc::new(BinaryRbm::load(&cfg.paths.model_in)?)) } else { None };
    let rho_emp = if needs_emp { Some(empirical_rho(load_training(cfg)?.view())?) } else { None };
    let models = Models {
        rbm,
        rho_emp,
        mu: cfg.slab.mu,
        sigma2: cfg.slab.sigma2,
    };
    sweep.check_models(&models, test.pixels())?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::invalid("jobs", e.to_string()))?;
    let table = pool.install(|| run_sweep(&sweep, test.images.view(), &models))?;
    table.write_dir(&cfg.paths.results_dir)?;

    let failed = table.detail.iter().filter(|r| r.mse.is_nan()).count();
    table.write_summary(io::stdout().lock())?;
    if failed > 0 {
        eprintln!("{failed} reconstructions failed (recorded as NaN rows)");
    }
    println!("wrote {}", cfg.paths.results_dir.display());
    Ok(())
}

fn cmd_inspect(path: &Path) -> Result<()> {
    require_file("model", path)?;
    let rbm = BinaryRbm::load(path)?;
    let w = rbm.weights();
    let norm = |it: &mut dyn Iterator<Item = &f64>| it.map(|v| v * v).sum::<f64>().sqrt();
    let (lo, hi) = w.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));

    println!("n_visible    {}", rbm.n_visible());
    println!("n_hidden     {}", rbm.n_hidden());
    println!("|W|_F        {:.6}", norm(&mut w.iter()));
    println!("max |W|      {:.6}", lo.abs().max(hi.abs()));
    println!("|vbias|_2    {:.6}", norm(&mut rbm.vbias().iter()));
    println!("|hbias|_2    {:.6}", norm(&mut rbm.hbias().iter()));

    let bins = 12;
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &v in w.iter() {
        counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
    }
    let top = counts.iter().copied().max().unwrap_or(1).max(1);
    println!("weight histogram");
    for (k, &c) in counts.iter().enumerate() {
        let from = lo + k as f64 * width;
        let bar = "#".repeat((c * 50).div_ceil(top));
        println!("  [{:>9.4}, {:>9.4})  {:>8}  {}", from, from + width, c, bar);
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if let Command::Inspect { model: Some(path) } = &cli.command {
        return cmd_inspect(path);
    }
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Train => cmd_train(&cfg),
        Command::Sweep => cmd_sweep(&cfg, cli.jobs),
        Command::Inspect { .. } => cmd_inspect(&cfg.paths.model_in),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
