//! `qkernel` binary: subcommand dispatch, config overrides, worker-pool
//! setup, and artifact writing. All logic lives in the library modules so
//! tests can drive it in-process.

use clap::{Parser, Subcommand, ValueEnum};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use qkernel::simulator::{self, KernelMode, KernelValue};
use qkernel::{dataset, rng, Error, Result};
use qkernel_cli::config::{DatasetSource, ExperimentConfig};
use qkernel_cli::pipeline;

#[derive(Parser)]
#[command(
    name = "qkernel",
    version,
    about = "Quantum fidelity kernel experiments: synthetic data generation, \
             cross-validated SVM runs, parameter sweeps, and shot-noise studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment config; omitted fields take their defaults.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override the master seed (for gen-data, the generator seed).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for the data-parallel kernels (0 = library default).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Kernel evaluation mode.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,

    /// Shots per kernel entry in sampled mode.
    #[arg(long, global = true)]
    shots: Option<u64>,

    /// Save every split's train and cross Grams (crossval only).
    #[arg(long, global = true)]
    save_gram: bool,

    /// Pin sampled train-Gram diagonals to exactly 1 instead of sampling.
    #[arg(long, global = true)]
    pin_diagonal: bool,

    /// Refuse statevectors beyond this many qubits.
    #[arg(long, global = true, value_name = "N")]
    qubit_cap: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Sampled,
}

impl From<ModeArg> for KernelMode {
    fn from(m: ModeArg) -> KernelMode {
        match m {
            ModeArg::Exact => KernelMode::Exact,
            ModeArg::Sampled => KernelMode::Sampled,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write the configured synthetic dataset as patterns.csv.
    GenData,
    /// Cross-validated run; writes summary.json and accuracies.csv.
    Crossval,
    /// Accuracy over the alpha grid; writes alpha_sweep.csv and records.json.
    SweepAlpha,
    /// Accuracy over register sizes; writes qubit_sweep.csv and records.json.
    SweepQubits,
    /// Sampled-kernel (shots, lambda) grid; writes noise_study.csv and
    /// records.json.
    NoiseStudy,
    /// Evaluate one kernel entry and print it as JSON.
    Kernel {
        /// First input vector, comma-separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        xl: Vec<f64>,
        /// Second input vector, comma-separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        xm: Vec<f64>,
        /// Circuit repetitions (defaults to the config value).
        #[arg(long)]
        depth: Option<usize>,
        /// Data-scaling alpha (defaults to the config value).
        #[arg(long)]
        alpha: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Input(_) => 2,
                Error::Resource(_) => 3,
                Error::Data(_) => 4,
            })
        }
    }
}

#[cfg(feature = "parallel")]
fn init_threads(threads: Option<usize>) -> Result<()> {
    match threads {
        Some(n) if n > 0 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Input(format!("cannot size the thread pool: {e}"))),
        _ => Ok(()),
    }
}

#[cfg(not(feature = "parallel"))]
fn init_threads(threads: Option<usize>) -> Result<()> {
    if threads.is_some() {
        eprintln!("note: built without the parallel feature; --threads has no effect");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut config = ExperimentConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.master_seed = seed;
    }
    if let Some(mode) = cli.mode {
        config.kernel.mode = mode.into();
    }
    if let Some(shots) = cli.shots {
        config.kernel.shots = shots;
    }
    if cli.pin_diagonal {
        config.kernel.pin_diagonal = true;
    }
    if let Some(cap) = cli.qubit_cap {
        config.kernel.qubit_cap = cap;
    }
    init_threads(cli.threads)?;
    config.validate()?;

    // The kernel subcommand is a pure stdout tool; everything else writes
    // into an output directory.
    if let Command::Kernel { xl, xm, depth, alpha } = cli.command {
        return cmd_kernel(&config, &xl, &xm, depth, alpha, cli.seed);
    }

    let slug = match cli.command {
        Command::GenData => "gen-data",
        Command::Crossval => "crossval",
        Command::SweepAlpha => "sweep-alpha",
        Command::SweepQubits => "sweep-qubits",
        Command::NoiseStudy => "noise-study",
        Command::Kernel { .. } => unreachable!("handled above"),
    };
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("qkernel-out").join(slug));
    fs::create_dir_all(&out)
        .map_err(|e| Error::Data(format!("cannot create {}: {e}", out.display())))?;
    config.output_dir = Some(out.clone());

    match cli.command {
        Command::GenData => cmd_gen_data(&config, &out, cli.seed),
        Command::Crossval => cmd_crossval(&config, &out, cli.save_gram),
        Command::SweepAlpha => cmd_sweep_alpha(&config, &out),
        Command::SweepQubits => cmd_sweep_qubits(&config, &out),
        Command::NoiseStudy => cmd_noise_study(&config, &out),
        Command::Kernel { .. } => unreachable!("handled above"),
    }
}

fn finish(out: &Path, started: Instant) -> Result<()> {
    let elapsed = started.elapsed().as_secs_f64();
    // Timing lives in its own file so the result artifacts stay
    // byte-deterministic.
    fs::write(out.join("timing.txt"), format!("wall_seconds={elapsed:.3}\n"))
        .map_err(|e| Error::Data(format!("cannot write timing.txt: {e}")))?;
    eprintln!("done in {elapsed:.3}s; artifacts in {}", out.display());
    Ok(())
}

fn cmd_gen_data(config: &ExperimentConfig, out: &Path, seed: Option<u64>) -> Result<()> {
    let started = Instant::now();
    let DatasetSource::Generator(generator) = &config.dataset else {
        return Err(Error::Input(
            "gen-data needs a generator dataset source, but the config points at a CSV".into(),
        ));
    };
    let mut generator = generator.clone();
    if let Some(seed) = seed {
        generator.seed = seed;
    }
    let data = dataset::generate(&generator)?;
    let path = out.join("patterns.csv");
    dataset::save_csv(&data, &path)?;
    eprintln!(
        "wrote {} patterns x {} features over {} classes to {}",
        data.features.nrows(),
        data.features.ncols(),
        data.class_names.len(),
        path.display()
    );
    finish(out, started)
}

fn cmd_crossval(config: &ExperimentConfig, out: &Path, save_gram: bool) -> Result<()> {
    let started = Instant::now();
    let data = pipeline::load_dataset(config)?;
    let gram_dir = if save_gram {
        let dir = out.join("gram");
        fs::create_dir_all(&dir)
            .map_err(|e| Error::Data(format!("cannot create {}: {e}", dir.display())))?;
        Some(dir)
    } else {
        None
    };
    let record = pipeline::run_crossval(&data, config, config.split_count, gram_dir.as_deref())?;
    pipeline::write_json(&out.join("summary.json"), &record)?;
    pipeline::write_accuracies_csv(&out.join("accuracies.csv"), &record.accuracies)?;
    eprintln!(
        "{} splits: mean accuracy {:.4} (min {:.4}, median {:.4}, max {:.4})",
        record.accuracies.len(),
        record.summary.mean,
        record.summary.min,
        record.summary.median,
        record.summary.max
    );
    finish(out, started)
}

fn cmd_sweep_alpha(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let started = Instant::now();
    let data = pipeline::load_dataset(config)?;
    let records = pipeline::run_alpha_sweep(&data, config)?;
    pipeline::write_alpha_sweep_csv(&out.join("alpha_sweep.csv"), &records)?;
    pipeline::write_json(&out.join("records.json"), &records)?;
    let best = records
        .iter()
        .max_by(|a, b| a.summary.mean.total_cmp(&b.summary.mean))
        .expect("non-empty sweep");
    eprintln!(
        "{} alphas: best mean accuracy {:.4} at alpha {}",
        records.len(),
        best.summary.mean,
        best.config.feature_map.alpha
    );
    finish(out, started)
}

fn cmd_sweep_qubits(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let started = Instant::now();
    let data = pipeline::load_dataset(config)?;
    let records = pipeline::run_qubit_sweep(&data, config)?;
    pipeline::write_qubit_sweep_csv(&out.join("qubit_sweep.csv"), &records)?;
    pipeline::write_json(&out.join("records.json"), &records)?;
    for r in &records {
        eprintln!(
            "{:>3} qubits: mean accuracy {:.4}",
            r.config.feature_map.n_qubits, r.summary.mean
        );
    }
    finish(out, started)
}

fn cmd_noise_study(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let started = Instant::now();
    let data = pipeline::load_dataset(config)?;
    let records = pipeline::run_noise_study(&data, config)?;
    pipeline::write_noise_csv(&out.join("noise_study.csv"), &records)?;
    pipeline::write_json(&out.join("records.json"), &records)?;
    for r in &records {
        eprintln!(
            "shots {:>7}, lambda {:.3}: mean accuracy {:.4}, kernel deviation {:.5}",
            r.config.kernel.shots,
            r.config.kernel.noise_lambda,
            r.summary.mean,
            r.mean_kernel_deviation.expect("noise records carry a deviation")
        );
    }
    finish(out, started)
}

/// Evaluate a single kernel entry. Sampled mode mirrors the Gram builder:
/// depolarize the exact probability first, then draw the shot estimate.
fn cmd_kernel(
    config: &ExperimentConfig,
    xl: &[f64],
    xm: &[f64],
    depth: Option<usize>,
    alpha: Option<f64>,
    seed: Option<u64>,
) -> Result<()> {
    if xl.len() != xm.len() {
        return Err(Error::Input(format!(
            "vector lengths differ: {} vs {}",
            xl.len(),
            xm.len()
        )));
    }
    let mut fm = config.feature_map.clone();
    if let Some(d) = depth {
        fm.depth = d;
    }
    if let Some(a) = alpha {
        fm.alpha = a;
    }
    let spec = fm.to_spec(Some(xl.len()), None)?;
    let cap = config.kernel.qubit_cap;
    let lambda = config.kernel.noise_lambda;
    let value = match config.kernel.mode {
        KernelMode::Exact => {
            if lambda > 0.0 {
                return Err(Error::Input(
                    "depolarizing noise requires sampled mode (pass --mode sampled)".into(),
                ));
            }
            simulator::kernel_exact_capped(&spec, xl, xm, cap)?
        }
        KernelMode::Sampled => {
            let exact = simulator::kernel_exact_capped(&spec, xl, xm, cap)?;
            let mixed = simulator::apply_depolarizing(exact, lambda, spec.n_qubits);
            let shots = config.kernel.shots;
            let hits = rng::binomial(seed.unwrap_or(config.master_seed), shots, mixed.value);
            KernelValue {
                value: hits as f64 / shots as f64,
                mode: KernelMode::Sampled,
                shots,
            }
        }
    };
    let json = serde_json::to_string(&value)
        .map_err(|e| Error::Data(format!("cannot serialize kernel value: {e}")))?;
    println!("{json}");
    Ok(())
}
