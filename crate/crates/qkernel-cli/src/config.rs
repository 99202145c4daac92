//! Experiment configuration: JSON-loadable, fully defaulted, validated
//! before any work starts.

use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

use qkernel::dataset::GeneratorConfig;
use qkernel::featuremap::FeatureMapSpec;
use qkernel::simulator::{KernelMode, DEFAULT_QUBIT_CAP};
use qkernel::svm::SvmParams;
use qkernel::{Error, Result};

/// Where the patterns come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DatasetSource {
    /// Synthesize patterns with the built-in generator.
    Generator(GeneratorConfig),
    /// Load a `label,cmd_...` CSV produced by `gen-data` (or hand-made).
    Csv(CsvSource),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSource {
    pub path: PathBuf,
}

impl Default for DatasetSource {
    fn default() -> Self {
        DatasetSource::Generator(GeneratorConfig::default())
    }
}

/// Feature-map shape; `pairs: None` means the linear qubit chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureMapConfig {
    pub n_qubits: usize,
    pub depth: usize,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<(usize, usize)>>,
}

impl Default for FeatureMapConfig {
    fn default() -> Self {
        FeatureMapConfig { n_qubits: 10, depth: 2, alpha: 1.0, pairs: None }
    }
}

impl FeatureMapConfig {
    /// Build the validated spec, optionally overriding the qubit count or
    /// alpha (sweeps do both). Explicit pair lists cannot be carried across
    /// qubit-count overrides, so sweeps require the default chain.
    pub fn to_spec(&self, n_qubits: Option<usize>, alpha: Option<f64>) -> Result<FeatureMapSpec> {
        let n = n_qubits.unwrap_or(self.n_qubits);
        let alpha = alpha.unwrap_or(self.alpha);
        match &self.pairs {
            Some(pairs) if n == self.n_qubits => {
                FeatureMapSpec::with_pairs(n, self.depth, alpha, pairs.clone())
            }
            Some(_) => Err(Error::Input(
                "explicit entangling pairs cannot be combined with a qubit-count sweep; \
                 drop the pair list to use the linear chain"
                    .into(),
            )),
            None => FeatureMapSpec::new(n, self.depth, alpha),
        }
    }
}

/// Kernel evaluation knobs shared by every run type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelConfig {
    pub mode: KernelMode,
    /// Shots per kernel entry in sampled mode.
    pub shots: u64,
    /// Depolarizing mixing weight applied in sampled mode.
    pub noise_lambda: f64,
    /// Skip sampling on the train diagonal and pin it to 1.
    pub pin_diagonal: bool,
    /// Eigenvalue floor for the PSD repair of sampled train Grams.
    pub psd_floor: f64,
    /// Refuse statevectors beyond this many qubits.
    pub qubit_cap: usize,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            mode: KernelMode::Exact,
            shots: 4000,
            noise_lambda: 0.0,
            pin_diagonal: false,
            psd_floor: 0.0,
            qubit_cap: DEFAULT_QUBIT_CAP,
        }
    }
}

/// Shot-count / depolarizing-weight grid for the noise study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseGrid {
    pub shots_list: Vec<u64>,
    pub lambda_list: Vec<f64>,
}

impl Default for NoiseGrid {
    fn default() -> Self {
        NoiseGrid { shots_list: vec![1000, 4000], lambda_list: vec![0.0, 0.05] }
    }
}

fn default_alpha_sweep() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 10.0).collect()
}

fn default_qubit_sweep() -> Vec<usize> {
    vec![8, 12, 16, 20]
}

/// The full experiment description. Every field has a default, so `{}` is
/// a valid config file and partial files override selectively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub feature_map: FeatureMapConfig,
    pub kernel: KernelConfig,
    pub svm: SvmParams,
    /// Fraction of each class routed to the training half.
    pub split_fraction: f64,
    /// Cross-validation repetitions.
    pub split_count: usize,
    /// Optional cheaper split count for sweep points; `None` reuses
    /// `split_count`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_split_count: Option<usize>,
    pub master_seed: u64,
    /// Alpha grid for `sweep-alpha`.
    pub alpha_sweep: Vec<f64>,
    /// Qubit-count grid for `sweep-qubits`.
    pub qubit_sweep: Vec<usize>,
    /// (shots, lambda) grid for `noise-study`.
    pub noise: NoiseGrid,
    /// Runtime-only output directory; never part of the config snapshot.
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: DatasetSource::default(),
            feature_map: FeatureMapConfig::default(),
            kernel: KernelConfig::default(),
            svm: SvmParams::default(),
            split_fraction: 0.5,
            split_count: 100,
            sweep_split_count: None,
            master_seed: 42,
            alpha_sweep: default_alpha_sweep(),
            qubit_sweep: default_qubit_sweep(),
            noise: NoiseGrid::default(),
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    /// Read a config file; a missing `path` yields the defaults.
    pub fn load(path: Option<&Path>) -> Result<ExperimentConfig> {
        let Some(path) = path else {
            return Ok(ExperimentConfig::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Input(format!("config {}: {e}", path.display())))
    }

    /// Reject impossible settings before any expensive work.
    pub fn validate(&self) -> Result<()> {
        if !self.split_fraction.is_finite()
            || self.split_fraction <= 0.0
            || self.split_fraction >= 1.0
        {
            return Err(Error::Input(format!(
                "split fraction must lie strictly between 0 and 1, got {}",
                self.split_fraction
            )));
        }
        if self.split_count == 0 {
            return Err(Error::Input("split count must be at least 1".into()));
        }
        if self.sweep_split_count == Some(0) {
            return Err(Error::Input("sweep split count must be at least 1".into()));
        }
        self.feature_map.to_spec(None, None)?;
        if self.kernel.qubit_cap == 0 {
            return Err(Error::Input("qubit cap must be at least 1".into()));
        }
        if self.kernel.mode == KernelMode::Sampled && self.kernel.shots == 0 {
            return Err(Error::Input("sampled mode needs at least 1 shot".into()));
        }
        if !self.kernel.noise_lambda.is_finite()
            || !(0.0..=1.0).contains(&self.kernel.noise_lambda)
        {
            return Err(Error::Input(format!(
                "noise lambda must lie in [0, 1], got {}",
                self.kernel.noise_lambda
            )));
        }
        if !self.kernel.psd_floor.is_finite() || self.kernel.psd_floor < 0.0 {
            return Err(Error::Input(format!(
                "psd floor must be finite and >= 0, got {}",
                self.kernel.psd_floor
            )));
        }
        if !self.svm.c.is_finite() || self.svm.c <= 0.0 {
            return Err(Error::Input(format!("svm C must be finite and > 0, got {}", self.svm.c)));
        }
        if !self.svm.tol.is_finite() || self.svm.tol <= 0.0 {
            return Err(Error::Input(format!(
                "svm tolerance must be finite and > 0, got {}",
                self.svm.tol
            )));
        }
        if self.alpha_sweep.is_empty() {
            return Err(Error::Input("alpha sweep grid is empty".into()));
        }
        if let Some(&bad) = self.alpha_sweep.iter().find(|a| !a.is_finite() || **a < 0.0) {
            return Err(Error::Input(format!("alpha sweep value {bad} is not a valid alpha")));
        }
        if self.qubit_sweep.is_empty() {
            return Err(Error::Input("qubit sweep grid is empty".into()));
        }
        if self.qubit_sweep.contains(&0) {
            return Err(Error::Input("qubit sweep entries must be at least 1".into()));
        }
        if self.noise.shots_list.is_empty() || self.noise.lambda_list.is_empty() {
            return Err(Error::Input("noise grid must have shots and lambda entries".into()));
        }
        if self.noise.shots_list.contains(&0) {
            return Err(Error::Input("noise grid shot counts must be at least 1".into()));
        }
        if let Some(&bad) =
            self.noise.lambda_list.iter().find(|l| !l.is_finite() || !(0.0..=1.0).contains(*l))
        {
            return Err(Error::Input(format!("noise grid lambda {bad} is outside [0, 1]")));
        }
        Ok(())
    }

    /// Split count to use for sweep points.
    pub fn sweep_splits(&self) -> usize {
        self.sweep_split_count.unwrap_or(self.split_count)
    }
}
