//! The experiment pipeline: stratified cross-validation over the full
//! preprocess -> embed -> Gram -> SVM chain, plus alpha/qubit sweeps and
//! the shot-noise study, and the writers for their artifacts.
//!
//! Determinism contract: every random choice is keyed by
//! `(master_seed, structural index)` through counter-derived streams, and
//! splits run sequentially (parallelism lives inside the Gram and
//! statevector layers, which are schedule-independent). Re-running a
//! configuration therefore reproduces every artifact byte for byte at any
//! worker count. Wall-clock timing is kept out of the serialized records
//! for the same reason.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use qkernel::dataset::{self, Dataset};
use qkernel::featuremap::FeatureMapSpec;
use qkernel::gram::{self, GramMatrix, GramOptions, PreparedStates};
use qkernel::preprocess::{self, Normalizer, PcaModel};
use qkernel::rng;
use qkernel::simulator::KernelMode;
use qkernel::svm::{self, SvmParams};
use qkernel::{Error, Result};

use crate::config::{DatasetSource, ExperimentConfig, KernelConfig};

/// Version string embedded in every result record.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Stream-domain tag for the per-split shuffles.
const TAG_SPLIT_SHUFFLE: u64 = 0x5370_6C74_5348_4600;
/// Stream-domain tag for the per-split Gram sampling streams.
const TAG_GRAM_STREAM: u64 = 0x5370_6C74_4752_4D00;

/// Materialize the configured dataset source.
pub fn load_dataset(config: &ExperimentConfig) -> Result<Dataset> {
    match &config.dataset {
        DatasetSource::Generator(g) => dataset::generate(g),
        DatasetSource::Csv(src) => dataset::load_csv(&src.path),
    }
}

/// Split row indices into train/test halves, per class. Every class
/// contributes `floor(count * fraction)` rows (clamped so neither half is
/// empty) and needs at least 2 rows. Both halves come back sorted.
pub fn stratified_split(
    labels: &[u32],
    fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut by_class: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &label) in labels.iter().enumerate() {
        by_class.entry(label).or_default().push(i);
    }
    let mut shuffler = rng::SplitMix64::new(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (label, mut idx) in by_class {
        if idx.len() < 2 {
            return Err(Error::Input(format!(
                "class {label} has {} sample(s); stratified splitting needs at least 2 per class",
                idx.len()
            )));
        }
        shuffler.shuffle(&mut idx);
        let n_train = ((idx.len() as f64 * fraction).floor() as usize).clamp(1, idx.len() - 1);
        train.extend_from_slice(&idx[..n_train]);
        test.extend_from_slice(&idx[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

fn select_rows(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), m.ncols(), |r, c| m[(idx[r], c)])
}

/// FNV-1a digest of the canonical JSON of the fitted preprocessing
/// parameters. Recorded per split so leakage audits can refit from the
/// train rows alone and compare.
pub fn preproc_digest(pca: &PcaModel, norm: &Normalizer) -> String {
    let blob = serde_json::to_string(&(pca, norm)).expect("preprocessing params serialize");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in blob.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Everything about one split that does not depend on the kernel cell:
/// the index partition, labels, fitted-preprocessing digest, and the
/// prepared feature states (reused by the train and cross Grams, and by
/// every noise cell).
pub struct SplitContext {
    pub index: usize,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub y_train: Vec<u32>,
    pub y_test: Vec<u32>,
    pub states_train: PreparedStates,
    pub states_test: PreparedStates,
    pub preproc_digest: String,
    /// Root seed for this split's Gram sampling streams.
    pub gram_seed: u64,
}

/// Run the leakage-safe preprocessing chain for split `r`: stratified
/// split, PCA to `spec.n_qubits` dimensions fitted on the train half,
/// min-max normalization fitted on the train half, then state preparation
/// for both halves.
pub fn prepare_split(
    data: &Dataset,
    config: &ExperimentConfig,
    spec: &FeatureMapSpec,
    r: usize,
) -> Result<SplitContext> {
    let split_seed = rng::mix(&[config.master_seed, TAG_SPLIT_SHUFFLE, r as u64]);
    let (train_indices, test_indices) =
        stratified_split(&data.labels, config.split_fraction, split_seed)?;
    let x_train = select_rows(&data.features, &train_indices);
    let x_test = select_rows(&data.features, &test_indices);

    let pca = preprocess::pca_fit(&x_train, spec.n_qubits)?;
    let train_proj = preprocess::pca_transform(&pca, &x_train)?;
    let test_proj = preprocess::pca_transform(&pca, &x_test)?;
    let norm = preprocess::normalize_fit(&train_proj)?;
    let train_unit = preprocess::normalize_apply(&norm, &train_proj)?;
    let test_unit = preprocess::normalize_apply(&norm, &test_proj)?;

    let states_train = gram::prepare_states(spec, &train_unit, config.kernel.qubit_cap)?;
    let states_test = gram::prepare_states(spec, &test_unit, config.kernel.qubit_cap)?;

    let y_train = train_indices.iter().map(|&i| data.labels[i]).collect();
    let y_test = test_indices.iter().map(|&i| data.labels[i]).collect();
    Ok(SplitContext {
        index: r,
        train_indices,
        test_indices,
        y_train,
        y_test,
        states_train,
        states_test,
        preproc_digest: preproc_digest(&pca, &norm),
        gram_seed: rng::mix(&[config.master_seed, TAG_GRAM_STREAM, r as u64]),
    })
}

/// Outcome of one (split, kernel-setting) cell.
pub struct CellOutcome {
    pub accuracy: f64,
    pub kernel_evals_train: u64,
    pub kernel_evals_cross: u64,
    /// Train Gram as consumed by the SVM (PSD-repaired in sampled mode).
    pub gram_train: GramMatrix,
    pub gram_cross: GramMatrix,
}

/// Build both Grams from the cached states, repair if sampled, train, and
/// score.
pub fn run_cell(
    ctx: &SplitContext,
    kernel: &KernelConfig,
    svm_params: &SvmParams,
) -> Result<CellOutcome> {
    let opts = GramOptions {
        mode: kernel.mode,
        shots: kernel.shots,
        master_seed: ctx.gram_seed,
        noise_lambda: kernel.noise_lambda,
        pin_diagonal: kernel.pin_diagonal,
        qubit_cap: kernel.qubit_cap,
    };
    let mut gram_train = gram::train_from_states(&ctx.states_train, &opts)?;
    let gram_cross = gram::cross_from_states(&ctx.states_test, &ctx.states_train, &opts)?;
    let kernel_evals_train = gram_train.meta.kernel_evals;
    let kernel_evals_cross = gram_cross.meta.kernel_evals;
    if kernel.mode == KernelMode::Sampled {
        gram_train = gram::regularize_psd(&gram_train, kernel.psd_floor)?;
    }
    let model = svm::train(&gram_train, &ctx.y_train, svm_params)?;
    let predicted = svm::predict(&model, &gram_cross)?;
    let accuracy = svm::accuracy(&predicted, &ctx.y_test)?;
    Ok(CellOutcome { accuracy, kernel_evals_train, kernel_evals_cross, gram_train, gram_cross })
}

/// Five-number summary plus the mean, quartiles by linear interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * p;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Summarize a non-empty value list.
pub fn summarize(values: &[f64]) -> SummaryStats {
    assert!(!values.is_empty(), "cannot summarize an empty list");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("accuracies are finite"));
    SummaryStats {
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        min: sorted[0],
        q1: quantile(&sorted, 0.25),
        median: quantile(&sorted, 0.5),
        q3: quantile(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    }
}

/// Per-split audit trail inside a [`ResultRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub index: usize,
    pub train_indices: Vec<usize>,
    pub accuracy: f64,
    pub preproc_digest: String,
    pub kernel_evals_train: u64,
    pub kernel_evals_cross: u64,
}

/// One experiment result: the effective config snapshot, the raw per-split
/// accuracies, their summary, and per-split audit records. Timing is
/// advisory and never serialized, keeping result files byte-deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub code_version: String,
    pub config: ExperimentConfig,
    pub accuracies: Vec<f64>,
    pub summary: SummaryStats,
    pub splits: Vec<SplitRecord>,
    /// Noise study only: mean |sampled - exact| over the cross-Gram
    /// entries, averaged over splits.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_kernel_deviation: Option<f64>,
    #[serde(skip)]
    pub timing_seconds: f64,
}

/// Run `n_splits` rounds of stratified cross-validation. When `gram_dir`
/// is set, every split's train and cross Grams are saved there as CSV (+
/// metadata sidecars). Any stage error is tagged with its split index.
pub fn run_crossval(
    data: &Dataset,
    config: &ExperimentConfig,
    n_splits: usize,
    gram_dir: Option<&Path>,
) -> Result<ResultRecord> {
    let started = Instant::now();
    config.validate()?;
    let spec = config.feature_map.to_spec(None, None)?;
    let mut accuracies = Vec::with_capacity(n_splits);
    let mut splits = Vec::with_capacity(n_splits);
    for r in 0..n_splits {
        let tag = |e: Error| e.context(&format!("split {r}"));
        let ctx = prepare_split(data, config, &spec, r).map_err(tag)?;
        let cell = run_cell(&ctx, &config.kernel, &config.svm).map_err(tag)?;
        if let Some(dir) = gram_dir {
            gram::save_csv(&cell.gram_train, &dir.join(format!("split_{r:03}_train.csv")))
                .map_err(tag)?;
            gram::save_csv(&cell.gram_cross, &dir.join(format!("split_{r:03}_cross.csv")))
                .map_err(tag)?;
        }
        accuracies.push(cell.accuracy);
        splits.push(SplitRecord {
            index: r,
            train_indices: ctx.train_indices,
            accuracy: cell.accuracy,
            preproc_digest: ctx.preproc_digest,
            kernel_evals_train: cell.kernel_evals_train,
            kernel_evals_cross: cell.kernel_evals_cross,
        });
    }
    Ok(ResultRecord {
        code_version: CODE_VERSION.to_string(),
        config: config.clone(),
        summary: summarize(&accuracies),
        accuracies,
        splits,
        mean_kernel_deviation: None,
        timing_seconds: started.elapsed().as_secs_f64(),
    })
}

/// One cross-validation per alpha grid point (at `sweep_splits()` rounds),
/// with the effective alpha recorded in each snapshot.
pub fn run_alpha_sweep(data: &Dataset, config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let mut records = Vec::with_capacity(config.alpha_sweep.len());
    for &alpha in &config.alpha_sweep {
        let mut cfg = config.clone();
        cfg.feature_map.alpha = alpha;
        let record = run_crossval(data, &cfg, config.sweep_splits(), None)
            .map_err(|e| e.context(&format!("alpha {alpha}")))?;
        records.push(record);
    }
    Ok(records)
}

/// One cross-validation per qubit count. Split seeds depend only on
/// `(master_seed, split index)`, so all sweep points see identical index
/// partitions — the comparison across register sizes is paired.
pub fn run_qubit_sweep(data: &Dataset, config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    if config.feature_map.pairs.is_some() {
        return Err(Error::Input(
            "the qubit sweep requires the default linear entangling chain; \
             drop the explicit pair list"
                .into(),
        ));
    }
    for &q in &config.qubit_sweep {
        if q > config.kernel.qubit_cap {
            return Err(Error::Resource(format!(
                "qubit sweep entry {q} exceeds the cap of {} qubits",
                config.kernel.qubit_cap
            )));
        }
    }
    let mut records = Vec::with_capacity(config.qubit_sweep.len());
    for &q in &config.qubit_sweep {
        let mut cfg = config.clone();
        cfg.feature_map.n_qubits = q;
        let record = run_crossval(data, &cfg, config.sweep_splits(), None)
            .map_err(|e| e.context(&format!("{q} qubits")))?;
        records.push(record);
    }
    Ok(records)
}

/// Mean absolute entrywise difference between two cross Grams.
fn mean_abs_cross_deviation(noisy: &GramMatrix, exact: &GramMatrix) -> f64 {
    let total: f64 = noisy
        .values
        .iter()
        .zip(exact.values.iter())
        .map(|(a, b)| (a - b).abs())
        .sum();
    total / noisy.values.len() as f64
}

/// Sweep the sampled-kernel (shots, lambda) grid, scoring every cell on the
/// same splits and reporting each cell's mean deviation of the raw sampled
/// cross-kernel values from their exact noiseless counterparts. States are
/// prepared once per split and shared across all cells.
pub fn run_noise_study(data: &Dataset, config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let started = Instant::now();
    config.validate()?;
    let spec = config.feature_map.to_spec(None, None)?;
    let n_splits = config.sweep_splits();
    let cells: Vec<(u64, f64)> = config
        .noise
        .shots_list
        .iter()
        .flat_map(|&s| config.noise.lambda_list.iter().map(move |&l| (s, l)))
        .collect();

    let mut accuracies = vec![Vec::with_capacity(n_splits); cells.len()];
    let mut deviations = vec![Vec::with_capacity(n_splits); cells.len()];
    let mut split_records = vec![Vec::with_capacity(n_splits); cells.len()];
    for r in 0..n_splits {
        let tag = |e: Error| e.context(&format!("split {r}"));
        let ctx = prepare_split(data, config, &spec, r).map_err(tag)?;
        let exact_kernel =
            KernelConfig { mode: KernelMode::Exact, noise_lambda: 0.0, ..config.kernel.clone() };
        let exact = run_cell(&ctx, &exact_kernel, &config.svm).map_err(tag)?;
        for (ci, &(shots, lambda)) in cells.iter().enumerate() {
            let cell_kernel = KernelConfig {
                mode: KernelMode::Sampled,
                shots,
                noise_lambda: lambda,
                ..config.kernel.clone()
            };
            let out = run_cell(&ctx, &cell_kernel, &config.svm).map_err(|e| {
                e.context(&format!("split {r}, shots {shots}, lambda {lambda}"))
            })?;
            accuracies[ci].push(out.accuracy);
            deviations[ci].push(mean_abs_cross_deviation(&out.gram_cross, &exact.gram_cross));
            split_records[ci].push(SplitRecord {
                index: r,
                train_indices: ctx.train_indices.clone(),
                accuracy: out.accuracy,
                preproc_digest: ctx.preproc_digest.clone(),
                kernel_evals_train: out.kernel_evals_train,
                kernel_evals_cross: out.kernel_evals_cross,
            });
        }
    }

    let elapsed = started.elapsed().as_secs_f64();
    Ok(cells
        .iter()
        .enumerate()
        .map(|(ci, &(shots, lambda))| {
            let mut cfg = config.clone();
            cfg.kernel.mode = KernelMode::Sampled;
            cfg.kernel.shots = shots;
            cfg.kernel.noise_lambda = lambda;
            ResultRecord {
                code_version: CODE_VERSION.to_string(),
                config: cfg,
                summary: summarize(&accuracies[ci]),
                accuracies: accuracies[ci].clone(),
                splits: split_records[ci].clone(),
                mean_kernel_deviation: Some(
                    deviations[ci].iter().sum::<f64>() / deviations[ci].len() as f64,
                ),
                timing_seconds: elapsed,
            }
        })
        .collect())
}

fn write_text(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents)
        .map_err(|e| Error::Data(format!("cannot write {}: {e}", path.display())))
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Data(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_text(path, &text)
}

/// `split,accuracy` rows, one per cross-validation round.
pub fn write_accuracies_csv(path: &Path, accuracies: &[f64]) -> Result<()> {
    let mut out = String::from("split,accuracy\n");
    for (i, a) in accuracies.iter().enumerate() {
        out.push_str(&format!("{i},{a}\n"));
    }
    write_text(path, &out)
}

/// `alpha,mean_accuracy,q1,q3` rows, one per sweep point.
pub fn write_alpha_sweep_csv(path: &Path, records: &[ResultRecord]) -> Result<()> {
    let mut out = String::from("alpha,mean_accuracy,q1,q3\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.config.feature_map.alpha, r.summary.mean, r.summary.q1, r.summary.q3
        ));
    }
    write_text(path, &out)
}

/// `n_qubits,mean_accuracy,q1,q3` rows, one per sweep point.
pub fn write_qubit_sweep_csv(path: &Path, records: &[ResultRecord]) -> Result<()> {
    let mut out = String::from("n_qubits,mean_accuracy,q1,q3\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.config.feature_map.n_qubits, r.summary.mean, r.summary.q1, r.summary.q3
        ));
    }
    write_text(path, &out)
}

/// `shots,lambda,mean_accuracy,mean_kernel_deviation` rows, one per cell.
pub fn write_noise_csv(path: &Path, records: &[ResultRecord]) -> Result<()> {
    let mut out = String::from("shots,lambda,mean_accuracy,mean_kernel_deviation\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.config.kernel.shots,
            r.config.kernel.noise_lambda,
            r.summary.mean,
            r.mean_kernel_deviation.expect("noise records carry a deviation")
        ));
    }
    write_text(path, &out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qkernel::dataset::GeneratorConfig;
    use crate::config::NoiseGrid;

    /// 4 well-separated classes, 2 rows each, no noise: rank-3 centered
    /// data, so PCA to 3 dimensions is lossless and the pipeline should be
    /// perfect.
    fn tiny_noiseless_config() -> ExperimentConfig {
        ExperimentConfig {
            dataset: DatasetSource::Generator(GeneratorConfig {
                n_patterns: 8,
                n_features: 40,
                n_classes: 4,
                signature_size: 6,
                signature_flip_prob: 0.0,
                background_noise_prob: 0.0,
                seed: 5,
            }),
            feature_map: crate::config::FeatureMapConfig {
                n_qubits: 3,
                depth: 2,
                alpha: 1.0,
                pairs: None,
            },
            split_count: 4,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn stratified_split_balances_classes() {
        let labels: Vec<u32> = (0..56).map(|i| (i % 7) as u32 + 1).collect();
        let (train, test) = stratified_split(&labels, 0.5, 99).unwrap();
        assert_eq!(train.len(), 28);
        assert_eq!(test.len(), 28);
        for class in 1..=7u32 {
            let in_train = train.iter().filter(|&&i| labels[i] == class).count();
            assert_eq!(in_train, 4, "class {class} gets 4 train rows");
        }
        // The two halves partition the index range.
        let mut all: Vec<usize> = train.iter().chain(test.iter()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..56).collect::<Vec<_>>());
    }

    #[test]
    fn stratified_split_is_seeded_and_guards_small_classes() {
        let labels: Vec<u32> = (0..20).map(|i| (i % 2) as u32 + 1).collect();
        let a = stratified_split(&labels, 0.5, 1).unwrap();
        let b = stratified_split(&labels, 0.5, 1).unwrap();
        let c = stratified_split(&labels, 0.5, 2).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c, "different seeds shuffle differently");
        // A class with a single sample cannot be split.
        assert!(stratified_split(&[1, 1, 2], 0.5, 0).is_err());
        // Tiny classes still land one row on each side.
        let (train, test) = stratified_split(&[1, 1, 2, 2], 0.9, 0).unwrap();
        assert_eq!(train.len(), 2);
        assert_eq!(test.len(), 2);
    }

    #[test]
    fn quantiles_interpolate_linearly() {
        let s = summarize(&[4.0, 1.0, 3.0, 2.0]);
        assert_eq!(s.min, 1.0);
        assert_eq!(s.q1, 1.75);
        assert_eq!(s.median, 2.5);
        assert_eq!(s.q3, 3.25);
        assert_eq!(s.max, 4.0);
        assert_eq!(s.mean, 2.5);
        let single = summarize(&[0.7]);
        assert_eq!(single.q1, 0.7);
        assert_eq!(single.median, 0.7);
        assert_eq!(single.q3, 0.7);
    }

    #[test]
    fn noiseless_pipeline_is_perfect_and_counts_evals() {
        let config = tiny_noiseless_config();
        let data = load_dataset(&config).unwrap();
        let record = run_crossval(&data, &config, config.split_count, None).unwrap();
        assert_eq!(record.accuracies.len(), 4);
        assert!(record.accuracies.iter().all(|&a| a == 1.0), "{:?}", record.accuracies);
        assert_eq!(record.summary.mean, 1.0);
        for split in &record.splits {
            // 4 train rows (1 per class): 6 exact pairs; 4x4 cross block.
            assert_eq!(split.kernel_evals_train, 6);
            assert_eq!(split.kernel_evals_cross, 16);
            assert_eq!(split.train_indices.len(), 4);
        }
        assert_eq!(record.code_version, CODE_VERSION);
    }

    #[test]
    fn crossval_records_are_reproducible() {
        let config = tiny_noiseless_config();
        let data = load_dataset(&config).unwrap();
        let a = run_crossval(&data, &config, 3, None).unwrap();
        let b = run_crossval(&data, &config, 3, None).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap(),
            "byte-identical records on identical configs"
        );
    }

    #[test]
    fn preproc_digest_is_refittable_from_train_rows_alone() {
        let config = tiny_noiseless_config();
        let data = load_dataset(&config).unwrap();
        let record = run_crossval(&data, &config, 2, None).unwrap();
        for split in &record.splits {
            let x_train = select_rows(&data.features, &split.train_indices);
            let pca = preprocess::pca_fit(&x_train, config.feature_map.n_qubits).unwrap();
            let proj = preprocess::pca_transform(&pca, &x_train).unwrap();
            let norm = preprocess::normalize_fit(&proj).unwrap();
            assert_eq!(
                preproc_digest(&pca, &norm),
                split.preproc_digest,
                "split {} preprocessing must derive from its train rows",
                split.index
            );
        }
    }

    #[test]
    fn alpha_sweep_tags_each_record_with_its_alpha() {
        let mut config = tiny_noiseless_config();
        config.alpha_sweep = vec![0.0, 1.0];
        config.sweep_split_count = Some(2);
        let data = load_dataset(&config).unwrap();
        let records = run_alpha_sweep(&data, &config).unwrap();
        assert_eq!(records.len(), 2);
        assert_eq!(records[0].config.feature_map.alpha, 0.0);
        assert_eq!(records[1].config.feature_map.alpha, 1.0);
        assert_eq!(records[0].accuracies.len(), 2);
    }

    #[test]
    fn qubit_sweep_pairs_splits_and_enforces_the_cap() {
        let mut config = tiny_noiseless_config();
        config.qubit_sweep = vec![2, 3];
        config.sweep_split_count = Some(2);
        let data = load_dataset(&config).unwrap();
        let records = run_qubit_sweep(&data, &config).unwrap();
        assert_eq!(records.len(), 2);
        for (a, b) in records[0].splits.iter().zip(records[1].splits.iter()) {
            assert_eq!(a.train_indices, b.train_indices, "identical split seeds across counts");
        }
        config.qubit_sweep = vec![2, 400];
        let err = run_qubit_sweep(&data, &config).unwrap_err();
        assert!(matches!(err, Error::Resource(_)), "{err}");
        assert!(err.to_string().contains("cap"), "{err}");
    }

    #[test]
    fn noise_study_reports_deviations_per_cell() {
        let mut config = tiny_noiseless_config();
        config.noise = NoiseGrid { shots_list: vec![400], lambda_list: vec![0.0, 1.0] };
        config.sweep_split_count = Some(2);
        let data = load_dataset(&config).unwrap();
        let records = run_noise_study(&data, &config).unwrap();
        assert_eq!(records.len(), 2);
        let clean = &records[0];
        let mixed = &records[1];
        assert_eq!(clean.config.kernel.noise_lambda, 0.0);
        assert_eq!(mixed.config.kernel.noise_lambda, 1.0);
        assert_eq!(clean.config.kernel.mode, KernelMode::Sampled);
        let d0 = clean.mean_kernel_deviation.unwrap();
        let d1 = mixed.mean_kernel_deviation.unwrap();
        assert!(d0 < d1, "full depolarization must deviate more: {d0} vs {d1}");
        assert!(d0 < 0.1, "sampling-only deviation stays small, got {d0}");
    }

    #[test]
    fn split_errors_carry_their_index() {
        let mut config = tiny_noiseless_config();
        // More target dimensions than train rows: PCA must refuse.
        config.feature_map.n_qubits = 6;
        let data = load_dataset(&config).unwrap();
        let err = run_crossval(&data, &config, 1, None).unwrap_err();
        assert!(err.to_string().contains("split 0"), "{err}");
    }

    #[test]
    fn csv_writers_format_header_and_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("acc.csv");
        write_accuracies_csv(&path, &[1.0, 0.5]).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "split,accuracy\n0,1\n1,0.5\n");
    }
}
