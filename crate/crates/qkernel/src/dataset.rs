//! Synthetic diagnostic-trace generator and CSV persistence.
//!
//! Each pattern is a row of binary command indicators. Every class owns a
//! disjoint signature: a fixed set of feature positions that fire with high
//! probability for members of that class, while all other positions fire
//! only at a low background rate. Signatures are carved from a shuffled
//! pool of feature indices so no two classes share a position (the pool is
//! reshuffled if it runs out). Generation is fully determined by the seed.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::{self, SplitMix64};

/// Stream-domain tag for pattern-entry draws.
const TAG_PATTERN_ENTRY: u64 = 0x4461_7461_454E_5400;
/// Stream-domain tag for the signature-pool shuffles.
const TAG_SIGNATURE_POOL: u64 = 0x4461_7461_5349_4700;

/// Knobs for the synthetic generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    /// Number of rows to emit.
    pub n_patterns: usize,
    /// Number of binary command indicators per row.
    pub n_features: usize,
    /// Number of fault classes; labels are 1-based class ids.
    pub n_classes: usize,
    /// Signature positions owned by each class.
    pub signature_size: usize,
    /// Probability that a signature position reads 0 instead of 1.
    pub signature_flip_prob: f64,
    /// Probability that a non-signature position reads 1.
    pub background_noise_prob: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_patterns: 56,
            n_features: 120,
            n_classes: 7,
            signature_size: 12,
            signature_flip_prob: 0.15,
            background_noise_prob: 0.02,
            seed: 42,
        }
    }
}

impl GeneratorConfig {
    fn validate(&self) -> Result<()> {
        if self.n_patterns == 0 || self.n_features == 0 || self.n_classes == 0 {
            return Err(Error::Input(
                "pattern, feature, and class counts must all be positive".into(),
            ));
        }
        if self.signature_size == 0 || self.signature_size > self.n_features {
            return Err(Error::Input(format!(
                "signature size {} must lie in 1..={}",
                self.signature_size, self.n_features
            )));
        }
        for (name, p) in [
            ("signature_flip_prob", self.signature_flip_prob),
            ("background_noise_prob", self.background_noise_prob),
        ] {
            if !p.is_finite() || !(0.0..=1.0).contains(&p) {
                return Err(Error::Input(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }
}

/// A labeled binary dataset: one pattern per row, 1-based class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: DMatrix<f64>,
    pub labels: Vec<u32>,
    /// Human-readable name per class, indexed by `label - 1`.
    pub class_names: Vec<String>,
}

/// Default fault-class names; classes beyond the built-in list fall back to
/// a numbered name.
pub fn default_class_names(n_classes: usize) -> Vec<String> {
    const NAMED: [&str; 7] = [
        "cooling valve stuck",
        "sensor bus parity fault",
        "actuator drive overcurrent",
        "telemetry encoder desync",
        "power rail sag",
        "thermostat feedback loop",
        "watchdog reset storm",
    ];
    (0..n_classes)
        .map(|c| {
            NAMED
                .get(c)
                .map(|s| s.to_string())
                .unwrap_or_else(|| format!("fault type {}", c + 1))
        })
        .collect()
}

/// Draw the per-class signature index sets. Indices come from a shuffled
/// pool so signatures are disjoint; when the pool is exhausted the remaining
/// classes draw from a freshly reshuffled pool.
fn draw_signatures(config: &GeneratorConfig, rng: &mut SplitMix64) -> Vec<Vec<usize>> {
    let mut pool: Vec<usize> = Vec::new();
    let mut signatures = Vec::with_capacity(config.n_classes);
    for _ in 0..config.n_classes {
        if pool.len() < config.signature_size {
            pool = (0..config.n_features).collect();
            rng.shuffle(&mut pool);
        }
        signatures.push(pool.split_off(pool.len() - config.signature_size));
    }
    signatures
}

/// Generate a dataset. Classes are assigned round-robin, so class counts
/// differ by at most one. Every feature entry has its own counter-derived
/// stream, keyed by (row, column), making the output independent of
/// evaluation order.
pub fn generate(config: &GeneratorConfig) -> Result<Dataset> {
    config.validate()?;
    let mut pool_rng =
        SplitMix64::new(rng::mix(&[config.seed, TAG_SIGNATURE_POOL]));
    let signatures = draw_signatures(config, &mut pool_rng);

    let mut is_signature = vec![vec![false; config.n_features]; config.n_classes];
    for (c, sig) in signatures.iter().enumerate() {
        for &f in sig {
            is_signature[c][f] = true;
        }
    }

    let signature_threshold = rng::bernoulli_threshold(1.0 - config.signature_flip_prob);
    let background_threshold = rng::bernoulli_threshold(config.background_noise_prob);
    let labels: Vec<u32> =
        (0..config.n_patterns).map(|i| (i % config.n_classes) as u32 + 1).collect();
    let features = DMatrix::from_fn(config.n_patterns, config.n_features, |i, j| {
        let class = (labels[i] - 1) as usize;
        let threshold = if is_signature[class][j] {
            signature_threshold
        } else {
            background_threshold
        };
        let mut entry_rng =
            SplitMix64::new(rng::mix(&[config.seed, TAG_PATTERN_ENTRY, i as u64, j as u64]));
        if entry_rng.bernoulli_raw(threshold) {
            1.0
        } else {
            0.0
        }
    });

    Ok(Dataset { features, labels, class_names: default_class_names(config.n_classes) })
}

/// Write a dataset as CSV with a `label,cmd_000,cmd_001,...` header.
pub fn save_csv(dataset: &Dataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str("label");
    for j in 0..dataset.features.ncols() {
        out.push_str(&format!(",cmd_{j:03}"));
    }
    out.push('\n');
    for i in 0..dataset.features.nrows() {
        out.push_str(&dataset.labels[i].to_string());
        for j in 0..dataset.features.ncols() {
            // Entries are exactly 0.0 or 1.0; write them as integers.
            out.push(',');
            out.push(if dataset.features[(i, j)] == 0.0 { '0' } else { '1' });
        }
        out.push('\n');
    }
    let mut file = fs::File::create(path)
        .map_err(|e| Error::Data(format!("cannot create {}: {e}", path.display())))?;
    file.write_all(out.as_bytes())
        .map_err(|e| Error::Data(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Read a dataset written by [`save_csv`]. Errors carry 1-based line
/// numbers. Class names are regenerated from the label range since the CSV
/// does not store them.
pub fn load_csv(path: &Path) -> Result<Dataset> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Data(format!("{}: file is empty", path.display())))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.first() != Some(&"label") || columns.len() < 2 {
        return Err(Error::Data(format!(
            "{}: line 1: expected a 'label,cmd_...' header",
            path.display()
        )));
    }
    let n_features = columns.len() - 1;

    let mut labels = Vec::new();
    let mut values = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(Error::Data(format!(
                "{}: line {line_no}: expected {} fields, found {}",
                path.display(),
                columns.len(),
                fields.len()
            )));
        }
        let label: u32 = fields[0].parse().map_err(|_| {
            Error::Data(format!(
                "{}: line {line_no}: bad label {:?}",
                path.display(),
                fields[0]
            ))
        })?;
        if label == 0 {
            return Err(Error::Data(format!(
                "{}: line {line_no}: labels are 1-based, found 0",
                path.display()
            )));
        }
        labels.push(label);
        for (col, field) in fields[1..].iter().enumerate() {
            match *field {
                "0" => values.push(0.0),
                "1" => values.push(1.0),
                other => {
                    return Err(Error::Data(format!(
                        "{}: line {line_no}: column {}: expected 0 or 1, found {other:?}",
                        path.display(),
                        col + 1
                    )))
                }
            }
        }
    }
    if labels.is_empty() {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }
    let n_classes = *labels.iter().max().expect("non-empty") as usize;
    Ok(Dataset {
        features: DMatrix::from_row_slice(labels.len(), n_features, &values),
        labels,
        class_names: default_class_names(n_classes),
    })
}
