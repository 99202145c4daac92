//! Gram-matrix assembly, PSD repair, and serialization.
//!
//! Builders prepare one state per data row (cached, reusable across the
//! train and cross matrices via [`prepare_states`]) and then evaluate
//! fidelities pairwise. Train matrices exploit symmetry: one evaluation per
//! unordered pair, mirrored, with the diagonal set to exactly 1 in exact
//! mode. In sampled mode every entry is a Binomial(shots, p) draw from a
//! stream keyed by `mix(master_seed, tag, i, j)` — one draw per unordered
//! pair — so results are independent of evaluation order and thread count.
//! Depolarizing noise (`noise_lambda`) mixes the exact probability toward
//! `2^-n` *before* the draw, emulating shots taken on a noisy state.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featuremap::FeatureMapSpec;
use crate::parallel;
use crate::rng;
use crate::simulator::{
    apply_depolarizing, prepare_feature_state_capped, KernelMode, KernelValue, StateVector,
    DEFAULT_QUBIT_CAP,
};

/// Domain tags for per-entry stream derivation (train vs cross matrices
/// must not share streams at equal indices).
const TAG_TRAIN_ENTRY: u64 = 0x6752_616D_5452_4E00;
const TAG_CROSS_ENTRY: u64 = 0x6752_616D_5852_5300;

/// Which matrix a Gram holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GramKind {
    /// Square, symmetric: training rows against themselves.
    Train,
    /// Rectangular: test rows (rows) against training rows (columns).
    Cross,
}

/// Provenance carried alongside the values and embedded in the JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramMeta {
    /// Feature-map snapshot; `None` for classical kernels (RBF baseline).
    pub spec: Option<FeatureMapSpec>,
    /// Shots per entry; 0 in exact mode.
    pub shots: u64,
    /// Master seed the per-entry streams were derived from; 0 in exact mode.
    pub master_seed: u64,
    /// Depolarizing mix applied before sampling (0 = noiseless).
    pub noise_lambda: f64,
    /// Kernel evaluations actually performed (symmetry savings excluded).
    pub kernel_evals: u64,
    /// Smallest eigenvalue after PSD repair; `None` if never repaired.
    pub min_eigenvalue: Option<f64>,
    /// Whether a sampled train diagonal was pinned to exact 1.
    pub pinned_diagonal: bool,
}

/// A kernel matrix with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub values: DMatrix<f64>,
    pub kind: GramKind,
    pub mode: KernelMode,
    pub meta: GramMeta,
}

impl GramMatrix {
    /// Wrap precomputed values, validating structural invariants:
    /// non-empty, finite entries, and (for train kind) square + symmetric
    /// within 1e-9. Value range is *not* constrained here — PSD repair can
    /// legitimately push entries slightly outside [0, 1].
    pub fn from_values(
        values: DMatrix<f64>,
        kind: GramKind,
        mode: KernelMode,
        meta: GramMeta,
    ) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::Input("gram matrix must be non-empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("gram matrix entries must be finite".into()));
        }
        if kind == GramKind::Train {
            if values.nrows() != values.ncols() {
                return Err(Error::Input(format!(
                    "train gram must be square, got {}x{}",
                    values.nrows(),
                    values.ncols()
                )));
            }
            for i in 0..values.nrows() {
                for j in (i + 1)..values.ncols() {
                    if (values[(i, j)] - values[(j, i)]).abs() > 1e-9 {
                        return Err(Error::Input(format!(
                            "train gram asymmetric at ({i}, {j})"
                        )));
                    }
                }
            }
        }
        Ok(GramMatrix { values, kind, mode, meta })
    }

    #[must_use]
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    #[must_use]
    pub fn cols(&self) -> usize {
        self.values.ncols()
    }
}

/// Knobs for the Gram builders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramOptions {
    pub mode: KernelMode,
    /// Shots per entry (sampled mode only; must be >= 1 there).
    pub shots: u64,
    /// Master seed for per-entry stream derivation (sampled mode).
    pub master_seed: u64,
    /// Depolarizing mix in [0, 1]; requires sampled mode when > 0.
    pub noise_lambda: f64,
    /// Pin the sampled train diagonal to exact 1 instead of sampling it.
    pub pin_diagonal: bool,
    /// Statevector guard forwarded to state preparation.
    pub qubit_cap: usize,
}

impl Default for GramOptions {
    fn default() -> Self {
        GramOptions {
            mode: KernelMode::Exact,
            shots: 4000,
            master_seed: 0,
            noise_lambda: 0.0,
            pin_diagonal: false,
            qubit_cap: DEFAULT_QUBIT_CAP,
        }
    }
}

impl GramOptions {
    fn validate(&self) -> Result<()> {
        if self.mode == KernelMode::Sampled && self.shots == 0 {
            return Err(Error::Input("sampled mode requires shots >= 1".into()));
        }
        if !self.noise_lambda.is_finite() || !(0.0..=1.0).contains(&self.noise_lambda) {
            return Err(Error::Input(format!(
                "noise_lambda must lie in [0, 1], got {}",
                self.noise_lambda
            )));
        }
        if self.noise_lambda > 0.0 && self.mode == KernelMode::Exact {
            return Err(Error::Input(
                "depolarizing noise requires sampled mode (exact mode keeps the \
                 unit diagonal invariant)"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Feature states prepared once per data row, reusable across builders.
pub struct PreparedStates {
    spec: FeatureMapSpec,
    states: Vec<StateVector>,
}

impl PreparedStates {
    #[must_use]
    pub fn len(&self) -> usize {
        self.states.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    #[must_use]
    pub fn spec(&self) -> &FeatureMapSpec {
        &self.spec
    }
}

/// Prepare the feature state of every row of `x` (rows are data points,
/// columns are features; column count must equal `spec.n_qubits`).
pub fn prepare_states(
    spec: &FeatureMapSpec,
    x: &DMatrix<f64>,
    qubit_cap: usize,
) -> Result<PreparedStates> {
    if x.nrows() == 0 {
        return Err(Error::Input("cannot prepare states for an empty matrix".into()));
    }
    if x.ncols() != spec.n_qubits {
        return Err(Error::Input(format!(
            "data has {} columns but the map needs {}",
            x.ncols(),
            spec.n_qubits
        )));
    }
    let rows: Vec<Vec<f64>> = (0..x.nrows())
        .map(|i| x.row(i).iter().copied().collect())
        .collect();
    let prepared = parallel::map_indexed(rows.len(), |i| {
        prepare_feature_state_capped(spec, &rows[i], qubit_cap)
    });
    let mut states = Vec::with_capacity(prepared.len());
    for s in prepared {
        states.push(s?);
    }
    Ok(PreparedStates { spec: spec.clone(), states })
}

/// Exact pair probabilities for one row set: unit diagonal, one fidelity per
/// unordered pair, mirrored. Returns the matrix and the evaluation count.
fn exact_train_probabilities(prep: &PreparedStates) -> (DMatrix<f64>, u64) {
    let l = prep.states.len();
    let pairs: Vec<(usize, usize)> = (0..l)
        .flat_map(|i| ((i + 1)..l).map(move |j| (i, j)))
        .collect();
    let fid = parallel::map_indexed(pairs.len(), |k| {
        let (i, j) = pairs[k];
        prep.states[i].fidelity_with(&prep.states[j])
    });
    let mut p = DMatrix::from_element(l, l, 1.0);
    for (k, &(i, j)) in pairs.iter().enumerate() {
        p[(i, j)] = fid[k];
        p[(j, i)] = fid[k];
    }
    (p, pairs.len() as u64)
}

/// Exact probabilities of every (test row, train row) pair.
fn exact_cross_probabilities(
    test: &PreparedStates,
    train: &PreparedStates,
) -> Result<(DMatrix<f64>, u64)> {
    if test.spec != train.spec {
        return Err(Error::Input(
            "cross gram requires both row sets prepared under the same feature map".into(),
        ));
    }
    let (t, l) = (test.states.len(), train.states.len());
    let flat = parallel::map_indexed(t * l, |k| {
        let (i, j) = (k / l, k % l);
        test.states[i].fidelity_with(&train.states[j])
    });
    let p = DMatrix::from_fn(t, l, |i, j| flat[i * l + j]);
    Ok((p, (t * l) as u64))
}

fn depolarize(p: f64, lambda: f64, n_qubits: usize) -> f64 {
    if lambda == 0.0 {
        p
    } else {
        apply_depolarizing(
            KernelValue { value: p, mode: KernelMode::Exact, shots: 0 },
            lambda,
            n_qubits,
        )
        .value
    }
}

fn meta_for(spec: &FeatureMapSpec, opts: &GramOptions, kernel_evals: u64) -> GramMeta {
    let sampled = opts.mode == KernelMode::Sampled;
    GramMeta {
        spec: Some(spec.clone()),
        shots: if sampled { opts.shots } else { 0 },
        master_seed: if sampled { opts.master_seed } else { 0 },
        noise_lambda: opts.noise_lambda,
        kernel_evals,
        min_eigenvalue: None,
        pinned_diagonal: sampled && opts.pin_diagonal,
    }
}

/// Build the symmetric train Gram of `x` (rows = data points).
pub fn build_gram_train(
    spec: &FeatureMapSpec,
    x: &DMatrix<f64>,
    opts: &GramOptions,
) -> Result<GramMatrix> {
    opts.validate()?;
    let prep = prepare_states(spec, x, opts.qubit_cap)?;
    train_from_states(&prep, opts)
}

/// Train Gram from already-prepared states (lets the caller share one
/// preparation pass between the train and cross matrices).
pub fn train_from_states(prep: &PreparedStates, opts: &GramOptions) -> Result<GramMatrix> {
    opts.validate()?;
    let spec = &prep.spec;
    let (p, pair_evals) = exact_train_probabilities(prep);
    let l = p.nrows();
    match opts.mode {
        KernelMode::Exact => {
            let meta = meta_for(spec, opts, pair_evals);
            GramMatrix::from_values(p, GramKind::Train, KernelMode::Exact, meta)
        }
        KernelMode::Sampled => {
            let sample_diagonal = !opts.pin_diagonal;
            let entries: Vec<(usize, usize)> = (0..l)
                .flat_map(|i| {
                    let start = if sample_diagonal { i } else { i + 1 };
                    (start..l).map(move |j| (i, j))
                })
                .collect();
            let drawn = parallel::map_indexed(entries.len(), |k| {
                let (i, j) = entries[k];
                let noisy = depolarize(p[(i, j)], opts.noise_lambda, spec.n_qubits);
                let seed =
                    rng::mix(&[opts.master_seed, TAG_TRAIN_ENTRY, i as u64, j as u64]);
                rng::binomial(seed, opts.shots, noisy) as f64 / opts.shots as f64
            });
            let mut values = DMatrix::from_element(l, l, 1.0);
            for (k, &(i, j)) in entries.iter().enumerate() {
                values[(i, j)] = drawn[k];
                values[(j, i)] = drawn[k];
            }
            let evals = pair_evals + if sample_diagonal { l as u64 } else { 0 };
            let meta = meta_for(spec, opts, evals);
            GramMatrix::from_values(values, GramKind::Train, KernelMode::Sampled, meta)
        }
    }
}

/// Build the rectangular cross Gram: rows of `x_test` against rows of
/// `x_train`.
pub fn build_gram_cross(
    spec: &FeatureMapSpec,
    x_test: &DMatrix<f64>,
    x_train: &DMatrix<f64>,
    opts: &GramOptions,
) -> Result<GramMatrix> {
    opts.validate()?;
    let test = prepare_states(spec, x_test, opts.qubit_cap)?;
    let train = prepare_states(spec, x_train, opts.qubit_cap)?;
    cross_from_states(&test, &train, opts)
}

/// Cross Gram from already-prepared states.
pub fn cross_from_states(
    test: &PreparedStates,
    train: &PreparedStates,
    opts: &GramOptions,
) -> Result<GramMatrix> {
    opts.validate()?;
    let spec = &test.spec;
    let (p, evals) = exact_cross_probabilities(test, train)?;
    let values = match opts.mode {
        KernelMode::Exact => p,
        KernelMode::Sampled => {
            let (t, l) = (p.nrows(), p.ncols());
            let drawn = parallel::map_indexed(t * l, |k| {
                let (i, j) = (k / l, k % l);
                let noisy = depolarize(p[(i, j)], opts.noise_lambda, spec.n_qubits);
                let seed =
                    rng::mix(&[opts.master_seed, TAG_CROSS_ENTRY, i as u64, j as u64]);
                rng::binomial(seed, opts.shots, noisy) as f64 / opts.shots as f64
            });
            DMatrix::from_fn(t, l, |i, j| drawn[i * l + j])
        }
    };
    let meta = meta_for(spec, opts, evals);
    GramMatrix::from_values(values, GramKind::Cross, opts.mode, meta)
}

/// Repair a train Gram to be positive semidefinite by clamping eigenvalues
/// below `floor` (>= 0) up to it and recomposing. The output is exactly
/// symmetric, its eigenvalues are >= floor up to reconstruction error
/// (~1e-12 at these sizes), and `meta.min_eigenvalue` records the clipped
/// minimum. Entries may drift slightly outside [0, 1]; that is inherent to
/// the repair. Already-PSD inputs come back unchanged to ~1e-12.
pub fn regularize_psd(g: &GramMatrix, floor: f64) -> Result<GramMatrix> {
    if g.kind != GramKind::Train {
        return Err(Error::Input("psd repair only applies to train grams".into()));
    }
    if !floor.is_finite() || floor < 0.0 {
        return Err(Error::Input(format!("floor must be finite and >= 0, got {floor}")));
    }
    // Symmetrize defensively (exact for builder output, hygiene for loaded data).
    let sym = (&g.values + g.values.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    let clipped = eig.eigenvalues.map(|l| l.max(floor));
    let min_eig = clipped.min();
    let rebuilt = &eig.eigenvectors
        * DMatrix::from_diagonal(&clipped)
        * eig.eigenvectors.transpose();
    // Recomposition is symmetric only to rounding; make it exact.
    let values = (&rebuilt + rebuilt.transpose()) * 0.5;
    let mut meta = g.meta.clone();
    meta.min_eigenvalue = Some(min_eig);
    GramMatrix::from_values(values, g.kind, g.mode, meta)
}

/// Sidecar path convention: `<csv path>.meta.json`.
#[must_use]
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    PathBuf::from(format!("{}.meta.json", csv_path.display()))
}

/// On-disk header stored in the JSON sidecar next to the values CSV.
#[derive(Debug, Serialize, Deserialize)]
struct GramSidecar {
    kind: GramKind,
    mode: KernelMode,
    rows: usize,
    cols: usize,
    meta: GramMeta,
}

/// Write the values as CSV (row-major, shortest round-trip float format)
/// plus the JSON sidecar at [`sidecar_path`].
pub fn save_csv(g: &GramMatrix, csv_path: &Path) -> Result<()> {
    let mut out = String::new();
    for i in 0..g.rows() {
        let row: Vec<String> = (0..g.cols()).map(|j| format!("{}", g.values[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(csv_path, out)
        .map_err(|e| Error::Data(format!("writing {}: {e}", csv_path.display())))?;
    let sidecar = GramSidecar {
        kind: g.kind,
        mode: g.mode,
        rows: g.rows(),
        cols: g.cols(),
        meta: g.meta.clone(),
    };
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| Error::Data(format!("encoding gram sidecar: {e}")))?;
    std::fs::write(sidecar_path(csv_path), json)
        .map_err(|e| Error::Data(format!("writing {}: {e}", sidecar_path(csv_path).display())))?;
    Ok(())
}

/// Load a Gram saved by [`save_csv`], validating shape against the sidecar
/// and re-checking invariants (finiteness, train symmetry, and the [0, 1]
/// range for unrepaired kernel matrices).
pub fn load_csv(csv_path: &Path) -> Result<GramMatrix> {
    let sidecar_file = sidecar_path(csv_path);
    let sidecar_text = std::fs::read_to_string(&sidecar_file)
        .map_err(|e| Error::Data(format!("reading {}: {e}", sidecar_file.display())))?;
    let sidecar: GramSidecar = serde_json::from_str(&sidecar_text)
        .map_err(|e| Error::Data(format!("parsing {}: {e}", sidecar_file.display())))?;

    let text = std::fs::read_to_string(csv_path)
        .map_err(|e| Error::Data(format!("reading {}: {e}", csv_path.display())))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|tok| {
                tok.trim().parse::<f64>().map_err(|_| {
                    Error::Data(format!(
                        "{} line {}: not a number: {tok:?}",
                        csv_path.display(),
                        lineno + 1
                    ))
                })
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Data(format!("{}: no data rows", csv_path.display())));
    }
    let ncols = rows[0].len();
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(Error::Data(format!(
            "{} line {}: expected {} columns, found {}",
            csv_path.display(),
            i + 1,
            ncols,
            row.len()
        )));
    }
    if rows.len() != sidecar.rows || ncols != sidecar.cols {
        return Err(Error::Data(format!(
            "{}: values are {}x{} but sidecar says {}x{}",
            csv_path.display(),
            rows.len(),
            ncols,
            sidecar.rows,
            sidecar.cols
        )));
    }
    let values = DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]);
    if sidecar.meta.min_eigenvalue.is_none() {
        // Unrepaired kernel matrices must hold probabilities.
        if let Some(v) = values.iter().find(|v| **v < -1e-9 || **v > 1.0 + 1e-9) {
            return Err(Error::Data(format!(
                "{}: kernel value {v} outside [0, 1]",
                csv_path.display()
            )));
        }
    }
    GramMatrix::from_values(values, sidecar.kind, sidecar.mode, sidecar.meta)
        .map_err(|e| match e {
            Error::Input(m) => Error::Data(m),
            other => other,
        })
}
