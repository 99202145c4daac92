//! Train-side preprocessing: PCA to the qubit count, then per-feature
//! min-max normalization into [0, 1].
//!
//! Both transforms are fit on training rows only and applied to train and
//! test alike — the pipeline never lets test rows influence the fitted
//! parameters. PCA uses the sample covariance (divisor `l - 1`) and a
//! deterministic eigenvector orientation: each component is flipped so its
//! largest-magnitude entry (first one on ties) is positive.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fitted PCA basis: `components` holds one unit-norm row per retained
/// direction (k x D), ordered by decreasing `explained_variance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: DVector<f64>,
    pub components: DMatrix<f64>,
    pub explained_variance: DVector<f64>,
}

/// Fit a `k`-component PCA on the rows of `x` (l x D, l >= 2,
/// 1 <= k <= min(l, D)).
pub fn pca_fit(x: &DMatrix<f64>, k: usize) -> Result<PcaModel> {
    let (l, d) = (x.nrows(), x.ncols());
    if l < 2 {
        return Err(Error::Input(format!("pca needs at least 2 rows, got {l}")));
    }
    if k == 0 || k > l.min(d) {
        return Err(Error::Input(format!(
            "component count must satisfy 1 <= k <= min(rows, features) = {}, got {k}",
            l.min(d)
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("pca input must be finite".into()));
    }

    let mean = DVector::from_fn(d, |j, _| x.column(j).sum() / l as f64);
    let centered = DMatrix::from_fn(l, d, |i, j| x[(i, j)] - mean[j]);
    let cov = centered.transpose() * &centered / (l as f64 - 1.0);

    let eig = nalgebra::SymmetricEigen::new(cov);
    // Order directions by decreasing variance; stable sort keeps the lower
    // original index first on exact ties.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("eigenvalues of a finite symmetric matrix are finite")
    });

    let mut components = DMatrix::zeros(k, d);
    let mut explained = DVector::zeros(k);
    for (r, &src) in order.iter().take(k).enumerate() {
        let col = eig.eigenvectors.column(src);
        // Orientation: largest-|entry| (first on ties) made positive.
        let mut lead = 0;
        for j in 1..d {
            if col[j].abs() > col[lead].abs() {
                lead = j;
            }
        }
        let flip = if col[lead] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..d {
            components[(r, j)] = flip * col[j];
        }
        explained[r] = eig.eigenvalues[src];
    }
    Ok(PcaModel { mean, components, explained_variance: explained })
}

/// Project rows of `x` onto the fitted basis: `(x - mean) . components^T`.
pub fn pca_transform(model: &PcaModel, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() != model.mean.len() {
        return Err(Error::Input(format!(
            "pca transform expects {} features, got {}",
            model.mean.len(),
            x.ncols()
        )));
    }
    let centered = DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] - model.mean[j]);
    Ok(centered * model.components.transpose())
}

/// Per-feature min-max bounds learned from training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

/// Learn per-column bounds from the rows of `x`.
pub fn normalize_fit(x: &DMatrix<f64>) -> Result<Normalizer> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::Input("normalizer needs a non-empty matrix".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("normalizer input must be finite".into()));
    }
    let mins = (0..x.ncols()).map(|j| x.column(j).min()).collect();
    let maxs = (0..x.ncols()).map(|j| x.column(j).max()).collect();
    Ok(Normalizer { mins, maxs })
}

/// Map each column into [0, 1] using the fitted bounds, clamping values
/// outside the training range. Degenerate columns (max == min on the
/// training rows) map everything to 0.5.
pub fn normalize_apply(norm: &Normalizer, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() != norm.mins.len() {
        return Err(Error::Input(format!(
            "normalizer expects {} features, got {}",
            norm.mins.len(),
            x.ncols()
        )));
    }
    Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
        let (lo, hi) = (norm.mins[j], norm.maxs[j]);
        if hi > lo {
            ((x[(i, j)] - lo) / (hi - lo)).clamp(0.0, 1.0)
        } else {
            0.5
        }
    }))
}
