//! Feature-map parameters and phase functions.
//!
//! A map is defined by the qubit count `n`, the repetition depth `d`, the
//! pair-phase scaling `alpha`, and the list of entangling pairs (default:
//! the linear chain (0,1), (1,2), ..., (n-2, n-1)). For an input vector `x`
//! the single-qubit phase on qubit `p` is `x[p]` and the pair phase on
//! `(p, q)` is `(pi - alpha*x[p]) * (pi - alpha*x[q])`. `alpha = 1` is the
//! conventional ZZ feature map; `alpha = 0` makes every pair phase the
//! constant `pi^2`, removing data dependence from the entangling layer.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Circuit-shape parameters for the fidelity-kernel feature map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFeatureMapSpec")]
pub struct FeatureMapSpec {
    pub n_qubits: usize,
    pub depth: usize,
    pub alpha: f64,
    /// Entangling pairs, each `(p, q)` with `p < q < n_qubits`, no duplicates.
    pub pairs: Vec<(usize, usize)>,
}

impl FeatureMapSpec {
    /// Spec with the default linear-chain entangler.
    pub fn new(n_qubits: usize, depth: usize, alpha: f64) -> Result<Self> {
        Self::with_pairs(n_qubits, depth, alpha, Self::linear_pairs(n_qubits))
    }

    /// Spec with an explicit pair list.
    pub fn with_pairs(
        n_qubits: usize,
        depth: usize,
        alpha: f64,
        pairs: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let spec = FeatureMapSpec { n_qubits, depth, alpha, pairs };
        spec.validate()?;
        Ok(spec)
    }

    /// The default entangler: adjacent-qubit chain. Empty for `n = 1`.
    #[must_use]
    pub fn linear_pairs(n_qubits: usize) -> Vec<(usize, usize)> {
        (1..n_qubits).map(|q| (q - 1, q)).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::Input("n_qubits must be at least 1".into()));
        }
        if self.depth == 0 {
            return Err(Error::Input("depth must be at least 1".into()));
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::Input(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for &(p, q) in &self.pairs {
            if p >= q || q >= self.n_qubits {
                return Err(Error::Input(format!(
                    "pair ({p}, {q}) must satisfy p < q < n_qubits = {}",
                    self.n_qubits
                )));
            }
            if !seen.insert((p, q)) {
                return Err(Error::Input(format!("duplicate pair ({p}, {q})")));
            }
        }
        Ok(())
    }
}

/// Mirror of [`FeatureMapSpec`] for deserialization: a missing `pairs` key
/// means the linear chain.
#[derive(Deserialize)]
struct RawFeatureMapSpec {
    n_qubits: usize,
    depth: usize,
    alpha: f64,
    #[serde(default)]
    pairs: Option<Vec<(usize, usize)>>,
}

impl TryFrom<RawFeatureMapSpec> for FeatureMapSpec {
    type Error = Error;

    fn try_from(raw: RawFeatureMapSpec) -> Result<Self> {
        let pairs = raw
            .pairs
            .unwrap_or_else(|| FeatureMapSpec::linear_pairs(raw.n_qubits));
        FeatureMapSpec::with_pairs(raw.n_qubits, raw.depth, raw.alpha, pairs)
    }
}

/// Diagonal phase angles for one input vector: `single_phases[p]` drives the
/// Z rotation on qubit `p`, `pair_phases[k]` the ZZ rotation on `spec.pairs[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseParams {
    pub single_phases: Vec<f64>,
    pub pair_phases: Vec<f64>,
}

/// Evaluate the phase functions of `spec` at `x`.
///
/// `x` must have length `spec.n_qubits` with finite entries.
pub fn compute_phases(spec: &FeatureMapSpec, x: &[f64]) -> Result<PhaseParams> {
    if x.len() != spec.n_qubits {
        return Err(Error::Input(format!(
            "input has {} entries but the map needs {}",
            x.len(),
            spec.n_qubits
        )));
    }
    if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::Input(format!("non-finite input entry {bad}")));
    }
    let single_phases = x.to_vec();
    let pair_phases = spec
        .pairs
        .iter()
        .map(|&(p, q)| (PI - spec.alpha * x[p]) * (PI - spec.alpha * x[q]))
        .collect();
    Ok(PhaseParams { single_phases, pair_phases })
}
