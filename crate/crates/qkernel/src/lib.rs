//! Quantum fidelity kernels for fault diagnosis, end to end: a tunable
//! ZZ-phase feature map, exact and shot-sampled kernel estimation on a
//! statevector simulator, Gram-matrix assembly with PSD repair, PCA +
//! min-max preprocessing, and a precomputed-kernel SVM with one-vs-one
//! multiclass voting.
//!
//! The kernel between two feature vectors is the state fidelity
//! `k(x_l, x_m) = |<phi(x_l)|phi(x_m)>|^2`, where `|phi(x)>` is prepared by
//! `d` repetitions of a Hadamard wall followed by data-dependent single-qubit
//! and two-qubit diagonal phases. The two-qubit phase carries a scaling knob
//! `alpha`; `alpha = 1` reproduces the conventional ZZ feature map.
//!
//! Module map:
//!
//! * [`featuremap`] — circuit parameters: qubit count, depth, `alpha`,
//!   entangling pairs, and the phase functions.
//! * [`simulator`] — statevector preparation, exact/sampled kernel values,
//!   depolarizing post-processing, and a brute-force unitary oracle.
//! * [`gram`] — train/cross Gram builders with per-row state caching,
//!   eigenvalue-clipping PSD repair, CSV + JSON-sidecar serialization.
//! * [`preprocess`] — PCA (covariance eigendecomposition) and per-feature
//!   min-max normalization, fit on training rows only.
//! * [`svm`] — SMO solver on precomputed Grams, one-vs-one voting, RBF
//!   baseline kernel, accuracy.
//! * [`dataset`] — synthetic fault-pattern generator and CSV I/O.
//! * [`rng`] — SplitMix64 streams, seed mixing, integer-threshold binomial
//!   sampling; everything downstream of a seed is platform-stable.
//!
//! With the default `parallel` feature, Gram entries, row preparations, and
//! statevector stages run data-parallel under rayon; without it the same
//! code paths run sequentially. Outputs are byte-identical across thread
//! counts because every stochastic draw is keyed by explicit stream
//! derivation, never by schedule.

pub mod dataset;
pub mod error;
pub mod featuremap;
pub mod gram;
mod parallel;
pub mod preprocess;
pub mod rng;
pub mod simulator;
pub mod svm;

pub use error::{Error, Result};
