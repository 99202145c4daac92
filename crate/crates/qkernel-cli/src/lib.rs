//! Experiment orchestration for the `qkernel` library: JSON-configured
//! cross-validation runs, alpha and qubit-count sweeps, and shot-noise
//! studies, all emitting deterministic CSV/JSON artifacts.
//!
//! The binary front end lives in `main.rs`; everything it does is driven
//! through [`config`] and [`pipeline`] so integration tests can exercise
//! the same code paths in-process.

pub mod config;
pub mod pipeline;
