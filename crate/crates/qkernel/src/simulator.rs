//! Statevector simulation of the feature-map circuit and kernel estimation.
//!
//! Basis-state index convention: bit `p` of an amplitude index is the state
//! of qubit `p` (qubit 0 is the least-significant bit). One circuit layer is
//! a Hadamard on every qubit (an in-place n-stage butterfly), then the
//! fused diagonal phase: index `idx` picks up
//! `sum_p phi_p * (-1)^bit_p + sum_(p,q) phi_pq * (-1)^(bit_p xor bit_q)`,
//! i.e. `exp(i*phi*Z)` is `diag(e^{i phi}, e^{-i phi})`. The layer repeats
//! `depth` times with the same phases.
//!
//! [`brute_force_unitary`] rebuilds the same circuit as an explicit matrix
//! from Kronecker products of 2x2 gates. It shares no code with the fast
//! path and is deliberately slow; it exists as an independent oracle for
//! tests and is capped at 6 qubits.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featuremap::{compute_phases, FeatureMapSpec, PhaseParams};
use crate::parallel;
use crate::rng;

/// Default guard on statevector size: 2^26 amplitudes is ~1 GiB.
pub const DEFAULT_QUBIT_CAP: usize = 26;

/// Statevectors at or below this length skip the parallel dispatch.
const SEQ_CUTOFF: usize = 1 << 12;

/// Chunk length for elementwise parallel passes. Fixed (never derived from
/// the thread count) so partial results are identical on any schedule.
const CHUNK: usize = 1 << 13;

/// How a kernel value was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelMode {
    Exact,
    Sampled,
}

/// A single kernel evaluation: the value in [0, 1], the backend mode, and
/// the shot count (0 for exact values).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: f64,
    pub mode: KernelMode,
    pub shots: u64,
}

/// A normalized `2^n`-amplitude state. Immutable once prepared.
#[derive(Debug, Clone)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    #[must_use]
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    #[must_use]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Euclidean norm; 1 within 1e-12 after every preparation.
    #[must_use]
    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Inner product `<self|other>` (conjugate-linear in `self`).
    /// Panics if the qubit counts differ.
    #[must_use]
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        assert_eq!(
            self.n_qubits, other.n_qubits,
            "inner product requires equal qubit counts"
        );
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// State fidelity `|<self|other>|^2`, clamped into [0, 1].
    #[must_use]
    pub fn fidelity_with(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr().clamp(0.0, 1.0)
    }
}

/// Prepare the feature state for `x` under the default qubit cap.
pub fn prepare_feature_state(spec: &FeatureMapSpec, x: &[f64]) -> Result<StateVector> {
    prepare_feature_state_capped(spec, x, DEFAULT_QUBIT_CAP)
}

/// Prepare the feature state for `x`, refusing more than `max_qubits`.
pub fn prepare_feature_state_capped(
    spec: &FeatureMapSpec,
    x: &[f64],
    max_qubits: usize,
) -> Result<StateVector> {
    check_cap(spec.n_qubits, max_qubits)?;
    let phases = compute_phases(spec, x)?;
    let dim = 1usize << spec.n_qubits;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    amps[0] = Complex64::new(1.0, 0.0);
    for _ in 0..spec.depth {
        hadamard_all(&mut amps, spec.n_qubits);
        apply_diagonal_phases(&mut amps, spec, &phases);
    }
    let state = StateVector { n_qubits: spec.n_qubits, amps };
    debug_assert!((state.norm() - 1.0).abs() < 1e-12);
    Ok(state)
}

fn check_cap(n_qubits: usize, max_qubits: usize) -> Result<()> {
    // Hard ceiling regardless of the configured cap: beyond this the
    // amplitude buffer cannot be addressed, let alone allocated.
    const ABSOLUTE_MAX: usize = 48;
    let cap = max_qubits.min(ABSOLUTE_MAX);
    if n_qubits > cap {
        return Err(Error::Resource(format!(
            "n_qubits = {n_qubits} exceeds the statevector cap of {cap} \
             (2^{n_qubits} amplitudes)"
        )));
    }
    Ok(())
}

/// Hadamard on every qubit: n butterfly stages, each pairing indices that
/// differ in one bit and mapping (a, b) -> ((a+b), (a-b)) / sqrt(2).
fn hadamard_all(amps: &mut [Complex64], n_qubits: usize) {
    const NORM: f64 = std::f64::consts::FRAC_1_SQRT_2;
    let butterfly = |lo: &mut [Complex64], hi: &mut [Complex64]| {
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let sum = *a + *b;
            let diff = *a - *b;
            *a = sum * NORM;
            *b = diff * NORM;
        }
    };
    for p in 0..n_qubits {
        let stride = 1usize << p;
        let block = stride * 2;
        if amps.len() <= SEQ_CUTOFF {
            for blk in amps.chunks_mut(block) {
                let (lo, hi) = blk.split_at_mut(stride);
                butterfly(lo, hi);
            }
        } else if amps.len() / block >= 8 {
            // Many independent blocks: parallelize across them.
            parallel::for_each_chunk_mut(amps, block, |_, blk| {
                let (lo, hi) = blk.split_at_mut(stride);
                butterfly(lo, hi);
            });
        } else {
            // Few large blocks (high-order stages): parallelize inside each.
            for blk in amps.chunks_mut(block) {
                let (lo, hi) = blk.split_at_mut(stride);
                parallel::for_each_zip_chunks_mut(lo, hi, CHUNK, butterfly);
            }
        }
    }
}

/// Fused diagonal layer: single-qubit and pair phases in one pass.
fn apply_diagonal_phases(amps: &mut [Complex64], spec: &FeatureMapSpec, phases: &PhaseParams) {
    let single = &phases.single_phases;
    let pair = &phases.pair_phases;
    let pairs = &spec.pairs;
    let n = spec.n_qubits;
    let rotate = |base: usize, chunk: &mut [Complex64]| {
        for (k, amp) in chunk.iter_mut().enumerate() {
            let idx = base + k;
            let mut theta = 0.0;
            for (p, &phi) in single.iter().enumerate().take(n) {
                theta += if (idx >> p) & 1 == 0 { phi } else { -phi };
            }
            for (&(p, q), &phi) in pairs.iter().zip(pair.iter()) {
                let parity = ((idx >> p) ^ (idx >> q)) & 1;
                theta += if parity == 0 { phi } else { -phi };
            }
            *amp *= Complex64::from_polar(1.0, theta);
        }
    };
    if amps.len() <= SEQ_CUTOFF {
        rotate(0, amps);
    } else {
        parallel::for_each_chunk_mut(amps, CHUNK, |ci, chunk| rotate(ci * CHUNK, chunk));
    }
}

/// Exact kernel `|<phi(x_l)|phi(x_m)>|^2` under the default qubit cap.
///
/// Identical inputs short-circuit to exactly 1 (fidelity of identical
/// preparations) without simulating.
pub fn kernel_exact(spec: &FeatureMapSpec, x_l: &[f64], x_m: &[f64]) -> Result<KernelValue> {
    kernel_exact_capped(spec, x_l, x_m, DEFAULT_QUBIT_CAP)
}

/// [`kernel_exact`] with an explicit qubit cap.
pub fn kernel_exact_capped(
    spec: &FeatureMapSpec,
    x_l: &[f64],
    x_m: &[f64],
    max_qubits: usize,
) -> Result<KernelValue> {
    let value = if x_l == x_m {
        check_cap(spec.n_qubits, max_qubits)?;
        compute_phases(spec, x_l)?; // validate the input even on the shortcut
        1.0
    } else {
        let a = prepare_feature_state_capped(spec, x_l, max_qubits)?;
        let b = prepare_feature_state_capped(spec, x_m, max_qubits)?;
        a.fidelity_with(&b)
    };
    Ok(KernelValue { value, mode: KernelMode::Exact, shots: 0 })
}

/// Shot-sampled kernel estimate: draws `B ~ Binomial(shots, p_exact)` from
/// the deterministic stream keyed by `seed` and returns `B / shots`.
pub fn kernel_sampled(
    spec: &FeatureMapSpec,
    x_l: &[f64],
    x_m: &[f64],
    shots: u64,
    seed: u64,
) -> Result<KernelValue> {
    kernel_sampled_capped(spec, x_l, x_m, shots, seed, DEFAULT_QUBIT_CAP)
}

/// [`kernel_sampled`] with an explicit qubit cap.
pub fn kernel_sampled_capped(
    spec: &FeatureMapSpec,
    x_l: &[f64],
    x_m: &[f64],
    shots: u64,
    seed: u64,
    max_qubits: usize,
) -> Result<KernelValue> {
    if shots == 0 {
        return Err(Error::Input("sampled mode requires shots >= 1".into()));
    }
    let p = kernel_exact_capped(spec, x_l, x_m, max_qubits)?.value;
    let hits = rng::binomial(seed, shots, p);
    Ok(KernelValue {
        value: hits as f64 / shots as f64,
        mode: KernelMode::Sampled,
        shots,
    })
}

/// Mix a kernel value with the depolarized background:
/// `value' = (1 - lambda) * value + lambda * 2^-n`, clamped into [0, 1].
/// Mode and shot counters carry through unchanged.
///
/// The Gram builder applies this to the exact probability *before* shot
/// sampling (shots observe the noisy state); applying it to an
/// already-sampled value is supported but no longer yields an integer
/// multiple of 1/shots.
#[must_use]
pub fn apply_depolarizing(k: KernelValue, lambda: f64, n_qubits: usize) -> KernelValue {
    assert!(
        lambda.is_finite() && (0.0..=1.0).contains(&lambda),
        "lambda must lie in [0, 1], got {lambda}"
    );
    let background = (0.5f64).powi(n_qubits as i32);
    KernelValue {
        value: ((1.0 - lambda) * k.value + lambda * background).clamp(0.0, 1.0),
        ..k
    }
}

/// Build the full circuit unitary from explicit Kronecker products of 2x2
/// gate matrices. Test oracle only: refuses more than 6 qubits.
pub fn brute_force_unitary(spec: &FeatureMapSpec, x: &[f64]) -> Result<DMatrix<Complex64>> {
    const ORACLE_MAX_QUBITS: usize = 6;
    if spec.n_qubits > ORACLE_MAX_QUBITS {
        return Err(Error::Resource(format!(
            "brute-force unitary is capped at {ORACLE_MAX_QUBITS} qubits, got {}",
            spec.n_qubits
        )));
    }
    let phases = compute_phases(spec, x)?;
    let n = spec.n_qubits;
    let dim = 1usize << n;

    let c = |re: f64, im: f64| Complex64::new(re, im);
    let h2 = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)])
        * c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z2 = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    let id2 = DMatrix::<Complex64>::identity(2, 2);
    let rz = |phi: f64| {
        DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::from_polar(1.0, phi),
                c(0.0, 0.0),
                c(0.0, 0.0),
                Complex64::from_polar(1.0, -phi),
            ],
        )
    };

    // Kronecker chain with qubit 0 as the least-significant index bit:
    // factor order runs from qubit n-1 down to qubit 0.
    let kron_chain = |factor: &dyn Fn(usize) -> DMatrix<Complex64>| {
        let mut acc = factor(n - 1);
        for p in (0..n - 1).rev() {
            acc = acc.kronecker(&factor(p));
        }
        acc
    };

    let h_layer = kron_chain(&|_| h2.clone());
    let single_layer = kron_chain(&|p| rz(phases.single_phases[p]));

    // exp(i*phi*Z_p Z_q) = cos(phi) I + i sin(phi) (Z at p and q), built from
    // the kron chain with Z on the two touched qubits.
    let mut pair_layer = DMatrix::<Complex64>::identity(dim, dim);
    for (&(p, q), &phi) in spec.pairs.iter().zip(phases.pair_phases.iter()) {
        let zz = kron_chain(&|r| if r == p || r == q { z2.clone() } else { id2.clone() });
        let rotation = DMatrix::<Complex64>::identity(dim, dim) * c(phi.cos(), 0.0)
            + zz * c(0.0, phi.sin());
        pair_layer = rotation * pair_layer;
    }

    let layer = pair_layer * single_layer * h_layer;
    let mut unitary = DMatrix::<Complex64>::identity(dim, dim);
    for _ in 0..spec.depth {
        unitary = &layer * unitary;
    }
    Ok(unitary)
}
