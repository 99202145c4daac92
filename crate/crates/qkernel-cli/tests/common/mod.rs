//! Helpers shared by the integration suites: an independent eigenvalue
//! oracle and small random-data utilities.

use nalgebra::DMatrix;
use qkernel::rng::SplitMix64;

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations — kept
/// deliberately independent of the eigensolver the library uses, so Gram
/// spectra are audited by a second implementation.
pub fn jacobi_eigenvalues(m: &DMatrix<f64>, max_sweeps: usize) -> Vec<f64> {
    assert_eq!(m.nrows(), m.ncols(), "jacobi needs a square matrix");
    let n = m.nrows();
    let mut a = m.clone();
    for _ in 0..max_sweeps {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() < 1e-18 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}

/// Smallest eigenvalue per the Jacobi oracle.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    jacobi_eigenvalues(m, 50).into_iter().fold(f64::INFINITY, f64::min)
}

/// Uniform [0, 1) matrix from the library's deterministic generator.
pub fn random_matrix(seed: u64, rows: usize, cols: usize) -> DMatrix<f64> {
    let mut rng = SplitMix64::new(seed);
    DMatrix::from_fn(rows, cols, |_, _| rng.next_f64())
}

/// Uniform [0, 1) vector.
pub fn random_vector(rng: &mut SplitMix64, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.next_f64()).collect()
}
