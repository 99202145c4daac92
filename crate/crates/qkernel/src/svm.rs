//! Precomputed-kernel SVM: an SMO dual solver, one-vs-one multiclass
//! voting, an RBF baseline kernel, and accuracy scoring.
//!
//! The solver minimizes the standard dual `0.5 a'Qa - e'a` subject to
//! `0 <= a_i <= C` and `sum_i a_i y_i = 0`, with `Q_ij = y_i y_j K_ij` over
//! a precomputed kernel. Working pairs are chosen by maximal KKT violation
//! and updated with the analytic two-variable solve; ties in the selection
//! scans resolve to the lowest index, so training is deterministic.
//! Multiclass models train one binary machine per unordered class pair and
//! vote; vote ties break by the largest summed |decision value| and then
//! the lowest class id.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::{GramKind, GramMatrix, GramMeta};
use crate::simulator::KernelMode;

/// Regularization and stopping parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    /// Box constraint on the duals.
    pub c: f64,
    /// KKT-violation stopping tolerance.
    pub tol: f64,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams { c: 1.0, tol: 1e-3 }
    }
}

impl SvmParams {
    fn validate(&self) -> Result<()> {
        if !self.c.is_finite() || self.c <= 0.0 {
            return Err(Error::Input(format!("C must be finite and > 0, got {}", self.c)));
        }
        if !self.tol.is_finite() || self.tol <= 0.0 {
            return Err(Error::Input(format!(
                "tolerance must be finite and > 0, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// One trained binary machine for the class pair (`class_pos`, `class_neg`),
/// with `class_pos < class_neg` mapped to labels +1/-1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub class_pos: u32,
    pub class_neg: u32,
    /// `alpha_i * y_i` for each support vector, aligned with
    /// `support_indices`. Sums to 0 within 1e-8; magnitudes lie in (0, C].
    pub dual_coefs: Vec<f64>,
    /// Row indices into the training set.
    pub support_indices: Vec<usize>,
    pub bias: f64,
}

/// One-vs-one multiclass model over a precomputed Gram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    /// Sorted distinct class labels seen at training time.
    pub classes: Vec<u32>,
    /// One machine per unordered class pair, in lexicographic pair order.
    pub binaries: Vec<BinarySvm>,
    pub params: SvmParams,
    /// Training-set size; cross Grams fed to `predict` must have this many
    /// columns.
    pub n_train: usize,
}

pub mod smo {
    //! The two-variable SMO solver, exposed for diagnostics and tests.

    use nalgebra::DMatrix;

    /// Solver output: optimal duals, the bias, and per-iteration dual
    /// objective values (non-decreasing; asserted in debug builds).
    #[derive(Debug, Clone)]
    pub struct SmoSolution {
        pub alphas: Vec<f64>,
        pub bias: f64,
        pub iterations: usize,
        /// KKT violation at exit; <= tol unless the iteration cap hit.
        pub final_violation: f64,
        /// Dual objective `sum a - 0.5 a'Qa` after each update.
        pub objective_trace: Vec<f64>,
    }

    /// Membership predicates for the maximal-violating-pair selection.
    #[inline]
    fn in_up(y: f64, a: f64, c: f64) -> bool {
        (y > 0.0 && a < c) || (y < 0.0 && a > 0.0)
    }

    #[inline]
    fn in_low(y: f64, a: f64, c: f64) -> bool {
        (y > 0.0 && a > 0.0) || (y < 0.0 && a < c)
    }

    /// Solve the dual over the precomputed kernel `k` with labels `y` in
    /// {+1, -1}. Terminates when the violation drops to `tol` or after
    /// `max_iter` pair updates.
    pub fn solve(k: &DMatrix<f64>, y: &[f64], c: f64, tol: f64, max_iter: usize) -> SmoSolution {
        let n = y.len();
        assert_eq!(k.nrows(), n, "kernel and labels disagree");
        assert_eq!(k.ncols(), n);
        const TAU: f64 = 1e-12;

        let mut alpha = vec![0.0f64; n];
        // Gradient of 0.5 a'Qa - e'a; at a = 0 it is -e.
        let mut grad = vec![-1.0f64; n];
        let mut trace: Vec<f64> = Vec::new();
        let mut iterations = 0usize;

        let violation = loop {
            // Maximal violating pair: i maximizes -y G over the "up" set,
            // j minimizes it over the "low" set. First index wins ties.
            let mut i = usize::MAX;
            let mut m = f64::NEG_INFINITY;
            let mut j = usize::MAX;
            let mut mm = f64::INFINITY;
            for t in 0..n {
                let score = -y[t] * grad[t];
                if in_up(y[t], alpha[t], c) && score > m {
                    m = score;
                    i = t;
                }
                if in_low(y[t], alpha[t], c) && score < mm {
                    mm = score;
                    j = t;
                }
            }
            if i == usize::MAX || j == usize::MAX {
                break 0.0;
            }
            if m - mm <= tol || iterations >= max_iter {
                break m - mm;
            }

            // Analytic two-variable update with box clipping.
            let quad = {
                let q = k[(i, i)] + k[(j, j)] - 2.0 * k[(i, j)];
                if q > TAU {
                    q
                } else {
                    TAU
                }
            };
            let (old_ai, old_aj) = (alpha[i], alpha[j]);
            if y[i] != y[j] {
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = alpha[i] - alpha[j];
                alpha[i] += delta;
                alpha[j] += delta;
                if diff > 0.0 {
                    if alpha[j] < 0.0 {
                        alpha[j] = 0.0;
                        alpha[i] = diff;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = -diff;
                }
                if diff > 0.0 {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = c - diff;
                    }
                } else if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = c + diff;
                }
            } else {
                let delta = (grad[i] - grad[j]) / quad;
                let sum = alpha[i] + alpha[j];
                alpha[i] -= delta;
                alpha[j] += delta;
                if sum > c {
                    if alpha[i] > c {
                        alpha[i] = c;
                        alpha[j] = sum - c;
                    }
                } else if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = sum;
                }
                if sum > c {
                    if alpha[j] > c {
                        alpha[j] = c;
                        alpha[i] = sum - c;
                    }
                } else if alpha[i] < 0.0 {
                    alpha[i] = 0.0;
                    alpha[j] = sum;
                }
            }

            let (dai, daj) = (alpha[i] - old_ai, alpha[j] - old_aj);
            for t in 0..n {
                grad[t] += y[t] * y[i] * k[(t, i)] * dai + y[t] * y[j] * k[(t, j)] * daj;
            }
            iterations += 1;

            // Dual objective via the maintained gradient:
            // W(a) = 0.5 * sum_t a_t (1 - G_t).
            let objective: f64 =
                0.5 * alpha.iter().zip(grad.iter()).map(|(a, g)| a * (1.0 - g)).sum::<f64>();
            if let Some(&prev) = trace.last() {
                debug_assert!(
                    objective >= prev - 1e-9 * (1.0 + prev.abs()),
                    "dual objective regressed: {prev} -> {objective}"
                );
            }
            trace.push(objective);
        };

        // Bias from free support vectors, midpoint of the violation bounds
        // otherwise.
        let mut free_sum = 0.0;
        let mut free_count = 0usize;
        for t in 0..n {
            if alpha[t] > 0.0 && alpha[t] < c {
                free_sum += -y[t] * grad[t];
                free_count += 1;
            }
        }
        let bias = if free_count > 0 {
            free_sum / free_count as f64
        } else {
            let mut up = f64::NEG_INFINITY;
            let mut low = f64::INFINITY;
            for t in 0..n {
                let score = -y[t] * grad[t];
                if in_up(y[t], alpha[t], c) {
                    up = up.max(score);
                }
                if in_low(y[t], alpha[t], c) {
                    low = low.min(score);
                }
            }
            if up.is_finite() && low.is_finite() {
                (up + low) / 2.0
            } else {
                0.0
            }
        };

        SmoSolution { alphas: alpha, bias, iterations, final_violation: violation, objective_trace: trace }
    }
}

/// Iteration cap per binary subproblem: 10,000 times its size.
fn iteration_cap(n: usize) -> usize {
    10_000 * n.max(1)
}

/// Train a one-vs-one model on a train-kind Gram. Sampled Grams must have
/// passed [`crate::gram::regularize_psd`] first (asserted via the
/// min-eigenvalue metadata).
pub fn train(gram: &GramMatrix, y: &[u32], params: &SvmParams) -> Result<SvmModel> {
    params.validate()?;
    if gram.kind != GramKind::Train {
        return Err(Error::Input("training requires a train-kind gram".into()));
    }
    if y.len() != gram.rows() {
        return Err(Error::Input(format!(
            "gram has {} rows but {} labels were given",
            gram.rows(),
            y.len()
        )));
    }
    if gram.mode == KernelMode::Sampled {
        match gram.meta.min_eigenvalue {
            None => {
                return Err(Error::Input(
                    "sampled grams must pass psd repair before training \
                     (no min-eigenvalue metadata present)"
                        .into(),
                ))
            }
            Some(m) if m < -1e-8 => {
                return Err(Error::Input(format!(
                    "gram is not positive semidefinite (min eigenvalue {m:e})"
                )));
            }
            Some(_) => {}
        }
    }

    let mut classes: Vec<u32> = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::Input("training requires at least two classes".into()));
    }

    let mut binaries = Vec::with_capacity(classes.len() * (classes.len() - 1) / 2);
    for ai in 0..classes.len() {
        for bi in (ai + 1)..classes.len() {
            let (a, b) = (classes[ai], classes[bi]);
            let idx: Vec<usize> =
                (0..y.len()).filter(|&t| y[t] == a || y[t] == b).collect();
            let sub_k = DMatrix::from_fn(idx.len(), idx.len(), |r, c2| {
                gram.values[(idx[r], idx[c2])]
            });
            let y_bin: Vec<f64> =
                idx.iter().map(|&t| if y[t] == a { 1.0 } else { -1.0 }).collect();
            let sol = smo::solve(&sub_k, &y_bin, params.c, params.tol, iteration_cap(idx.len()));
            let mut dual_coefs = Vec::new();
            let mut support_indices = Vec::new();
            for (local, &alpha) in sol.alphas.iter().enumerate() {
                if alpha > 0.0 {
                    dual_coefs.push(alpha * y_bin[local]);
                    support_indices.push(idx[local]);
                }
            }
            binaries.push(BinarySvm {
                class_pos: a,
                class_neg: b,
                dual_coefs,
                support_indices,
                bias: sol.bias,
            });
        }
    }
    Ok(SvmModel { classes, binaries, params: params.clone(), n_train: y.len() })
}

/// Decision values of every binary machine (columns, in `model.binaries`
/// order) for every test row of a cross Gram.
pub fn decision_values(model: &SvmModel, cross: &GramMatrix) -> Result<DMatrix<f64>> {
    if cross.kind != GramKind::Cross {
        return Err(Error::Input("prediction requires a cross-kind gram".into()));
    }
    if cross.cols() != model.n_train {
        return Err(Error::Input(format!(
            "cross gram has {} columns but the model was trained on {} rows",
            cross.cols(),
            model.n_train
        )));
    }
    let rows = cross.rows();
    Ok(DMatrix::from_fn(rows, model.binaries.len(), |r, m| {
        let bin = &model.binaries[m];
        let mut d = bin.bias;
        for (coef, &s) in bin.dual_coefs.iter().zip(bin.support_indices.iter()) {
            d += coef * cross.values[(r, s)];
        }
        d
    }))
}

/// Predict labels by one-vs-one voting. Vote ties break by the largest
/// summed |decision value| among the tied classes, then the lowest label.
pub fn predict(model: &SvmModel, cross: &GramMatrix) -> Result<Vec<u32>> {
    let decisions = decision_values(model, cross)?;
    let k = model.classes.len();
    let class_pos = |label: u32| {
        model
            .classes
            .binary_search(&label)
            .expect("binaries only reference training classes")
    };
    let mut out = Vec::with_capacity(decisions.nrows());
    for r in 0..decisions.nrows() {
        let mut votes = vec![0u32; k];
        let mut strength = vec![0.0f64; k];
        for (m, bin) in model.binaries.iter().enumerate() {
            let d = decisions[(r, m)];
            // d == 0 falls to the lower label, keeping the outcome
            // deterministic.
            let winner = if d > 0.0 { bin.class_pos } else if d < 0.0 { bin.class_neg } else { bin.class_pos };
            let w = class_pos(winner);
            votes[w] += 1;
            strength[w] += d.abs();
        }
        let mut best = 0usize;
        for cand in 1..k {
            if votes[cand] > votes[best]
                || (votes[cand] == votes[best] && strength[cand] > strength[best])
            {
                best = cand;
            }
        }
        out.push(model.classes[best]);
    }
    Ok(out)
}

/// Fraction of exact label matches.
pub fn accuracy(predicted: &[u32], truth: &[u32]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::Input(format!(
            "prediction and truth lengths differ: {} vs {}",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::Input("cannot score empty label vectors".into()));
    }
    let hits = predicted.iter().zip(truth.iter()).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / predicted.len() as f64)
}

/// Classical baseline kernel `exp(-gamma * ||a - b||^2)` between the rows
/// of `x_a` and `x_b`. The result is train-kind when the two inputs are
/// content-equal (the usual "same rows against themselves" call), cross-kind
/// otherwise.
pub fn rbf_kernel(x_a: &DMatrix<f64>, x_b: &DMatrix<f64>, gamma: f64) -> Result<GramMatrix> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::Input(format!("gamma must be finite and > 0, got {gamma}")));
    }
    if x_a.ncols() != x_b.ncols() {
        return Err(Error::Input(format!(
            "feature counts differ: {} vs {}",
            x_a.ncols(),
            x_b.ncols()
        )));
    }
    if x_a.nrows() == 0 || x_b.nrows() == 0 {
        return Err(Error::Input("rbf kernel needs non-empty inputs".into()));
    }
    let values = DMatrix::from_fn(x_a.nrows(), x_b.nrows(), |i, j| {
        let mut dist = 0.0;
        for c in 0..x_a.ncols() {
            let d = x_a[(i, c)] - x_b[(j, c)];
            dist += d * d;
        }
        (-gamma * dist).exp()
    });
    let kind = if x_a == x_b { GramKind::Train } else { GramKind::Cross };
    let meta = GramMeta {
        spec: None,
        shots: 0,
        master_seed: 0,
        noise_lambda: 0.0,
        kernel_evals: (x_a.nrows() * x_b.nrows()) as u64,
        min_eigenvalue: None,
        pinned_diagonal: false,
    };
    GramMatrix::from_values(values, kind, KernelMode::Exact, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::{build_gram_train, regularize_psd, GramOptions};
    use crate::featuremap::FeatureMapSpec;
    use crate::rng::SplitMix64;

    fn plain_meta() -> GramMeta {
        GramMeta {
            spec: None,
            shots: 0,
            master_seed: 0,
            noise_lambda: 0.0,
            kernel_evals: 0,
            min_eigenvalue: None,
            pinned_diagonal: false,
        }
    }

    fn train_gram(values: DMatrix<f64>) -> GramMatrix {
        GramMatrix::from_values(values, GramKind::Train, KernelMode::Exact, plain_meta()).unwrap()
    }

    fn cross_gram(values: DMatrix<f64>) -> GramMatrix {
        GramMatrix::from_values(values, GramKind::Cross, KernelMode::Exact, plain_meta()).unwrap()
    }

    /// Two clusters of 2-D points in the unit quadrant (so linear-kernel
    /// values stay in [0, 1]) that are linearly separable.
    fn toy_points() -> (DMatrix<f64>, Vec<u32>) {
        let pts = DMatrix::from_row_slice(
            6,
            2,
            &[
                0.85, 0.10, //
                0.80, 0.20, //
                0.90, 0.15, //
                0.10, 0.85, //
                0.20, 0.80, //
                0.15, 0.90, //
            ],
        );
        let labels = vec![1, 1, 1, 2, 2, 2];
        (pts, labels)
    }

    fn linear_kernel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        a * b.transpose()
    }

    #[test]
    fn two_point_identity_gram_solves_analytically() {
        // K = I, y = (+1, -1), C = 1: the dual forces a1 = a2 = a and
        // maximizes 2a - a^2, so a = 1 (at the box bound), duals (+1, -1),
        // and the midpoint bias rule gives exactly 0.
        let g = train_gram(DMatrix::identity(2, 2));
        let model = train(&g, &[1, 2], &SvmParams::default()).unwrap();
        assert_eq!(model.binaries.len(), 1);
        let bin = &model.binaries[0];
        assert_eq!(bin.support_indices, vec![0, 1], "both points support");
        assert!((bin.dual_coefs[0] - 1.0).abs() < 1e-9);
        assert!((bin.dual_coefs[1] + 1.0).abs() < 1e-9);
        assert!(bin.bias.abs() < 1e-9);

        // The same instance through the raw solver, with its trace.
        let sol = smo::solve(&DMatrix::identity(2, 2), &[1.0, -1.0], 1.0, 1e-3, 1000);
        assert!((sol.alphas[0] - 1.0).abs() < 1e-9);
        assert!((sol.alphas[1] - 1.0).abs() < 1e-9);
        assert!(sol.final_violation <= 1e-3);
        assert!(!sol.objective_trace.is_empty());
    }

    #[test]
    fn objective_trace_is_monotone() {
        let mut rng = SplitMix64::new(19);
        let x = DMatrix::from_fn(14, 2, |_, _| rng.next_f64());
        let g = rbf_kernel(&x, &x, 1.0).unwrap();
        let y: Vec<f64> = (0..14).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let sol = smo::solve(&g.values, &y, 1.0, 1e-4, 10_000);
        for w in sol.objective_trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9 * (1.0 + w[0].abs()), "{} -> {}", w[0], w[1]);
        }
        assert!(sol.final_violation <= 1e-4);
    }

    #[test]
    fn separable_linear_toy_reaches_full_training_accuracy() {
        let (pts, labels) = toy_points();
        let g = train_gram(linear_kernel(&pts, &pts));
        let model = train(&g, &labels, &SvmParams::default()).unwrap();
        let cross = cross_gram(linear_kernel(&pts, &pts));
        let pred = predict(&model, &cross).unwrap();
        assert_eq!(pred, labels);
        assert_eq!(accuracy(&pred, &labels).unwrap(), 1.0);
    }

    #[test]
    fn dual_constraints_hold_on_every_binary() {
        let mut rng = SplitMix64::new(20);
        let x = DMatrix::from_fn(24, 3, |_, _| rng.next_f64());
        let y: Vec<u32> = (0..24).map(|i| (i % 4) as u32 + 1).collect();
        let g = rbf_kernel(&x, &x, 2.0).unwrap();
        let params = SvmParams { c: 0.75, tol: 1e-4 };
        let model = train(&g, &y, &params).unwrap();
        assert_eq!(model.binaries.len(), 6, "4 classes -> 6 pairs");
        for bin in &model.binaries {
            let sum: f64 = bin.dual_coefs.iter().sum();
            assert!(sum.abs() < 1e-8, "sum of duals = {sum}");
            for &c in &bin.dual_coefs {
                assert!(c.abs() > 0.0 && c.abs() <= params.c + 1e-12);
            }
        }
    }

    #[test]
    fn kkt_violation_meets_tolerance_at_exit() {
        let mut rng = SplitMix64::new(21);
        let x = DMatrix::from_fn(20, 2, |_, _| rng.next_f64());
        let g = rbf_kernel(&x, &x, 1.5).unwrap();
        let y: Vec<f64> = (0..20).map(|i| if i < 10 { 1.0 } else { -1.0 }).collect();
        let tol = 1e-3;
        let sol = smo::solve(&g.values, &y, 1.0, tol, iteration_cap(20));
        assert!(sol.final_violation <= tol, "violation {}", sol.final_violation);

        // Recheck the violation from scratch against the returned duals.
        let n = 20;
        let mut grad = vec![-1.0f64; n];
        for t in 0..n {
            for s in 0..n {
                grad[t] += y[t] * y[s] * g.values[(t, s)] * sol.alphas[s];
            }
        }
        let mut up = f64::NEG_INFINITY;
        let mut low = f64::INFINITY;
        for t in 0..n {
            let score = -y[t] * grad[t];
            if (y[t] > 0.0 && sol.alphas[t] < 1.0) || (y[t] < 0.0 && sol.alphas[t] > 0.0) {
                up = up.max(score);
            }
            if (y[t] > 0.0 && sol.alphas[t] > 0.0) || (y[t] < 0.0 && sol.alphas[t] < 1.0) {
                low = low.min(score);
            }
        }
        assert!(up - low <= tol + 1e-9, "recomputed violation {}", up - low);
    }

    #[test]
    fn rescaling_gram_and_c_preserves_decisions() {
        let (pts, labels) = toy_points();
        let k = linear_kernel(&pts, &pts);
        let params = SvmParams { c: 1.0, tol: 1e-6 };
        let model = train(&train_gram(k.clone()), &labels, &params).unwrap();
        let d = decision_values(&model, &cross_gram(k.clone())).unwrap();

        let c = 0.5;
        let scaled_params = SvmParams { c: params.c / c, tol: 1e-6 };
        let scaled_model =
            train(&train_gram(k.scale(c)), &labels, &scaled_params).unwrap();
        let d_scaled = decision_values(&scaled_model, &cross_gram(k.scale(c))).unwrap();
        let max_diff = (d - d_scaled).iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(max_diff < 1e-6, "decision drift {max_diff}");
    }

    #[test]
    fn duplicating_a_training_point_keeps_the_decision_function() {
        let (pts, labels) = toy_points();
        let k = linear_kernel(&pts, &pts);
        let params = SvmParams { c: 1.0, tol: 1e-8 };
        let model = train(&train_gram(k.clone()), &labels, &params).unwrap();
        let d_base = decision_values(&model, &cross_gram(k.clone())).unwrap();

        // Append a copy of row 0.
        let mut dup = DMatrix::zeros(7, 2);
        dup.view_mut((0, 0), (6, 2)).copy_from(&pts);
        dup.view_mut((6, 0), (1, 2)).copy_from(&pts.view((0, 0), (1, 2)));
        let mut dup_labels = labels.clone();
        dup_labels.push(labels[0]);
        let model_dup =
            train(&train_gram(linear_kernel(&dup, &dup)), &dup_labels, &params).unwrap();
        let d_dup = decision_values(&model_dup, &cross_gram(linear_kernel(&pts, &dup))).unwrap();

        let max_diff = (d_base - d_dup).iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(max_diff < 1e-6, "decision drift {max_diff}");
    }

    #[test]
    fn multiclass_votes_reduce_to_binary_sign_for_two_classes() {
        let (pts, labels) = toy_points();
        let g = train_gram(linear_kernel(&pts, &pts));
        let model = train(&g, &labels, &SvmParams::default()).unwrap();
        let cross = cross_gram(linear_kernel(&pts, &pts));
        let d = decision_values(&model, &cross).unwrap();
        let pred = predict(&model, &cross).unwrap();
        for r in 0..pred.len() {
            let expected = if d[(r, 0)] > 0.0 { 1 } else { 2 };
            assert_eq!(pred[r], expected);
        }
    }

    #[test]
    fn four_class_problem_is_learned_and_deterministic() {
        let mut rng = SplitMix64::new(22);
        let centers = [(0.2, 0.2), (0.2, 0.8), (0.8, 0.2), (0.8, 0.8)];
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (ci, &(cx, cy)) in centers.iter().enumerate() {
            for _ in 0..6 {
                rows.push(cx + rng.next_range(-0.05, 0.05));
                rows.push(cy + rng.next_range(-0.05, 0.05));
                labels.push(ci as u32 + 1);
            }
        }
        let x = DMatrix::from_row_slice(24, 2, &rows);
        let g = rbf_kernel(&x, &x, 8.0).unwrap();
        let model = train(&g, &labels, &SvmParams::default()).unwrap();
        let mut cross = rbf_kernel(&x, &x, 8.0).unwrap();
        cross.kind = GramKind::Cross;
        let pred = predict(&model, &cross).unwrap();
        assert_eq!(pred, labels, "training points classify correctly");
        let again = predict(&model, &cross).unwrap();
        assert_eq!(pred, again);
    }

    #[test]
    fn model_serde_roundtrip_preserves_predictions() {
        let (pts, labels) = toy_points();
        let g = train_gram(linear_kernel(&pts, &pts));
        let model = train(&g, &labels, &SvmParams::default()).unwrap();
        let json = serde_json::to_string(&model).unwrap();
        let back: SvmModel = serde_json::from_str(&json).unwrap();
        assert_eq!(model, back);
        let cross = cross_gram(linear_kernel(&pts, &pts));
        assert_eq!(
            predict(&model, &cross).unwrap(),
            predict(&back, &cross).unwrap(),
            "bit-identical predictions after JSON round trip"
        );
    }

    #[test]
    fn sampled_grams_require_psd_repair() {
        let spec = FeatureMapSpec::new(2, 1, 1.0).unwrap();
        let mut rng = SplitMix64::new(23);
        let x = DMatrix::from_fn(8, 2, |_, _| rng.next_f64());
        let y: Vec<u32> = (0..8).map(|i| (i % 2) as u32 + 1).collect();
        let opts = GramOptions {
            mode: KernelMode::Sampled,
            shots: 64,
            master_seed: 3,
            ..GramOptions::default()
        };
        let sampled = build_gram_train(&spec, &x, &opts).unwrap();
        let err = train(&sampled, &y, &SvmParams::default()).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
        let repaired = regularize_psd(&sampled, 0.0).unwrap();
        assert!(train(&repaired, &y, &SvmParams::default()).is_ok());
    }

    #[test]
    fn input_validation_errors() {
        let (pts, labels) = toy_points();
        let k = linear_kernel(&pts, &pts);
        let g = train_gram(k.clone());
        // Wrong label count.
        assert!(train(&g, &labels[..4], &SvmParams::default()).is_err());
        // One class only.
        assert!(train(&g, &[1; 6], &SvmParams::default()).is_err());
        // Bad parameters.
        assert!(train(&g, &labels, &SvmParams { c: 0.0, tol: 1e-3 }).is_err());
        assert!(train(&g, &labels, &SvmParams { c: 1.0, tol: 0.0 }).is_err());
        // Cross gram fed to train, train gram fed to predict.
        assert!(train(&cross_gram(k.clone()), &labels, &SvmParams::default()).is_err());
        let model = train(&g, &labels, &SvmParams::default()).unwrap();
        assert!(predict(&model, &g).is_err());
        // Column mismatch on predict.
        let skinny = cross_gram(DMatrix::from_element(2, 3, 0.5));
        assert!(predict(&model, &skinny).is_err());
        // Accuracy guards.
        assert!(accuracy(&[1, 2], &[1]).is_err());
        assert!(accuracy(&[], &[]).is_err());
        assert_eq!(accuracy(&[1, 2, 3], &[1, 9, 3]).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn rbf_kernel_values_and_kind_detection() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 1.0]);
        let b = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let g = rbf_kernel(&a, &a, 0.5).unwrap();
        assert_eq!(g.kind, GramKind::Train);
        assert_eq!(g.values[(0, 0)], 1.0, "unit diagonal");
        // ||(0,0)-(1,1)||^2 = 2, gamma 0.5 -> e^-1.
        assert!((g.values[(0, 1)] - (-1.0f64).exp()).abs() < 1e-15);
        let c = rbf_kernel(&a, &b, 0.5).unwrap();
        assert_eq!(c.kind, GramKind::Cross);
        assert!((c.values[(0, 0)] - (-0.5f64).exp()).abs() < 1e-15);
        assert!(rbf_kernel(&a, &b, 0.0).is_err());
        assert!(rbf_kernel(&a, &DMatrix::from_element(1, 3, 0.1), 1.0).is_err());
    }
}
