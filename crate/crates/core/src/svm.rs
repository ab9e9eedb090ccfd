//! Soft-margin SVM trained on a precomputed kernel.
//!
//! The dual
//!
//! ```text
//! max  Σ α_i − ½ Σ_ij α_i α_j y_i y_j K_ij
//! s.t. 0 ≤ α_i ≤ C,  Σ α_i y_i = 0
//! ```
//!
//! is solved by sequential minimal optimization with second-order working
//! set selection. The decision value is `f(x) = Σ α_i y_i K(x_i, x) + b`.

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::circuit::KernelMatrix;
use crate::error::{Error, Result};

/// Smallest eigenvalue tolerated without a diagonal shift.
pub const PSD_TOLERANCE: f64 = 1e-8;
/// Below this smallest eigenvalue the kernel is treated as broken.
pub const PSD_ABORT: f64 = 1e-6;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Box constraint `C`.
    pub c: f64,
    /// Stop when the maximal KKT violation drops below this.
    pub tol: f64,
    /// Pair updates are capped at `max_passes × n`.
    pub max_passes: usize,
    /// `α_i` above this marks a support vector.
    pub support_tol: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            tol: 1e-6,
            max_passes: 1000,
            support_tol: 1e-8,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("svm C must be positive, got {}", self.c)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config(format!("svm tol must be positive, got {}", self.tol)));
        }
        if self.max_passes == 0 {
            return Err(Error::Config("svm max_passes must be at least 1".into()));
        }
        Ok(())
    }
}

/// A fitted model in dual form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedQsvm {
    pub dual_coefs: Vec<f64>,
    /// Training labels as ±1.
    pub labels: Vec<f64>,
    pub bias: f64,
    pub support_mask: Vec<bool>,
    pub regularization: f64,
    pub iterations: usize,
}

impl TrainedQsvm {
    pub fn n_train(&self) -> usize {
        self.dual_coefs.len()
    }

    pub fn support_count(&self) -> usize {
        self.support_mask.iter().filter(|&&s| s).count()
    }

    /// Pre-sign decision value for one kernel row against the training set.
    pub fn decision(&self, k_row: &[f64]) -> Result<f64> {
        if k_row.len() != self.n_train() {
            return Err(Error::Input(format!(
                "kernel row has {} entries, model was trained on {}",
                k_row.len(),
                self.n_train()
            )));
        }
        Ok(self
            .dual_coefs
            .iter()
            .zip(&self.labels)
            .zip(k_row)
            .map(|((a, y), k)| a * y * k)
            .sum::<f64>()
            + self.bias)
    }

    /// `sign(f(x))` per test row; `f(x) = 0` is labeled +1.
    pub fn predict(&self, k_test: &KernelMatrix) -> Result<Vec<f64>> {
        if k_test.ncols() != self.n_train() {
            return Err(Error::Input(format!(
                "test kernel has {} columns, model was trained on {}",
                k_test.ncols(),
                self.n_train()
            )));
        }
        (0..k_test.nrows())
            .map(|i| {
                self.decision(&k_test.row(i))
                    .map(|f| if f >= 0.0 { 1.0 } else { -1.0 })
            })
            .collect()
    }

    /// Serializable summary for reports.
    pub fn summary(&self) -> QsvmSummary {
        QsvmSummary {
            dual_coefs: self.dual_coefs.clone(),
            bias: self.bias,
            support_count: self.support_count(),
            regularization: self.regularization,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QsvmSummary {
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub support_count: usize,
    pub regularization: f64,
}

/// Fraction of matching labels.
pub fn accuracy(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.is_empty() || pred.len() != truth.len() {
        return Err(Error::Input(format!(
            "accuracy needs equal nonempty label vectors, got {} and {}",
            pred.len(),
            truth.len()
        )));
    }
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / pred.len() as f64)
}

/// Dual objective `Σα − ½ αᵀQα` with `Q_ij = y_i y_j K_ij`.
pub fn dual_objective(k: &KernelMatrix, y: &[f64], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k.get(i, j);
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Checks the smallest eigenvalue of a training kernel, shifting the diagonal
/// when it is slightly negative. Returns the applied shift.
pub fn clamp_psd(k: &mut KernelMatrix) -> Result<f64> {
    let Some(lambda) = k.min_eigenvalue() else {
        return Err(Error::Input("training kernel must be square and symmetric".into()));
    };
    if lambda >= -PSD_TOLERANCE {
        return Ok(0.0);
    }
    if lambda < -PSD_ABORT {
        return Err(Error::Numerical(format!(
            "training kernel has eigenvalue {lambda:e}, below −{PSD_ABORT:e}"
        )));
    }
    warn!("shifting kernel diagonal by {:e} to restore positive semidefiniteness", -lambda);
    k.shift_diagonal(-lambda);
    Ok(-lambda)
}

/// Trains on an `n × n` kernel with labels in `{−1, +1}`.
pub fn fit(k: &KernelMatrix, y: &[f64], config: &SvmConfig) -> Result<TrainedQsvm> {
    config.validate()?;
    let n = y.len();
    if k.nrows() != n || k.ncols() != n {
        return Err(Error::Input(format!(
            "kernel is {}×{}, expected {n}×{n}",
            k.nrows(),
            k.ncols()
        )));
    }
    if let Some(&bad) = y.iter().find(|&&v| v != 1.0 && v != -1.0) {
        return Err(Error::Input(format!("label {bad} is not ±1")));
    }
    if k.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("kernel contains non-finite entries".into()));
    }
    if !(y.contains(&1.0) && y.contains(&-1.0)) {
        return Err(Error::Training("training labels contain a single class".into()));
    }

    let c = config.c;
    let mut alpha = vec![0.0; n];
    // Gradient of ½αᵀQα − Σα.
    let mut grad = vec![-1.0; n];
    let max_iter = config.max_passes.saturating_mul(n.max(1));
    let mut iterations = 0;

    let q = |i: usize, j: usize| y[i] * y[j] * k.get(i, j);
    let in_up = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] < c) || (y[t] < 0.0 && a[t] > 0.0);
    let in_low = |t: usize, a: &[f64]| (y[t] > 0.0 && a[t] > 0.0) || (y[t] < 0.0 && a[t] < c);

    while let Some((i, j)) = select_working_set(n, &alpha, &grad, y, k, config.tol, in_up, in_low) {
        if iterations >= max_iter {
            warn!("SMO stopped at the iteration cap ({max_iter}) before reaching tol");
            break;
        }
        iterations += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let quad = (k.get(i, i) + k.get(j, j) - 2.0 * k.get(i, j)).max(TAU);
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

        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(t, i) * di + q(t, j) * dj;
        }
    }
    debug!("SMO converged after {iterations} updates");

    let bias = compute_bias(&alpha, &grad, y, c);
    let support_mask = alpha.iter().map(|&a| a > config.support_tol).collect();
    Ok(TrainedQsvm {
        dual_coefs: alpha,
        labels: y.to_vec(),
        bias,
        support_mask,
        regularization: c,
        iterations,
    })
}

/// Maximal violating pair with second-order selection of the second index.
#[allow(clippy::too_many_arguments)]
fn select_working_set(
    n: usize,
    alpha: &[f64],
    grad: &[f64],
    y: &[f64],
    k: &KernelMatrix,
    tol: f64,
    in_up: impl Fn(usize, &[f64]) -> bool,
    in_low: impl Fn(usize, &[f64]) -> bool,
) -> Option<(usize, usize)> {
    let mut i = None;
    let mut g_max = f64::NEG_INFINITY;
    for t in 0..n {
        if in_up(t, alpha) && -y[t] * grad[t] > g_max {
            g_max = -y[t] * grad[t];
            i = Some(t);
        }
    }
    let i = i?;
    let mut j = None;
    let mut g_min = f64::INFINITY;
    let mut best = f64::INFINITY;
    for t in 0..n {
        if !in_low(t, alpha) {
            continue;
        }
        let v = -y[t] * grad[t];
        g_min = g_min.min(v);
        let b = g_max - v;
        if b > 0.0 {
            let a = (k.get(i, i) + k.get(t, t) - 2.0 * k.get(i, t)).max(TAU);
            let score = -(b * b) / a;
            if score < best {
                best = score;
                j = Some(t);
            }
        }
    }
    if g_max - g_min < tol {
        return None;
    }
    j.map(|j| (i, j))
}

/// `b` averaged over free support vectors, else the midpoint of the feasible
/// interval implied by the bound ones.
fn compute_bias(alpha: &[f64], grad: &[f64], y: &[f64], c: f64) -> f64 {
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for t in 0..alpha.len() {
        // y_t − Σ_j α_j y_j K_tj
        let b_t = -y[t] * grad[t];
        if alpha[t] > 0.0 && alpha[t] < c {
            free_sum += b_t;
            free_count += 1;
        } else if (alpha[t] == 0.0) == (y[t] > 0.0) {
            lower = lower.max(b_t);
        } else {
            upper = upper.min(b_t);
        }
    }
    if free_count > 0 {
        return free_sum / free_count as f64;
    }
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => 0.5 * (lower + upper),
        (true, false) => lower,
        (false, true) => upper,
        (false, false) => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn kernel(m: DMatrix<f64>) -> KernelMatrix {
        KernelMatrix::from_matrix(m)
    }

    fn random_gram(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> KernelMatrix {
        let x = DMatrix::from_fn(n, dim, |_, _| rng.gen_range(-1.0..1.0));
        let g = &x * x.transpose();
        kernel((&g + g.transpose()) * 0.5)
    }

    fn check_kkt(model: &TrainedQsvm, k: &KernelMatrix, tol: f64) {
        let c = model.regularization;
        let eq: f64 = model.dual_coefs.iter().zip(&model.labels).map(|(a, y)| a * y).sum();
        assert!(eq.abs() < 1e-8, "Σαy = {eq}");
        for (t, &a) in model.dual_coefs.iter().enumerate() {
            assert!((0.0..=c).contains(&a));
            let margin = model.labels[t] * model.decision(&k.row(t)).unwrap();
            if a > 1e-8 && a < c - 1e-8 {
                assert!((margin - 1.0).abs() < tol, "free SV margin {margin}");
            } else if a <= 1e-8 {
                assert!(margin > 1.0 - tol, "α=0 margin {margin}");
            } else {
                assert!(margin < 1.0 + tol, "α=C margin {margin}");
            }
        }
    }

    #[test]
    fn two_point_identity_kernel() {
        let k = kernel(DMatrix::identity(2, 2));
        let m = fit(&k, &[1.0, -1.0], &SvmConfig::default()).unwrap();
        assert!((m.dual_coefs[0] - m.dual_coefs[1]).abs() < 1e-12);
        assert_eq!(m.support_count(), 2);
        assert!(m.decision(&k.row(0)).unwrap() > 0.0);
        assert!(m.decision(&k.row(1)).unwrap() < 0.0);
        assert_eq!(m.predict(&k).unwrap(), vec![1.0, -1.0]);
    }

    #[test]
    fn decision_is_direct_sum() {
        let m = TrainedQsvm {
            dual_coefs: vec![0.0; 3],
            labels: vec![1.0, -1.0, 1.0],
            bias: 0.5,
            support_mask: vec![false; 3],
            regularization: 1.0,
            iterations: 0,
        };
        assert_eq!(m.decision(&[0.3, 0.2, 0.1]).unwrap(), 0.5);
        assert!(m.decision(&[0.3]).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = TrainedQsvm {
            dual_coefs: (0..5).map(|_| rng.gen_range(0.0..1.0)).collect(),
            labels: vec![1.0, -1.0, 1.0, -1.0, 1.0],
            bias: -0.25,
            support_mask: vec![true; 5],
            regularization: 1.0,
            iterations: 0,
        };
        let row: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut direct = m.bias;
        for i in 0..5 {
            direct += m.dual_coefs[i] * m.labels[i] * row[i];
        }
        assert!((m.decision(&row).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn zero_decision_predicts_positive() {
        let m = TrainedQsvm {
            dual_coefs: vec![0.0],
            labels: vec![1.0],
            bias: 0.0,
            support_mask: vec![false],
            regularization: 1.0,
            iterations: 0,
        };
        assert_eq!(m.predict(&kernel(DMatrix::from_element(1, 1, 0.3))).unwrap(), vec![1.0]);
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[1.0, -1.0], &[1.0, -1.0]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1.0, -1.0], &[-1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(accuracy(&[1.0, 1.0, 1.0, -1.0], &[1.0, 1.0, 1.0, 1.0]).unwrap(), 0.75);
        assert!(accuracy(&[], &[]).is_err());
        assert!(accuracy(&[1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn input_validation() {
        let k = kernel(DMatrix::identity(3, 3));
        let cfg = SvmConfig::default();
        assert!(matches!(fit(&k, &[1.0, 1.0, 1.0], &cfg), Err(Error::Training(_))));
        let mut bad = DMatrix::identity(2, 2);
        bad[(0, 1)] = f64::NAN;
        assert!(matches!(fit(&kernel(bad), &[1.0, -1.0], &cfg), Err(Error::Input(_))));
        assert!(fit(&k, &[1.0, -1.0], &cfg).is_err());
        assert!(fit(&k, &[1.0, -1.0, 0.0], &cfg).is_err());
        let bad_cfg = SvmConfig { c: 0.0, ..cfg };
        assert!(matches!(fit(&k, &[1.0, -1.0, 1.0], &bad_cfg), Err(Error::Config(_))));
    }

    #[test]
    fn kkt_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let n = rng.gen_range(2..=30);
            let rank = rng.gen_range(1..=6);
            let k = random_gram(&mut rng, n, rank);
            let mut y: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
            y[0] = 1.0;
            y[1] = -1.0;
            let cfg = SvmConfig { c: rng.gen_range(0.1..10.0), ..SvmConfig::default() };
            let m = fit(&k, &y, &cfg).unwrap();
            check_kkt(&m, &k, 1e-4);
            assert_eq!(m, fit(&k, &y, &cfg).unwrap());
        }
    }

    #[test]
    fn scaling_kernel_and_c_preserves_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let x: Vec<f64> = (0..16).map(|i| if i < 8 { -1.0 - rng.gen_range(0.0..1.0) } else { 1.0 + rng.gen_range(0.0..1.0) }).collect();
        let y: Vec<f64> = (0..16).map(|i| if i < 8 { -1.0 } else { 1.0 }).collect();
        let k = kernel(DMatrix::from_fn(16, 16, |i, j| (0.4 * (x[i] - x[j])).cos()));
        let base = fit(&k, &y, &SvmConfig { c: 10.0, ..SvmConfig::default() }).unwrap();
        let scaled_k = kernel(k.values() * 3.0);
        let scaled = fit(&scaled_k, &y, &SvmConfig { c: 10.0 / 3.0, ..SvmConfig::default() }).unwrap();
        assert_eq!(base.predict(&k).unwrap(), scaled.predict(&scaled_k).unwrap());
        assert_eq!(base.predict(&k).unwrap(), y);
    }

    #[test]
    fn psd_clamp() {
        let mut ok = kernel(DMatrix::identity(3, 3));
        assert_eq!(clamp_psd(&mut ok).unwrap(), 0.0);
        let mut slight = kernel(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -5e-7])));
        let shift = clamp_psd(&mut slight).unwrap();
        assert!((shift - 5e-7).abs() < 1e-15);
        assert!(slight.min_eigenvalue().unwrap() >= -1e-15);
        let mut broken = kernel(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1e-3])));
        assert!(matches!(clamp_psd(&mut broken), Err(Error::Numerical(_))));
    }
}
