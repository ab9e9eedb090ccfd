//! Shared oracles and fixtures for integration and acceptance tests.
#![allow(dead_code)]

use eqiml::circuit::KernelMatrix;
use eqiml::genome::{AngleStep, CircuitGenome, GateGene, GateKind};
use eqiml::svm::TrainedQsvm;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Maximum of the SVM dual `Σα − ½ αᵀQα` subject to `0 ≤ α ≤ c`, `Σ α_i y_i = 0`,
/// found by enumerating every face of the box.
///
/// Each index is pinned at 0, pinned at `c`, or free. On a face the free
/// coordinates solve the equality-constrained KKT system
/// `[Q_FF y_F; y_Fᵀ 0] [α_F; ν] = [1 − c·Q_F,U·1; −c·Σ_U y]`. A pseudo-inverse
/// covers singular faces; solutions that miss the system or leave the box are
/// discarded. The best feasible stationary point over all `3ⁿ` faces is the
/// global optimum of the concave problem.
pub fn qp_oracle(k: &DMatrix<f64>, y: &[f64], c: f64) -> (f64, Vec<f64>) {
    let n = y.len();
    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * k[(i, j)]);
    let objective = |a: &[f64]| {
        let av = DVector::from_column_slice(a);
        a.iter().sum::<f64>() - 0.5 * (av.transpose() * &q * &av)[(0, 0)]
    };
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    let faces = 3usize.pow(n as u32);
    for face in 0..faces {
        // state: 0 → α = 0, 1 → α = c, 2 → free
        let mut code = face;
        let mut state = vec![0u8; n];
        for s in state.iter_mut() {
            *s = (code % 3) as u8;
            code /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let upper: Vec<usize> = (0..n).filter(|&i| state[i] == 1).collect();
        let mut alpha = vec![0.0; n];
        for &u in &upper {
            alpha[u] = c;
        }
        if !free.is_empty() {
            let m = free.len();
            let mut a = DMatrix::zeros(m + 1, m + 1);
            let mut b = DVector::zeros(m + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[(r, s)] = q[(i, j)];
                }
                a[(r, m)] = y[i];
                a[(m, r)] = y[i];
                b[r] = 1.0 - upper.iter().map(|&u| q[(i, u)] * c).sum::<f64>();
            }
            b[m] = -upper.iter().map(|&u| y[u] * c).sum::<f64>();
            let pinv = a.clone().pseudo_inverse(1e-12).expect("pseudo-inverse");
            let sol = &pinv * &b;
            if (&a * &sol - &b).amax() > 1e-9 {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r];
            }
        }
        let eq: f64 = alpha.iter().zip(y).map(|(a, y)| a * y).sum();
        if eq.abs() > 1e-9 || alpha.iter().any(|&a| a < -1e-9 || a > c + 1e-9) {
            continue;
        }
        let value = objective(&alpha);
        if value > best.0 {
            best = (value, alpha);
        }
    }
    best
}

/// Asserts the SVM optimality conditions on the training kernel.
pub fn check_kkt(model: &TrainedQsvm, k: &KernelMatrix, tol: f64) -> Result<(), String> {
    let c = model.regularization;
    let eq: f64 = model.dual_coefs.iter().zip(&model.labels).map(|(a, y)| a * y).sum();
    if eq.abs() > 1e-8 {
        return Err(format!("Σαy = {eq}"));
    }
    for (t, &a) in model.dual_coefs.iter().enumerate() {
        if !(0.0..=c).contains(&a) {
            return Err(format!("α[{t}] = {a} outside [0, {c}]"));
        }
        let margin = model.labels[t] * model.decision(&k.row(t)).map_err(|e| e.to_string())?;
        let ok = if a > 1e-8 && a < c - 1e-8 {
            (margin - 1.0).abs() < tol
        } else if a <= 1e-8 {
            margin > 1.0 - tol
        } else {
            margin < 1.0 + tol
        };
        if !ok {
            return Err(format!("KKT violated at {t}: α = {a}, margin = {margin}"));
        }
    }
    Ok(())
}

pub fn random_gene<R: Rng>(rng: &mut R, allow_cnot: bool) -> GateGene {
    loop {
        let kind = GateKind::from_code(rng.gen_range(0..8));
        if kind == GateKind::Cnot && !allow_cnot {
            continue;
        }
        return GateGene::new(kind, AngleStep::from_code(rng.gen_range(0..16)));
    }
}

pub fn random_genome<R: Rng>(rng: &mut R, qubits: usize, layers: usize, allow_cnot: bool) -> CircuitGenome {
    let grid = (0..qubits * layers).map(|_| random_gene(rng, allow_cnot)).collect();
    CircuitGenome::new(qubits, layers, grid, None).expect("valid grid")
}

pub fn random_point<R: Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()
}
