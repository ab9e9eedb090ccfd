//! Classical comparison model: input → ReLU hidden layer → two-way softmax,
//! trained full-batch with Adam on cross-entropy.

use nalgebra::{DMatrix, DVector, RowDVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reduce::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    /// `input_dim × hidden`
    pub w1: DMatrix<f64>,
    pub b1: DVector<f64>,
    /// `hidden × 2`
    pub w2: DMatrix<f64>,
    pub b2: DVector<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub hidden: usize,
    pub lr: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        MlpConfig {
            hidden: 6,
            lr: 0.01,
            epochs: 100,
            seed: 0,
        }
    }
}

/// Gradients, shaped like the model.
pub type Gradients = MlpModel;

impl MlpModel {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        MlpModel {
            w1: DMatrix::zeros(input_dim, hidden),
            b1: DVector::zeros(hidden),
            w2: DMatrix::zeros(hidden, 2),
            b2: DVector::zeros(2),
        }
    }

    /// Uniform `±1/√fan_in` initialization.
    pub fn init(input_dim: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a1 = 1.0 / (input_dim as f64).sqrt();
        let a2 = 1.0 / (hidden as f64).sqrt();
        let mut u = |a: f64| rng.gen_range(-a..=a);
        MlpModel {
            w1: DMatrix::from_fn(input_dim, hidden, |_, _| u(a1)),
            b1: DVector::from_fn(hidden, |_, _| u(a1)),
            w2: DMatrix::from_fn(hidden, 2, |_, _| u(a2)),
            b2: DVector::from_fn(2, |_, _| u(a2)),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.w1.nrows()
    }

    pub fn hidden(&self) -> usize {
        self.w1.ncols()
    }

    fn params_mut(&mut self) -> [&mut [f64]; 4] {
        [
            self.w1.as_mut_slice(),
            self.b1.as_mut_slice(),
            self.w2.as_mut_slice(),
            self.b2.as_mut_slice(),
        ]
    }

    fn params(&self) -> [&[f64]; 4] {
        [
            self.w1.as_slice(),
            self.b1.as_slice(),
            self.w2.as_slice(),
            self.b2.as_slice(),
        ]
    }

    /// Class probabilities for one input.
    pub fn forward(&self, x: &[f64]) -> Result<[f64; 2]> {
        if x.len() != self.input_dim() {
            return Err(Error::Input(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.input_dim()
            )));
        }
        let row = RowDVector::from_row_slice(x);
        let hidden = (row * &self.w1 + self.b1.transpose()).map(|v| v.max(0.0));
        let logits = hidden * &self.w2 + self.b2.transpose();
        Ok(softmax2(logits[0], logits[1]))
    }
}

fn softmax2(a: f64, b: f64) -> [f64; 2] {
    let m = a.max(b);
    let (ea, eb) = ((a - m).exp(), (b - m).exp());
    let s = ea + eb;
    [ea / s, eb / s]
}

/// Mean cross-entropy over the batch and its gradient.
pub fn loss_and_grad(model: &MlpModel, x: &DMatrix<f64>, labels: &[u8]) -> (f64, Gradients) {
    let n = x.nrows() as f64;
    let ones = DVector::from_element(x.nrows(), 1.0);
    let z1 = x * &model.w1 + &ones * model.b1.transpose();
    let a1 = z1.map(|v| v.max(0.0));
    let z2 = &a1 * &model.w2 + &ones * model.b2.transpose();
    let mut loss = 0.0;
    let mut dz2 = DMatrix::zeros(x.nrows(), 2);
    for i in 0..x.nrows() {
        let p = softmax2(z2[(i, 0)], z2[(i, 1)]);
        let y = labels[i] as usize;
        loss -= p[y].max(f64::MIN_POSITIVE).ln();
        for c in 0..2 {
            dz2[(i, c)] = (p[c] - if c == y { 1.0 } else { 0.0 }) / n;
        }
    }
    let w2 = a1.transpose() * &dz2;
    let b2 = dz2.row_sum().transpose();
    let mut dz1 = &dz2 * model.w2.transpose();
    dz1.zip_apply(&z1, |g, z| {
        if z <= 0.0 {
            *g = 0.0
        }
    });
    let w1 = x.transpose() * &dz1;
    let b1 = dz1.row_sum().transpose();
    (loss / n, MlpModel { w1, b1, w2, b2 })
}

/// Adam moment estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: MlpModel,
    v: MlpModel,
    step: i32,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(input_dim: usize, hidden: usize) -> Self {
        AdamState {
            m: MlpModel::zeros(input_dim, hidden),
            v: MlpModel::zeros(input_dim, hidden),
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }

    pub fn update(&mut self, model: &mut MlpModel, grad: &Gradients, lr: f64) {
        self.step += 1;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.eps);
        let c1 = 1.0 - b1.powi(self.step);
        let c2 = 1.0 - b2.powi(self.step);
        let params = model.params_mut();
        let ms = self.m.params_mut();
        let vs = self.v.params_mut();
        for (((p, m), v), g) in params.into_iter().zip(ms).zip(vs).zip(grad.params()) {
            for k in 0..p.len() {
                m[k] = b1 * m[k] + (1.0 - b1) * g[k];
                v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
                p[k] -= lr * (m[k] / c1) / ((v[k] / c2).sqrt() + eps);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedMlp {
    pub model: MlpModel,
    /// Loss before each epoch's update.
    pub losses: Vec<f64>,
}

/// Full-batch training on labeled rows.
pub fn train(data: &FeatureMatrix, config: &MlpConfig) -> Result<TrainedMlp> {
    let labels = data
        .labels()
        .ok_or_else(|| Error::Input("MLP training data is unlabeled".into()))?;
    if data.nrows() == 0 || config.hidden == 0 {
        return Err(Error::Input("MLP needs samples and at least one hidden unit".into()));
    }
    let x = data.to_dmatrix();
    let mut model = MlpModel::init(data.ncols(), config.hidden, config.seed);
    let mut adam = AdamState::new(data.ncols(), config.hidden);
    let mut losses = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let (loss, grad) = loss_and_grad(&model, &x, labels);
        losses.push(loss);
        adam.update(&mut model, &grad, config.lr);
    }
    Ok(TrainedMlp { model, losses })
}

/// Argmax accuracy on labeled rows (ties go to class 0).
pub fn evaluate(model: &MlpModel, data: &FeatureMatrix) -> Result<f64> {
    let labels = data
        .labels()
        .ok_or_else(|| Error::Input("evaluation data is unlabeled".into()))?;
    if labels.is_empty() {
        return Err(Error::Input("evaluation data is empty".into()));
    }
    let mut hits = 0;
    for (i, &y) in labels.iter().enumerate() {
        let p = model.forward(data.row(i))?;
        let pred = u8::from(p[1] > p[0]);
        hits += usize::from(pred == y);
    }
    Ok(hits as f64 / labels.len() as f64)
}
