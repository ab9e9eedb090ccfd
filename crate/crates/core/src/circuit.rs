//! Ideal statevector simulation of decoded feature maps.
//!
//! Qubit 0 is the most significant bit of the basis index, so `|10⟩` is
//! qubit 0 set. Genome rotations use `exp(−i·a·σ)` with `a = θ·x_k` for
//! parameterized gates and `a = θ` for fixed ones.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::{Axis, CircuitGenome, GateKind};
use crate::reduce::FeatureMatrix;

/// Simulation is dense; beyond this the statevector stops being desk-sized.
pub const MAX_QUBITS: usize = 16;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A 2×2 complex matrix in row-major order.
pub type Matrix2 = [[Complex64; 2]; 2];

/// `exp(−i·a·σ_axis) = cos a·I − i sin a·σ_axis`.
pub fn rotation_matrix(axis: Axis, a: f64) -> Matrix2 {
    let (s, c) = a.sin_cos();
    match axis {
        Axis::X => [
            [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
            [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
        ],
        Axis::Y => [
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ],
        Axis::Z => [
            [Complex64::new(c, -s), ZERO],
            [ZERO, Complex64::new(c, s)],
        ],
    }
}

/// Textbook half-angle rotations `R_axis(θ) = exp(−i·θ/2·σ_axis)`.
pub fn standard_rotation(axis: Axis, theta: f64) -> Matrix2 {
    rotation_matrix(axis, theta / 2.0)
}

/// The two-qubit CNOT in the `|00⟩, |01⟩, |10⟩, |11⟩` basis, control first.
pub const CNOT_MATRIX: [[f64; 4]; 4] = [
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, 1.0, 0.0],
];

pub fn matmul2(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Dense pure state of `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(qubits: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << qubits];
        amplitudes[0] = ONE;
        StateVector { qubits, amplitudes }
    }

    /// Computational basis state with the given index.
    pub fn basis(qubits: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << qubits];
        amplitudes[index] = ONE;
        StateVector { qubits, amplitudes }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::Input(format!(
                "statevector length {len} is not a power of two"
            )));
        }
        Ok(StateVector {
            qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `Re⟨self|other⟩`, exactly symmetric in its arguments.
    pub fn overlap_re(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.qubits - 1 - qubit)
    }

    pub fn apply_single(&mut self, qubit: usize, m: &Matrix2) {
        let mask = self.mask(qubit);
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let j = i | mask;
                let (a, b) = (self.amplitudes[i], self.amplitudes[j]);
                self.amplitudes[i] = m[0][0] * a + m[0][1] * b;
                self.amplitudes[j] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        let (cm, tm) = (self.mask(control), self.mask(target));
        for i in 0..self.amplitudes.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amplitudes.swap(i, i | tm);
            }
        }
    }
}

/// One executable gate of a feature map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateOp {
    Rotation {
        qubit: usize,
        axis: Axis,
        /// Encoded angle `n·π/8`.
        theta: f64,
        /// Input feature multiplying `theta`, if parameterized.
        feature: Option<usize>,
    },
    Cnot {
        control: usize,
        target: usize,
    },
}

impl GateOp {
    /// Rotation argument `a` of `exp(−i·a·σ)` for input `x`.
    fn rotation_argument(theta: f64, feature: Option<usize>, x: &[f64]) -> f64 {
        match feature {
            Some(k) => theta * x[k],
            None => theta,
        }
    }
}

/// Applies one op to a state. Parameterized rotations read their feature from `x`.
pub fn apply_gate(state: &mut StateVector, op: &GateOp, x: &[f64]) {
    match *op {
        GateOp::Rotation {
            qubit,
            axis,
            theta,
            feature,
        } => {
            let a = GateOp::rotation_argument(theta, feature, x);
            state.apply_single(qubit, &rotation_matrix(axis, a));
        }
        GateOp::Cnot { control, target } => state.apply_cnot(control, target),
    }
}

/// Gate counts of a decoded grid; they always sum to `M·N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Census {
    pub n_local: usize,
    pub n_cnot: usize,
    pub n_identity: usize,
}

impl Census {
    pub fn total(&self) -> usize {
        self.n_local + self.n_cnot + self.n_identity
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct PlacedOp {
    layer: usize,
    op: GateOp,
}

/// Executable feature map `U(x; θ)` built from a genome.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMapCircuit {
    qubits: usize,
    layers: usize,
    input_dim: usize,
    ops: Vec<PlacedOp>,
    census: Census,
}

/// Decodes a genome into an executable circuit over `input_dim` features.
///
/// Cells are scanned layer by layer, top to bottom. The k-th parameterized
/// rotation reads feature `k mod input_dim`. A CNOT gene on row `i` targets
/// row `(i + 1) mod M`; on a single qubit it degrades to identity.
pub fn build_feature_map(genome: &CircuitGenome, input_dim: usize) -> Result<FeatureMapCircuit> {
    if input_dim == 0 {
        return Err(Error::Config("feature map needs at least one input feature".into()));
    }
    let qubits = genome.qubits();
    if qubits > MAX_QUBITS {
        return Err(Error::Config(format!(
            "{qubits} qubits exceeds the simulator limit of {MAX_QUBITS}"
        )));
    }
    let mut ops = Vec::new();
    let mut census = Census::default();
    let mut param_count = 0usize;
    for (qubit, layer, gene) in genome.cells() {
        let op = match gene.kind {
            GateKind::Identity => None,
            GateKind::Cnot if qubits == 1 => None,
            GateKind::Cnot => Some(GateOp::Cnot {
                control: qubit,
                target: (qubit + 1) % qubits,
            }),
            kind => {
                let feature = kind.is_param().then(|| {
                    let k = param_count % input_dim;
                    param_count += 1;
                    k
                });
                Some(GateOp::Rotation {
                    qubit,
                    axis: kind.axis().expect("rotation kinds carry an axis"),
                    theta: gene.angle.radians(),
                    feature,
                })
            }
        };
        match op {
            None => census.n_identity += 1,
            Some(GateOp::Cnot { .. }) => census.n_cnot += 1,
            Some(GateOp::Rotation { .. }) => census.n_local += 1,
        }
        if let Some(op) = op {
            ops.push(PlacedOp { layer, op });
        }
    }
    Ok(FeatureMapCircuit {
        qubits,
        layers: genome.layers(),
        input_dim,
        ops,
        census,
    })
}

impl FeatureMapCircuit {
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn census(&self) -> Census {
        self.census
    }

    pub fn ops(&self) -> impl Iterator<Item = &GateOp> + '_ {
        self.ops.iter().map(|p| &p.op)
    }

    /// Feature index of each parameterized rotation, in execution order.
    pub fn feature_indices(&self) -> Vec<usize> {
        self.ops()
            .filter_map(|op| match op {
                GateOp::Rotation { feature, .. } => *feature,
                GateOp::Cnot { .. } => None,
            })
            .collect()
    }

    pub fn is_entanglement_free(&self) -> bool {
        self.census.n_cnot == 0
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim {
            return Err(Error::Input(format!(
                "feature vector has {} entries, circuit expects {}",
                x.len(),
                self.input_dim
            )));
        }
        Ok(())
    }

    /// `|Φ(x)⟩ = U(x; θ)|0…0⟩`.
    pub fn evaluate_state(&self, x: &[f64]) -> Result<StateVector> {
        self.check_input(x)?;
        let mut state = StateVector::zero(self.qubits);
        for op in self.ops() {
            apply_gate(&mut state, op, x);
        }
        Ok(state)
    }

    /// `Re⟨Φ(x)|Φ(x′)⟩`.
    pub fn kernel(&self, x: &[f64], x_prime: &[f64]) -> Result<f64> {
        let a = self.evaluate_state(x)?;
        let b = self.evaluate_state(x_prime)?;
        Ok(a.overlap_re(&b))
    }

    /// Per-qubit factorized kernel `Re ∏_i ⟨φ_i(x)|φ_i(x′)⟩`.
    ///
    /// Only valid without CNOTs; each row is simulated as an independent
    /// two-level system.
    pub fn product_kernel(&self, x: &[f64], x_prime: &[f64]) -> Result<f64> {
        if !self.is_entanglement_free() {
            return Err(Error::Input(format!(
                "product kernel requires an entanglement-free circuit, found {} CNOTs",
                self.census.n_cnot
            )));
        }
        self.check_input(x)?;
        self.check_input(x_prime)?;
        let mut rows_a = vec![StateVector::zero(1); self.qubits];
        let mut rows_b = vec![StateVector::zero(1); self.qubits];
        for op in self.ops() {
            if let GateOp::Rotation {
                qubit,
                axis,
                theta,
                feature,
            } = *op
            {
                let ma = rotation_matrix(axis, GateOp::rotation_argument(theta, feature, x));
                let mb = rotation_matrix(axis, GateOp::rotation_argument(theta, feature, x_prime));
                rows_a[qubit].apply_single(0, &ma);
                rows_b[qubit].apply_single(0, &mb);
            }
        }
        let product = rows_a
            .iter()
            .zip(&rows_b)
            .fold(ONE, |acc, (a, b)| acc * a.inner(b));
        Ok(product.re)
    }

    /// `(N_local + 2·N_CNOT + 0·N_I) / M`.
    pub fn complexity(&self) -> f64 {
        (self.census.n_local + 2 * self.census.n_cnot) as f64 / self.qubits as f64
    }

    fn states(&self, points: &FeatureMatrix) -> Result<Vec<StateVector>> {
        (0..points.nrows())
            .into_par_iter()
            .map(|i| self.evaluate_state(points.row(i)))
            .collect()
    }

    /// Self Gram matrix; every state is simulated once.
    pub fn gram_matrix(&self, points: &FeatureMatrix) -> Result<KernelMatrix> {
        let states = self.states(points)?;
        let n = states.len();
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| (i..n).map(|j| states[i].overlap_re(&states[j])).collect())
            .collect();
        let mut values = DMatrix::zeros(n, n);
        for (i, row) in rows.into_iter().enumerate() {
            for (off, v) in row.into_iter().enumerate() {
                values[(i, i + off)] = v;
                values[(i + off, i)] = v;
            }
        }
        Ok(KernelMatrix {
            values,
            symmetric: true,
        })
    }

    /// Cross kernel `K[i][j] = k(rows_i, cols_j)`.
    pub fn kernel_matrix(&self, rows: &FeatureMatrix, cols: &FeatureMatrix) -> Result<KernelMatrix> {
        let a = self.states(rows)?;
        let b = self.states(cols)?;
        let flat: Vec<Vec<f64>> = a
            .par_iter()
            .map(|sa| b.iter().map(|sb| sa.overlap_re(sb)).collect())
            .collect();
        let values = DMatrix::from_fn(a.len(), b.len(), |i, j| flat[i][j]);
        Ok(KernelMatrix {
            values,
            symmetric: false,
        })
    }

    /// Text diagram: one line per qubit, one column per layer.
    ///
    /// Parameterized rotations print as `Rx(x3·3π/8)`, fixed ones as
    /// `Rz(5π/4)`, identity as `—`. A CNOT prints `●` on its control row and
    /// prefixes the target row's cell with `⊕`.
    pub fn diagram(&self, genome: &CircuitGenome) -> String {
        let mut cells = vec![vec![String::from("—"); self.layers]; self.qubits];
        let mut targets = vec![vec![false; self.layers]; self.qubits];
        for placed in &self.ops {
            let (row, text) = match placed.op {
                GateOp::Rotation {
                    qubit,
                    axis,
                    feature,
                    ..
                } => {
                    let angle = genome.gene(qubit, placed.layer).angle.label();
                    let name = match axis {
                        Axis::X => "Rx",
                        Axis::Y => "Ry",
                        Axis::Z => "Rz",
                    };
                    let text = match feature {
                        Some(k) => format!("{name}(x{k}·{angle})"),
                        None => format!("{name}({angle})"),
                    };
                    (qubit, text)
                }
                GateOp::Cnot { control, target } => {
                    targets[target][placed.layer] = true;
                    (control, String::from("●"))
                }
            };
            cells[row][placed.layer] = text;
        }
        for (row, flags) in targets.iter().enumerate() {
            for (layer, &hit) in flags.iter().enumerate() {
                if hit {
                    let cell = &cells[row][layer];
                    cells[row][layer] = if cell == "—" {
                        "⊕".to_string()
                    } else {
                        format!("⊕{cell}")
                    };
                }
            }
        }
        let widths: Vec<usize> = (0..self.layers)
            .map(|l| cells.iter().map(|r| r[l].chars().count()).max().unwrap_or(1))
            .collect();
        let mut out = String::new();
        for (q, row) in cells.iter().enumerate() {
            let _ = write!(out, "q{q}: ");
            for (l, cell) in row.iter().enumerate() {
                let pad = widths[l] - cell.chars().count();
                let _ = write!(out, "─{cell}{}─", "─".repeat(pad));
            }
            out.push('\n');
        }
        out
    }
}

/// Precomputed kernel values.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    values: DMatrix<f64>,
    symmetric: bool,
}

impl KernelMatrix {
    pub fn from_matrix(values: DMatrix<f64>) -> Self {
        let symmetric = values.is_square() && values == values.transpose();
        KernelMatrix { values, symmetric }
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }

    /// Smallest eigenvalue of a symmetric kernel.
    pub fn min_eigenvalue(&self) -> Option<f64> {
        if !self.symmetric || self.values.is_empty() {
            return None;
        }
        let eig = nalgebra::SymmetricEigen::new(self.values.clone());
        eig.eigenvalues.iter().copied().reduce(f64::min)
    }

    /// Adds `shift` to the diagonal.
    pub fn shift_diagonal(&mut self, shift: f64) {
        for i in 0..self.values.nrows().min(self.values.ncols()) {
            self.values[(i, i)] += shift;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genome::{AngleStep, GateGene};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn gene(kind: GateKind, step: u8) -> GateGene {
        GateGene::new(kind, AngleStep::new(step).unwrap())
    }

    fn genome(qubits: usize, layers: usize, cells: Vec<GateGene>) -> CircuitGenome {
        CircuitGenome::new(qubits, layers, cells, None).unwrap()
    }

    fn random_genome(rng: &mut ChaCha8Rng, qubits: usize, layers: usize) -> CircuitGenome {
        let cells = (0..qubits * layers)
            .map(|_| GateGene::from_code(rng.gen_range(0..128)))
            .collect();
        genome(qubits, layers, cells)
    }

    fn assert_close(a: Complex64, b: Complex64, tol: f64) {
        assert!((a - b).norm() < tol, "{a} vs {b}");
    }

    #[test]
    fn identity_circuit_is_inert() {
        let g = CircuitGenome::identity(3, 4, None).unwrap();
        let c = build_feature_map(&g, 5).unwrap();
        assert_eq!(c.census(), Census { n_local: 0, n_cnot: 0, n_identity: 12 });
        let s = c.evaluate_state(&[0.3, -0.2, 0.9, 1.0, 0.0]).unwrap();
        assert_eq!(s, StateVector::zero(3));
        assert_eq!(c.complexity(), 0.0);
        assert!((c.kernel(&[1.0; 5], &[-1.0; 5]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sequential_feature_assignment() {
        let g = genome(1, 2, vec![gene(GateKind::RxParam, 2), gene(GateKind::RyParam, 4)]);
        assert_eq!(build_feature_map(&g, 2).unwrap().feature_indices(), vec![0, 1]);
        assert_eq!(build_feature_map(&g, 1).unwrap().feature_indices(), vec![0, 0]);
    }

    #[test]
    fn fixed_rotations_take_no_feature() {
        let g = genome(
            1,
            3,
            vec![gene(GateKind::RxParam, 1), gene(GateKind::RzFixed, 3), gene(GateKind::RyParam, 1)],
        );
        let c = build_feature_map(&g, 4).unwrap();
        assert_eq!(c.feature_indices(), vec![0, 1]);
        assert_eq!(c.census().n_local, 3);
    }

    #[test]
    fn zero_input_dim_rejected() {
        let g = CircuitGenome::identity(1, 1, None).unwrap();
        assert!(build_feature_map(&g, 0).is_err());
    }

    #[test]
    fn cnot_on_basis_states() {
        // Control is qubit 0 (most significant), target qubit 1.
        let expected = [0b00, 0b01, 0b11, 0b10];
        for (input, &out) in expected.iter().enumerate() {
            let mut s = StateVector::basis(2, input);
            s.apply_cnot(0, 1);
            assert_eq!(s, StateVector::basis(2, out));
            // Same thing read off the literal matrix.
            for (row, m) in CNOT_MATRIX.iter().enumerate() {
                assert_eq!(m[input], if row == out { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn cnot_wraps_and_demotes() {
        let g = genome(3, 1, vec![GateGene::identity(), GateGene::identity(), gene(GateKind::Cnot, 1)]);
        let c = build_feature_map(&g, 1).unwrap();
        assert_eq!(c.ops().next(), Some(&GateOp::Cnot { control: 2, target: 0 }));

        let g = genome(1, 1, vec![gene(GateKind::Cnot, 1)]);
        let c = build_feature_map(&g, 1).unwrap();
        assert_eq!(c.census(), Census { n_local: 0, n_cnot: 0, n_identity: 1 });
        assert_eq!(c.ops().count(), 0);
    }

    #[test]
    fn full_turn_is_global_phase() {
        let mut s = StateVector::zero(1);
        s.apply_single(0, &rotation_matrix(Axis::X, PI));
        assert_close(s.amplitudes()[0], Complex64::new(-1.0, 0.0), 1e-15);
        assert_close(s.amplitudes()[1], ZERO, 1e-15);
    }

    #[test]
    fn quarter_turn_closed_form() {
        let a = PI / 4.0;
        let mut s = StateVector::zero(1);
        s.apply_single(0, &rotation_matrix(Axis::X, a));
        assert_close(s.amplitudes()[0], Complex64::new(a.cos(), 0.0), 1e-15);
        assert_close(s.amplitudes()[1], Complex64::new(0.0, -a.sin()), 1e-15);
    }

    /// Truncated power series of `exp(−i·a·σ)`, independent of the closed form.
    fn exp_series(axis: Axis, a: f64) -> Matrix2 {
        let i = Complex64::new(0.0, 1.0);
        let sigma: Matrix2 = match axis {
            Axis::X => [[ZERO, ONE], [ONE, ZERO]],
            Axis::Y => [[ZERO, -i], [i, ZERO]],
            Axis::Z => [[ONE, ZERO], [ZERO, -ONE]],
        };
        let gen: Matrix2 = [
            [sigma[0][0] * -i * a, sigma[0][1] * -i * a],
            [sigma[1][0] * -i * a, sigma[1][1] * -i * a],
        ];
        let mut term: Matrix2 = [[ONE, ZERO], [ZERO, ONE]];
        let mut sum = term;
        for k in 1..60 {
            term = matmul2(&term, &gen);
            for row in term.iter_mut() {
                for c in row.iter_mut() {
                    *c /= k as f64;
                }
            }
            for r in 0..2 {
                for c in 0..2 {
                    sum[r][c] += term[r][c];
                }
            }
        }
        sum
    }

    #[test]
    fn rotations_match_series_exponential() {
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            for a in [-2.5, -0.3, 0.0, 0.7, PI, 4.0] {
                let m = rotation_matrix(axis, a);
                let e = exp_series(axis, a);
                for r in 0..2 {
                    for c in 0..2 {
                        assert_close(m[r][c], e[r][c], 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn half_angle_twice_is_full_angle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let theta = rng.gen_range(-7.0..7.0);
            for axis in [Axis::X, Axis::Y, Axis::Z] {
                let h = standard_rotation(axis, theta);
                let twice = matmul2(&h, &h);
                let full = rotation_matrix(axis, theta);
                for r in 0..2 {
                    for c in 0..2 {
                        assert_close(twice[r][c], full[r][c], 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn single_qubit_kernel_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let step = rng.gen_range(1..=16);
            let g = genome(1, 1, vec![gene(GateKind::RxParam, step)]);
            let c = build_feature_map(&g, 1).unwrap();
            let theta = AngleStep::new(step).unwrap().radians();
            let (x, y) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let s = c.evaluate_state(&[x]).unwrap();
            assert_close(s.amplitudes()[0], Complex64::new((theta * x).cos(), 0.0), 1e-12);
            assert_close(s.amplitudes()[1], Complex64::new(0.0, -(theta * x).sin()), 1e-12);
            let k = c.kernel(&[x], &[y]).unwrap();
            assert!((k - (theta * (x - y)).cos()).abs() < 1e-10);
            assert!((k - c.product_kernel(&[x], &[y]).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn unitarity_and_symmetry_on_random_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            let (m, n, d) = (rng.gen_range(1..=6), rng.gen_range(1..=11), rng.gen_range(1..=8));
            let c = build_feature_map(&random_genome(&mut rng, m, n), d).unwrap();
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut s = StateVector::zero(m);
            for op in c.ops() {
                apply_gate(&mut s, op, &x);
                assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
            }
            let k1 = c.kernel(&x, &y).unwrap();
            let k2 = c.kernel(&y, &x).unwrap();
            assert!((k1 - k2).abs() < 1e-12);
            assert!((c.kernel(&x, &x).unwrap() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn product_kernel_rejects_entangling_circuit() {
        let g = genome(2, 1, vec![gene(GateKind::Cnot, 1), GateGene::identity()]);
        let c = build_feature_map(&g, 1).unwrap();
        assert!(matches!(c.product_kernel(&[0.1], &[0.2]), Err(Error::Input(_))));
    }

    #[test]
    fn input_dimension_checked() {
        let g = genome(1, 1, vec![gene(GateKind::RxParam, 1)]);
        let c = build_feature_map(&g, 2).unwrap();
        assert!(matches!(c.evaluate_state(&[0.1]), Err(Error::Input(_))));
    }

    #[test]
    fn complexity_formula() {
        let g = genome(
            2,
            3,
            vec![
                gene(GateKind::RxParam, 1),
                gene(GateKind::RzFixed, 1),
                gene(GateKind::Cnot, 1),
                GateGene::identity(),
                gene(GateKind::RyFixed, 1),
                GateGene::identity(),
            ],
        );
        let c = build_feature_map(&g, 1).unwrap();
        assert_eq!(c.census(), Census { n_local: 3, n_cnot: 1, n_identity: 2 });
        assert_eq!(c.complexity(), 2.5);

        let full = genome(6, 11, vec![gene(GateKind::RyFixed, 3); 66]);
        assert_eq!(build_feature_map(&full, 1).unwrap().complexity(), 11.0);
    }

    #[test]
    fn identity_substitution_never_increases_complexity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let (m, n) = (rng.gen_range(1..=6), rng.gen_range(1..=11));
            let mut g = random_genome(&mut rng, m, n);
            let before = build_feature_map(&g, 3).unwrap().complexity();
            g.set_gene(rng.gen_range(0..m), rng.gen_range(0..n), GateGene::identity());
            assert!(build_feature_map(&g, 3).unwrap().complexity() <= before);
        }
    }

    #[test]
    fn gram_matrix_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let c = build_feature_map(&random_genome(&mut rng, 3, 4), 3).unwrap();
        let pts = FeatureMatrix::from_fn(5, 3, |_, _| rng.gen_range(-1.0..1.0));
        let k = c.gram_matrix(&pts).unwrap();
        let cross = c.kernel_matrix(&pts, &pts).unwrap();
        for i in 0..5 {
            assert!((k.get(i, i) - 1.0).abs() < 1e-10);
            for j in 0..5 {
                assert_eq!(k.get(i, j), k.get(j, i));
                assert!((k.get(i, j) - cross.get(i, j)).abs() < 1e-14);
            }
        }
        assert!(k.min_eigenvalue().unwrap() >= -1e-8);

        let one = FeatureMatrix::from_fn(1, 3, |_, j| j as f64 * 0.1);
        let k1 = c.gram_matrix(&one).unwrap();
        assert_eq!((k1.nrows(), k1.ncols()), (1, 1));
        assert!((k1.get(0, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagram_cells() {
        let g = genome(
            2,
            2,
            vec![
                gene(GateKind::RxParam, 3),
                gene(GateKind::RzFixed, 10),
                gene(GateKind::Cnot, 1),
                GateGene::identity(),
            ],
        );
        let c = build_feature_map(&g, 4).unwrap();
        let text = c.diagram(&g);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].contains("Rx(x0·3π/8)"));
        assert!(lines[0].contains('●'));
        assert!(lines[1].contains("Rz(5π/4)"));
        assert!(lines[1].contains('⊕'));
    }
}
