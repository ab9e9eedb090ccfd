//! Feature preprocessing: min-max standardization, PCA, stratified splits and
//! feature-file ingestion.

use std::path::Path;

use log::{info, warn};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of the label column in feature CSV files.
pub const LABEL_COLUMN: &str = "label";

/// Dense row-major sample matrix with optional binary labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
    labels: Option<Vec<u8>>,
}

impl FeatureMatrix {
    pub fn new(nrows: usize, ncols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != nrows * ncols {
            return Err(Error::Input(format!(
                "{} values do not fill a {nrows}×{ncols} matrix",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite value at row {}, column {}",
                i / ncols.max(1),
                i % ncols.max(1)
            )));
        }
        Ok(FeatureMatrix {
            nrows,
            ncols,
            data,
            labels: None,
        })
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        FeatureMatrix {
            nrows,
            ncols,
            data,
            labels: None,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != ncols) {
            return Err(Error::Input(format!(
                "row {i} has {} columns, expected {ncols}",
                rows[i].len()
            )));
        }
        Self::new(rows.len(), ncols, rows.concat())
    }

    pub fn with_labels(mut self, labels: Vec<u8>) -> Result<Self> {
        if labels.len() != self.nrows {
            return Err(Error::Input(format!(
                "{} labels for {} rows",
                labels.len(),
                self.nrows
            )));
        }
        if let Some(i) = labels.iter().position(|&l| l > 1) {
            return Err(Error::Input(format!(
                "row {i} has label {}, expected 0 or 1",
                labels[i]
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.ncols + j]
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    /// Labels as `±1` (class 1 → +1, class 0 → −1).
    pub fn signed_labels(&self) -> Option<Vec<f64>> {
        self.labels
            .as_ref()
            .map(|l| l.iter().map(|&c| if c == 1 { 1.0 } else { -1.0 }).collect())
    }

    /// Rows at `indices`, in that order, labels included.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.ncols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            nrows: indices.len(),
            ncols: self.ncols,
            data,
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
        }
    }

    /// The first `k` columns.
    pub fn leading_columns(&self, k: usize) -> FeatureMatrix {
        let k = k.min(self.ncols);
        let mut m = FeatureMatrix::from_fn(self.nrows, k, |i, j| self.get(i, j));
        m.labels = self.labels.clone();
        m
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.nrows, self.ncols, &self.data)
    }

    fn from_dmatrix(m: &DMatrix<f64>, labels: Option<Vec<u8>>) -> FeatureMatrix {
        let mut out = FeatureMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
        out.labels = labels;
        out
    }

    /// Samples per class `[class 0, class 1]`.
    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0, 0];
        for &l in self.labels.iter().flatten() {
            counts[l as usize] += 1;
        }
        counts
    }
}

/// Per-feature training range for `[−1, 1]` scaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// Records per-feature minima and maxima over the training rows.
pub fn standardize_fit(train: &FeatureMatrix) -> Result<StandardizationParams> {
    if train.nrows() == 0 {
        return Err(Error::Input("cannot standardize an empty training set".into()));
    }
    let mut min = train.row(0).to_vec();
    let mut max = min.clone();
    for i in 1..train.nrows() {
        for (j, &v) in train.row(i).iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    Ok(StandardizationParams { min, max })
}

/// Maps the training range of every feature onto `[−1, 1]`.
///
/// Constant features map to 0; values outside the training range are
/// extended affinely, not clipped.
pub fn standardize_apply(params: &StandardizationParams, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    if x.ncols() != params.min.len() {
        return Err(Error::Input(format!(
            "matrix has {} features, standardization was fit on {}",
            x.ncols(),
            params.min.len()
        )));
    }
    let mut out = FeatureMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
        let (lo, hi) = (params.min[j], params.max[j]);
        if hi > lo {
            2.0 * (x.get(i, j) - lo) / (hi - lo) - 1.0
        } else {
            0.0
        }
    });
    out.labels = x.labels.clone();
    Ok(out)
}

/// Principal axes fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    mean: Vec<f64>,
    /// `r × d`, orthonormal rows.
    components: DMatrix<f64>,
    explained_variance: Vec<f64>,
    total_variance: f64,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn components(&self) -> &DMatrix<f64> {
        &self.components
    }

    /// Non-increasing variances along each component.
    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    /// Total variance of the centered training data (all directions).
    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    /// Keeps only the leading `r` components (clamped to what is available).
    pub fn truncated(&self, r: usize) -> PcaModel {
        let r = r.clamp(1, self.n_components());
        PcaModel {
            mean: self.mean.clone(),
            components: self.components.rows(0, r).into_owned(),
            explained_variance: self.explained_variance[..r].to_vec(),
            total_variance: self.total_variance,
        }
    }
}

/// Largest component count PCA can deliver for `n` samples of `d` features.
pub fn max_components(n: usize, d: usize) -> usize {
    n.saturating_sub(1).min(d).max(1)
}

/// PCA by singular value decomposition of the centered training matrix.
///
/// Requests above `min(n − 1, d)` are clamped (and logged) rather than
/// rejected.
pub fn pca_fit(train: &FeatureMatrix, r: usize) -> Result<PcaModel> {
    let (n, d) = (train.nrows(), train.ncols());
    if n < 2 || d == 0 {
        return Err(Error::Input(format!("PCA needs at least 2 samples and 1 feature, got {n}×{d}")));
    }
    let limit = max_components(n, d);
    let r = if r == 0 || r > limit {
        info!("requested {r} principal components, clamping to {limit}");
        r.clamp(1, limit)
    } else {
        r
    };
    let mut x = train.to_dmatrix();
    let mean: Vec<f64> = (0..d).map(|j| x.column(j).mean()).collect();
    for (j, mut col) in x.column_iter_mut().enumerate() {
        col.add_scalar_mut(-mean[j]);
    }
    let total_variance = x.iter().map(|v| v * v).sum::<f64>() / (n - 1) as f64;

    // Right singular vectors of X are the left singular vectors of Xᵀ;
    // decompose whichever orientation is tall.
    let (singular, axes) = if d > n {
        let svd = x.transpose().svd(true, false);
        let u = svd
            .u
            .ok_or_else(|| Error::Numerical("SVD did not return singular vectors".into()))?;
        (svd.singular_values, u.transpose())
    } else {
        let svd = x.svd(false, true);
        let v_t = svd
            .v_t
            .ok_or_else(|| Error::Numerical("SVD did not return singular vectors".into()))?;
        (svd.singular_values, v_t)
    };
    let mut order: Vec<usize> = (0..singular.len()).collect();
    order.sort_by(|&a, &b| singular[b].total_cmp(&singular[a]).then(a.cmp(&b)));
    let order = &order[..r];

    let mut components = DMatrix::zeros(r, d);
    for (row, &k) in order.iter().enumerate() {
        let mut axis = axes.row(k).into_owned();
        // Sign convention: largest-magnitude loading is positive.
        let pivot = axis.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        if pivot < 0.0 {
            axis.neg_mut();
        }
        components.set_row(row, &axis);
    }
    let explained_variance = order
        .iter()
        .map(|&k| singular[k] * singular[k] / (n - 1) as f64)
        .collect();
    Ok(PcaModel {
        mean,
        components,
        explained_variance,
        total_variance,
    })
}

/// `(X − mean)·componentsᵀ`.
pub fn pca_transform(model: &PcaModel, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    if x.ncols() != model.input_dim() {
        return Err(Error::Input(format!(
            "matrix has {} features, PCA was fit on {}",
            x.ncols(),
            model.input_dim()
        )));
    }
    let mut centered = x.to_dmatrix();
    for (j, mut col) in centered.column_iter_mut().enumerate() {
        col.add_scalar_mut(-model.mean[j]);
    }
    let projected = centered * model.components.transpose();
    Ok(FeatureMatrix::from_dmatrix(&projected, x.labels.clone()))
}

/// Train/test row indices, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per-class test counts for a stratified split.
///
/// The overall test size is `round(n·f)`; each class first gets
/// `floor(n_c·f)` and the remainder goes one sample at a time to the largest
/// classes (ties to the lower class id).
pub fn stratified_test_counts(class_sizes: &[usize], test_fraction: f64) -> Vec<usize> {
    let n: usize = class_sizes.iter().sum();
    let target = (n as f64 * test_fraction).round() as usize;
    let mut counts: Vec<usize> = class_sizes
        .iter()
        .map(|&c| (c as f64 * test_fraction).floor() as usize)
        .collect();
    let mut order: Vec<usize> = (0..class_sizes.len()).collect();
    order.sort_by(|&a, &b| class_sizes[b].cmp(&class_sizes[a]).then(a.cmp(&b)));
    let mut remainder = target.saturating_sub(counts.iter().sum());
    for &c in order.iter().cycle().take(order.len()) {
        if remainder == 0 {
            break;
        }
        // Keep at least one training sample per class.
        if counts[c] + 1 < class_sizes[c] {
            counts[c] += 1;
            remainder -= 1;
        }
    }
    counts
}

/// Stratified, seeded train/test partition.
pub fn stratified_split(labels: &[u8], test_fraction: f64, seed: u64) -> Result<Split> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::Config(format!("test fraction {test_fraction} outside [0, 1)")));
    }
    let classes = labels.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &l) in labels.iter().enumerate() {
        members[l as usize].push(i);
    }
    if members.len() < 2 {
        return Err(Error::Input("stratified split needs two classes".into()));
    }
    for (class, m) in members.iter().enumerate() {
        if m.len() < 2 {
            return Err(Error::Input(format!(
                "class {class} has {} samples, at least 2 are required",
                m.len()
            )));
        }
    }
    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    let counts = stratified_test_counts(&sizes, test_fraction);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (mut m, count) in members.into_iter().zip(counts) {
        m.shuffle(&mut rng);
        test.extend_from_slice(&m[..count]);
        train.extend_from_slice(&m[count..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

/// Reads a feature CSV: header row, one sample per row, label in the final
/// column named `label`.
pub fn load_external_features(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_feature_csv(file, &path.display().to_string())
}

pub(crate) fn read_feature_csv<R: std::io::Read>(reader: R, source: &str) -> Result<FeatureMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Input(format!("{source}: cannot read header: {e}")))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Input(format!("{source}: file is empty")));
    }
    if headers.len() < 2 || &headers[headers.len() - 1] != LABEL_COLUMN {
        return Err(Error::Input(format!(
            "{source}: header must end with a '{LABEL_COLUMN}' column after at least one feature"
        )));
    }
    let width = headers.len();
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Input(format!("{source}: row {row}: {e}")))?;
        if record.len() != width {
            return Err(Error::Input(format!(
                "{source}: row {row} has {} columns, expected {width} ({} features + label)",
                record.len(),
                width - 1
            )));
        }
        for (col, field) in record.iter().take(width - 1).enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::Input(format!("{source}: row {row}, column {col}: cannot parse {field:?}"))
            })?;
            if !v.is_finite() {
                return Err(Error::Input(format!("{source}: row {row}, column {col}: non-finite value")));
            }
            data.push(v);
        }
        let label = match &record[width - 1] {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::Input(format!(
                    "{source}: row {row}: unknown label {other:?}, expected 0 or 1"
                )))
            }
        };
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(Error::Input(format!("{source}: no data rows")));
    }
    FeatureMatrix::new(labels.len(), width - 1, data)?.with_labels(labels)
}

/// Writes a labeled matrix in the format read by [`load_external_features`].
pub fn write_feature_csv(path: impl AsRef<Path>, x: &FeatureMatrix) -> Result<()> {
    let path = path.as_ref();
    let labels = x
        .labels()
        .ok_or_else(|| Error::Input("cannot write an unlabeled feature file".into()))?;
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    let mut header: Vec<String> = (0..x.ncols()).map(|j| format!("f{j}")).collect();
    header.push(LABEL_COLUMN.to_string());
    w.write_record(&header).map_err(|e| csv_io(path, e))?;
    for (i, label) in labels.iter().enumerate() {
        let mut rec: Vec<String> = x.row(i).iter().map(|v| v.to_string()).collect();
        rec.push(label.to_string());
        w.write_record(&rec).map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => {
            warn!("csv error on {}: {other:?}", path.display());
            Error::Input(format!("{}: {other:?}", path.display()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn random_matrix(n: usize, d: usize, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FeatureMatrix::from_fn(n, d, |_, _| rng.gen_range(-2.0..2.0))
    }

    #[test]
    fn standardize_endpoints_and_extension() {
        let train = FeatureMatrix::from_rows(&[vec![0.0, 3.0], vec![10.0, 3.0], vec![5.0, 3.0]]).unwrap();
        let p = standardize_fit(&train).unwrap();
        let s = standardize_apply(&p, &train).unwrap();
        assert_eq!(s.row(0), &[-1.0, 0.0]);
        assert_eq!(s.row(1), &[1.0, 0.0]);
        assert_eq!(s.row(2), &[0.0, 0.0]);
        let test = FeatureMatrix::from_rows(&[vec![15.0, 7.0]]).unwrap();
        assert_eq!(standardize_apply(&p, &test).unwrap().row(0), &[2.0, 0.0]);
    }

    #[test]
    fn standardize_rejects_empty_and_mismatch() {
        assert!(standardize_fit(&FeatureMatrix::from_fn(0, 3, |_, _| 0.0)).is_err());
        let p = standardize_fit(&random_matrix(4, 3, 1)).unwrap();
        assert!(standardize_apply(&p, &random_matrix(2, 2, 1)).is_err());
    }

    #[test]
    fn rank_one_data_has_one_direction() {
        let train = FeatureMatrix::from_fn(6, 2, |i, j| if j == 0 { i as f64 } else { 2.0 * i as f64 + 1.0 });
        let m = pca_fit(&train, 1).unwrap();
        assert!((m.explained_variance()[0] / m.total_variance() - 1.0).abs() < 1e-12);
        let c = m.components();
        assert!((c[(0, 0)] - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!((c[(0, 1)] - 2.0 / 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn full_rank_transform_is_isometry() {
        let x = random_matrix(12, 5, 2);
        let m = pca_fit(&x, 5).unwrap();
        let z = pca_transform(&m, &x).unwrap();
        for a in 0..12 {
            for b in 0..12 {
                let d0: f64 = x.row(a).iter().zip(x.row(b)).map(|(p, q)| (p - q).powi(2)).sum();
                let d1: f64 = z.row(a).iter().zip(z.row(b)).map(|(p, q)| (p - q).powi(2)).sum();
                assert!((d0.sqrt() - d1.sqrt()).abs() < 1e-8);
            }
        }
    }

    fn reconstruction_error(x: &FeatureMatrix, m: &PcaModel) -> f64 {
        let z = pca_transform(m, x).unwrap().to_dmatrix();
        let back = z * m.components();
        let mut err = 0.0;
        for i in 0..x.nrows() {
            for j in 0..x.ncols() {
                err += (x.get(i, j) - m.mean()[j] - back[(i, j)]).powi(2);
            }
        }
        err
    }

    #[test]
    fn reconstruction_error_non_increasing() {
        let x = random_matrix(20, 10, 3);
        let errors: Vec<f64> = (1..=10).map(|r| reconstruction_error(&x, &pca_fit(&x, r).unwrap())).collect();
        for w in errors.windows(2) {
            assert!(w[1] <= w[0] + 1e-10, "{errors:?}");
        }
        assert!(errors[9] < 1e-12);
    }

    #[test]
    fn wide_matrix_uses_transposed_path() {
        let x = random_matrix(6, 40, 4);
        let m = pca_fit(&x, 10).unwrap();
        assert_eq!(m.n_components(), 5);
        let gram = m.components() * m.components().transpose();
        assert!((gram - DMatrix::identity(5, 5)).abs().max() < 1e-8);
        let tall = pca_fit(&random_matrix(40, 6, 4), 3).unwrap();
        assert_eq!(tall.n_components(), 3);
    }

    #[test]
    fn truncation_matches_direct_fit() {
        let x = random_matrix(15, 8, 5);
        let full = pca_fit(&x, 8).unwrap();
        let direct = pca_fit(&x, 3).unwrap();
        let cut = full.truncated(3);
        assert!((cut.components() - direct.components()).abs().max() < 1e-12);
        assert_eq!(cut.explained_variance(), direct.explained_variance());
    }

    #[test]
    fn split_exact_proportions() {
        let labels: Vec<u8> = (0..100).map(|i| u8::from(i >= 60)).collect();
        let s = stratified_split(&labels, 0.25, 9).unwrap();
        let test1 = s.test.iter().filter(|&&i| labels[i] == 1).count();
        assert_eq!(s.test.len() - test1, 15);
        assert_eq!(test1, 10);
        assert_eq!(s, stratified_split(&labels, 0.25, 9).unwrap());
        assert_ne!(s, stratified_split(&labels, 0.25, 10).unwrap());
    }

    /// Enumerates small class sizes and checks the documented rounding rule
    /// against an explicit reimplementation.
    #[test]
    fn split_rounding_rule_small_cases() {
        assert_eq!(stratified_test_counts(&[4, 4], 0.25), vec![1, 1]);
        assert_eq!(stratified_test_counts(&[5, 3], 0.25), vec![2, 0]);
        assert_eq!(stratified_test_counts(&[7, 3], 0.25), vec![2, 1]);
        assert_eq!(stratified_test_counts(&[2, 2], 0.25), vec![1, 0]);
        for a in 2..30usize {
            for b in 2..30usize {
                let c = stratified_test_counts(&[a, b], 0.25);
                let fa = a as f64 * 0.25;
                let fb = b as f64 * 0.25;
                assert!(c[0] as f64 >= fa.floor() && c[0] as f64 <= fa.floor() + 1.0);
                assert!(c[1] as f64 >= fb.floor() && c[1] as f64 <= fb.floor() + 1.0);
                assert!(c[0] < a && c[1] < b);
                let target = ((a + b) as f64 * 0.25).round() as usize;
                assert_eq!(c[0] + c[1], target, "{a} {b}");
            }
        }
    }

    #[test]
    fn split_rejects_tiny_class() {
        assert!(stratified_split(&[0, 0, 0, 1], 0.25, 0).is_err());
        assert!(stratified_split(&[0, 0, 0], 0.25, 0).is_err());
    }

    #[test]
    fn fitted_params_ignore_test_rows() {
        let x = random_matrix(30, 6, 6);
        let labels: Vec<u8> = (0..30).map(|i| (i % 2) as u8).collect();
        let s = stratified_split(&labels, 0.25, 1).unwrap();
        let mut perturbed = x.clone();
        for &i in &s.test {
            for j in 0..6 {
                perturbed.data[i * 6 + j] += 100.0;
            }
        }
        let a = standardize_fit(&x.select_rows(&s.train)).unwrap();
        let b = standardize_fit(&perturbed.select_rows(&s.train)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let pa = pca_fit(&x.select_rows(&s.train), 4).unwrap();
        let pb = pca_fit(&perturbed.select_rows(&s.train), 4).unwrap();
        assert_eq!(serde_json::to_string(&pa).unwrap(), serde_json::to_string(&pb).unwrap());
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let x = random_matrix(4, 64, 7).with_labels(vec![0, 1, 1, 0]).unwrap();
        write_feature_csv(&path, &x).unwrap();
        let back = load_external_features(&path).unwrap();
        assert_eq!((back.nrows(), back.ncols()), (4, 64));
        assert_eq!(back, x);

        let bad = "a,b,label\n1,2,0\n1,1\n";
        let err = read_feature_csv(bad.as_bytes(), "bad").unwrap_err().to_string();
        assert!(err.contains("row 1"), "{err}");

        assert!(read_feature_csv("".as_bytes(), "empty").is_err());
        assert!(read_feature_csv("a,label\n".as_bytes(), "header only").is_err());
        let err = read_feature_csv("a,label\n1,2\n".as_bytes(), "lbl").unwrap_err().to_string();
        assert!(err.contains("unknown label"), "{err}");
        assert!(read_feature_csv("a,b\n1,0\n".as_bytes(), "nolabel").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn pca_orthonormal_and_sorted(n in 3usize..25, d in 1usize..12, seed in any::<u64>()) {
            let x = random_matrix(n, d, seed);
            let r = max_components(n, d);
            let m = pca_fit(&x, r).unwrap();
            let gram = m.components() * m.components().transpose();
            prop_assert!((gram - DMatrix::identity(r, r)).abs().max() < 1e-8);
            for w in m.explained_variance().windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
        }

        #[test]
        fn split_is_partition_and_balanced(labels in proptest::collection::vec(0u8..2, 4..120), seed in any::<u64>()) {
            let c = [labels.iter().filter(|&&l| l == 0).count(), labels.iter().filter(|&&l| l == 1).count()];
            prop_assume!(c[0] >= 2 && c[1] >= 2);
            let s = stratified_split(&labels, 0.25, seed).unwrap();
            prop_assert_eq!(s.train.len() + s.test.len(), labels.len());
            let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
            for class in 0..2u8 {
                let t = s.test.iter().filter(|&&i| labels[i] == class).count() as f64;
                let ideal = c[class as usize] as f64 * 0.25;
                prop_assert!((t - ideal).abs() <= 1.0);
            }
            prop_assert_eq!(s.clone(), stratified_split(&labels, 0.25, seed).unwrap());
        }
    }
}
