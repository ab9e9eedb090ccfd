//! Train a kernel SVM on a quantum kernel and report support vectors and accuracy.

use eqiml::circuit::build_feature_map;
use eqiml::genome::{AngleStep, CircuitGenome, GateGene, GateKind};
use eqiml::reduce::stratified_split;
use eqiml::svm::{self, SvmConfig};
use eqiml::synthetic::blobs_2d;

fn main() -> eqiml::Result<()> {
    let data = blobs_2d(80, 3);
    let split = stratified_split(data.labels().unwrap(), 0.25, 3)?;
    // Scale the blobs into a range where π/4 rotations separate them.
    let scale = |m: &eqiml::reduce::FeatureMatrix| {
        eqiml::reduce::FeatureMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m.get(i, j) / 4.0)
            .with_labels(m.labels().unwrap().to_vec())
    };
    let train = scale(&data.select_rows(&split.train))?;
    let test = scale(&data.select_rows(&split.test))?;

    let grid = vec![
        GateGene::new(GateKind::RyParam, AngleStep::new(2).unwrap()),
        GateGene::new(GateKind::RyParam, AngleStep::new(2).unwrap()),
    ];
    let genome = CircuitGenome::new(2, 1, grid, None)?;
    let circuit = build_feature_map(&genome, 2)?;

    let mut k_train = circuit.gram_matrix(&train)?;
    let shift = svm::clamp_psd(&mut k_train)?;
    let y_train = train.signed_labels().unwrap();
    let model = svm::fit(&k_train, &y_train, &SvmConfig::default())?;
    println!("diagonal shift {shift:e}, {} SMO updates", model.iterations);
    println!("support vectors: {} of {}", model.support_count(), model.n_train());
    println!("bias: {:.4}", model.bias);
    println!("dual objective: {:.6}", svm::dual_objective(&k_train, &y_train, &model.dual_coefs));

    let k_test = circuit.kernel_matrix(&test, &train)?;
    let acc = svm::accuracy(&model.predict(&k_test)?, &test.signed_labels().unwrap())?;
    println!("test accuracy: {acc:.3}");
    Ok(())
}
