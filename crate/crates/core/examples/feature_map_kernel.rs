//! Build a feature map, evaluate kernels, and compare the full simulation with
//! the per-qubit product form on an entanglement-free circuit.

use eqiml::circuit::build_feature_map;
use eqiml::genome::{AngleStep, CircuitGenome, GateGene, GateKind};
use eqiml::reduce::FeatureMatrix;

fn gene(kind: GateKind, step: u8) -> GateGene {
    GateGene::new(kind, AngleStep::new(step).expect("step in 1..=16"))
}

fn main() -> eqiml::Result<()> {
    // 2 qubits × 2 layers, layer-major.
    let grid = vec![
        gene(GateKind::RyParam, 4),
        gene(GateKind::RxParam, 3),
        gene(GateKind::RzFixed, 2),
        gene(GateKind::RyParam, 8),
    ];
    let genome = CircuitGenome::new(2, 2, grid, None)?;
    let circuit = build_feature_map(&genome, 2)?;
    println!("{}", circuit.diagram(&genome));
    println!("feature per parameterized gate: {:?}", circuit.feature_indices());

    let x = [0.3, -0.7];
    let y = [0.1, 0.4];
    println!("K(x, x) = {:.6}", circuit.kernel(&x, &x)?);
    println!("K(x, y) = {:.6}", circuit.kernel(&x, &y)?);
    println!("product form = {:.6}", circuit.product_kernel(&x, &y)?);

    let pts = FeatureMatrix::from_fn(5, 2, |i, j| (i as f64 * 0.4 - 0.8) * if j == 0 { 1.0 } else { -0.5 });
    let gram = circuit.gram_matrix(&pts)?;
    println!("\nGram matrix:\n{:.4}", gram.values());
    println!("smallest eigenvalue: {:.3e}", gram.min_eigenvalue().unwrap_or(f64::NAN));
    Ok(())
}
