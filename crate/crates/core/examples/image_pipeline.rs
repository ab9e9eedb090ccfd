//! Generate a small two-class image folder and run the full PCA pipeline on it.
//!
//! Reports land in a temporary directory unless a path is given:
//! `cargo run --release --example image_pipeline -- results/`

use std::path::PathBuf;

use eqiml::evolve::GaConfig;
use eqiml::pipeline::{run_pipeline, DataSource, RunConfig};
use eqiml::synthetic::write_image_dataset;

fn main() -> eqiml::Result<()> {
    let tmp = std::env::temp_dir().join("eqiml_image_pipeline");
    let output = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| tmp.join("out"));
    let images = tmp.join("images");
    write_image_dataset(&images, 16, 48, 11)?;

    let config = RunConfig {
        data: DataSource::Images(images),
        image_size: 64,
        ga: GaConfig { qubits: 4, layers: 6, max_generations: 40, patience: Some(20), seed: 11, ..GaConfig::default() },
        output: output.clone(),
        ..RunConfig::default()
    };
    let report = run_pipeline(&config)?;
    let branch = &report.branches[0];
    println!("classes {:?}, counts {:?}", branch.dataset.class_names, branch.dataset.class_counts);
    println!("best circuit uses {} principal components:", branch.best.entry.input_dim);
    println!("{}", branch.best.entry.circuit);
    for (model, acc) in &report.accuracies {
        println!("{model:>14}: {acc:.3}");
    }
    println!("reports in {}", output.display());
    Ok(())
}
