//! Evolve circuits over a fixed-width feature CSV (e.g. autoencoder latents).

use eqiml::evolve::GaConfig;
use eqiml::pipeline::{run_pipeline, DataSource, PipelineMode, RunConfig};
use eqiml::reduce::{load_external_features, write_feature_csv};
use eqiml::synthetic::TwoGaussians;

fn main() -> eqiml::Result<()> {
    let dir = std::env::temp_dir().join("eqiml_external_features");
    std::fs::create_dir_all(&dir).map_err(|e| eqiml::Error::Input(e.to_string()))?;
    let csv = dir.join("latent.csv");
    write_feature_csv(&csv, &TwoGaussians { samples: 64, features: 64, informative: 8, shift: 1.5, seed: 2 }.generate())?;
    let loaded = load_external_features(&csv)?;
    println!("{} rows × {} features, classes {:?}", loaded.nrows(), loaded.ncols(), loaded.class_counts());

    let config = RunConfig {
        mode: PipelineMode::External,
        data: DataSource::Csv(csv),
        ga: GaConfig { qubits: 4, layers: 5, max_generations: 40, patience: Some(20), seed: 2, ..GaConfig::default() },
        output: dir.join("out"),
        ..RunConfig::default()
    };
    let report = run_pipeline(&config)?;
    let best = &report.branches[0].best;
    println!("best: accuracy {:.3}, C {:.3}, O_B {:.3}", best.entry.accuracy, best.entry.complexity, best.entry.objective_balance);
    println!("{}", best.entry.circuit);
    for (model, acc) in &report.accuracies {
        println!("{model:>14}: {acc:.3}");
    }
    Ok(())
}
