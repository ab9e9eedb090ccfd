//! Run a short multiobjective search and print the Pareto archive.

use eqiml::evolve::{self, GaConfig, PreparedData};
use eqiml::genome::EncodingMode;
use eqiml::reduce::{standardize_apply, standardize_fit, stratified_split};
use eqiml::svm::SvmConfig;
use eqiml::synthetic::TwoGaussians;

fn main() -> eqiml::Result<()> {
    let raw = TwoGaussians { samples: 80, features: 16, ..TwoGaussians::default() }.generate();
    let split = stratified_split(raw.labels().unwrap(), 0.25, 5)?;
    let (train, test) = (raw.select_rows(&split.train), raw.select_rows(&split.test));
    let params = standardize_fit(&train)?;
    let data = PreparedData::pca(standardize_apply(&params, &train)?, standardize_apply(&params, &test)?, 16, true)?;

    let ga = GaConfig {
        qubits: 3,
        layers: 4,
        mode: EncodingMode::PcaHeader,
        max_generations: 60,
        patience: Some(30),
        seed: 5,
        ..GaConfig::default()
    };
    let outcome = evolve::run_with_observer(&ga, &SvmConfig::default(), &data, |stats, _, _| {
        if stats.generation % 10 == 0 {
            println!(
                "gen {:>3}: best accuracy {:.3}, min O_B {:.3}, archive {}, median C {:.2}",
                stats.generation, stats.best_accuracy, stats.best_objective_balance, stats.archive_size, stats.median_complexity
            );
        }
    })?;

    println!("\n{} generations, {} evaluations", outcome.generations_run, outcome.total_evaluations);
    println!("archive:");
    for m in outcome.archive.members() {
        let f = m.fitness.unwrap();
        println!("  acc {:.3}  C {:.3}  O_B {:.3}  {}", f.accuracy, f.complexity, f.objective_balance, m.bits);
    }
    let best = ga.decode(&outcome.best.bits)?;
    let eval = evolve::evaluate_genome(&best, &data, &SvmConfig::default())?;
    println!("\nbest circuit ({} inputs):", eval.input_dim);
    println!("{}", eqiml::circuit::build_feature_map(&best, eval.input_dim)?.diagram(&best));
    Ok(())
}
