//! Train the classical baseline and print its loss curve.

use eqiml::baseline::{evaluate, train, MlpConfig};
use eqiml::reduce::stratified_split;
use eqiml::synthetic::blobs_2d;

fn main() -> eqiml::Result<()> {
    let data = blobs_2d(120, 9);
    let split = stratified_split(data.labels().unwrap(), 0.25, 9)?;
    let (train_rows, test_rows) = (data.select_rows(&split.train), data.select_rows(&split.test));

    let config = MlpConfig { hidden: 6, lr: 0.01, epochs: 100, seed: 9 };
    let trained = train(&train_rows, &config)?;
    for (epoch, loss) in trained.losses.iter().enumerate().step_by(20) {
        println!("epoch {epoch:>3}: loss {loss:.4}");
    }
    println!("train accuracy {:.3}", evaluate(&trained.model, &train_rows)?);
    println!("test accuracy  {:.3}", evaluate(&trained.model, &test_rows)?);
    Ok(())
}
