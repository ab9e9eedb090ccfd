//! Standardize, fit principal axes on training rows and inspect explained variance.

use eqiml::reduce::{pca_fit, pca_transform, standardize_apply, standardize_fit, stratified_split};
use eqiml::synthetic::TwoGaussians;

fn main() -> eqiml::Result<()> {
    let raw = TwoGaussians::default().generate();
    let split = stratified_split(raw.labels().unwrap(), 0.25, 1)?;
    let train_raw = raw.select_rows(&split.train);
    let test_raw = raw.select_rows(&split.test);

    let params = standardize_fit(&train_raw)?;
    let train = standardize_apply(&params, &train_raw)?;
    let test = standardize_apply(&params, &test_raw)?;

    let model = pca_fit(&train, 8)?;
    let total = model.total_variance();
    let mut cumulative = 0.0;
    println!("component  variance  cumulative");
    for (k, v) in model.explained_variance().iter().enumerate() {
        cumulative += v / total;
        println!("{k:>9}  {v:>8.3}  {cumulative:>9.1}%", cumulative = 100.0 * cumulative);
    }

    let scores = pca_transform(&model, &test)?;
    let labels = scores.labels().unwrap();
    let mean = |class: u8| {
        let rows: Vec<f64> = (0..scores.nrows()).filter(|&i| labels[i] == class).map(|i| scores.get(i, 0)).collect();
        rows.iter().sum::<f64>() / rows.len() as f64
    };
    println!("\nfirst component on test rows: class 0 mean {:.3}, class 1 mean {:.3}", mean(0), mean(1));
    Ok(())
}
