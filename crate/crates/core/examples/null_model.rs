//! Null-model fits for the four trait/covariate cases and the
//! covariate-adjusted genotype projection.
//!
//!     cargo run --example null_model

use adaptive_fisher::prelude::*;

fn main() -> Result<()> {
    let age = vec![34.0, 51.0, 47.0, 29.0, 62.0, 55.0, 40.0, 38.0, 58.0, 45.0];
    let bmi = vec![22.1, 27.5, 30.2, 24.0, 26.8, 31.1, 23.3, 25.9, 29.0, 21.7];
    let covariates = CovariateMatrix::new(vec![age, bmi], vec!["age".into(), "bmi".into()])?;

    let status = PhenotypeVector::new(vec![0., 1., 1., 0., 1., 0., 0., 1., 1., 0.], TraitKind::Binary)?;
    let level = PhenotypeVector::new(
        vec![1.2, 2.8, 3.1, 0.7, 3.9, 2.2, 1.5, 1.9, 3.3, 0.9],
        TraitKind::Continuous,
    )?;

    for (y, cov) in [(&status, None), (&level, None), (&status, Some(&covariates)), (&level, Some(&covariates))] {
        let fit = fit_null(y, cov)?;
        println!(
            "{:?}: sigma2 = {:.4}, coefficients = {:?}",
            fit.case(),
            fit.sigma2(),
            fit.coefficients().iter().map(|c| (c * 1e4).round() / 1e4).collect::<Vec<_>>()
        );
    }

    // D = G - Ĝ is orthogonal to the covariates, so scores cannot pick up
    // confounding through age or BMI.
    let g = GenotypeMatrix::from_columns(vec![vec![0, 1, 1, 0, 2, 1, 0, 0, 1, 0]], None)?;
    let g_hat = project_genotypes(&g, Some(&covariates))?;
    let d: Vec<f64> = g.column_f64(0).iter().zip(&g_hat).map(|(a, b)| a - b).collect();
    let dot: f64 = d.iter().zip(covariates.columns()[0].iter()).map(|(a, b)| a * b).sum();
    println!("adjusted genotype: {:?}", d.iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>());
    println!("<D, age> = {dot:.2e}");

    let separated = CovariateMatrix::from_columns(vec![vec![0.1, 0.2, 0.0, 0.3, 1.1, 1.2, 1.0, 1.3, 0.9, 1.4]])?;
    let y = PhenotypeVector::new(vec![0., 0., 0., 0., 1., 1., 1., 1., 1., 1.], TraitKind::Binary)?;
    match fit_null(&y, Some(&separated)) {
        Err(e) => println!("separable covariate rejected: {e}"),
        Ok(_) => println!("unexpected fit"),
    }
    Ok(())
}
