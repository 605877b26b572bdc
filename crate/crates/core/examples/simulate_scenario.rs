//! Draw genotypes and traits from the AR(1) latent model and write the
//! replicate in the text formats read by `waf test`.
//!
//!     cargo run --example simulate_scenario -- /tmp/waf-sim

use std::path::PathBuf;

use adaptive_fisher::io::write_simulation;
use adaptive_fisher::prelude::*;

fn main() -> Result<()> {
    let out = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("waf-sim"), PathBuf::from);

    let mut config = ScenarioConfig::sparse_continuous(50, 99);
    config.covariate_effect = Some(0.5);
    let data = simulate_replicate(&config, 0)?;

    let sample = data.genotypes.maf();
    let carriers = (0..data.genotypes.k())
        .filter(|&k| data.genotypes.column(k).iter().any(|&g| g > 0))
        .count();
    println!("{carriers} of {} variants polymorphic", data.genotypes.k());
    for (k, maf) in sample.iter().enumerate().take(5) {
        println!(
            "{}: true MAF {:.4}, sample MAF {maf:.4}, beta {:+.3}",
            data.genotypes.labels()[k],
            data.true_mafs[k],
            data.beta[k]
        );
    }

    let files = write_simulation(&out, &config, 0, &data)?;
    println!("genotypes  -> {}", files.genotypes.display());
    println!("phenotypes -> {}", files.phenotypes.display());
    if let Some(c) = &files.covariates {
        println!("covariates -> {}", c.display());
    }
    println!("truth      -> {}", files.truth.display());
    Ok(())
}
