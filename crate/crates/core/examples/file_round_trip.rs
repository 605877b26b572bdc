//! Write genotype and phenotype files, read them back and run the same
//! request the `waf test` subcommand builds.
//!
//!     cargo run --release --example file_round_trip

use std::fs;

use adaptive_fisher::io::{format_genotypes, format_phenotypes, run_test_command, AnalysisRequest, OutputFormat, WeightSpec};
use adaptive_fisher::prelude::*;

fn main() -> Result<()> {
    let dir = std::env::temp_dir().join("waf-round-trip");
    fs::create_dir_all(&dir)?;

    let data = simulate_replicate(&ScenarioConfig::dense_binary(15, 4), 0)?;
    let g_path = dir.join("genotypes.csv");
    let y_path = dir.join("phenotypes.csv");
    fs::write(&g_path, format_genotypes(&data.genotypes, &["example data".into()]))?;
    fs::write(&y_path, format_phenotypes(&data.phenotype, &[]))?;
    fs::write(dir.join("weights.txt"), "1\n".repeat(15))?;

    let parsed = adaptive_fisher::io::parse_genotypes(&g_path)?;
    assert_eq!(parsed, data.genotypes);

    let request = AnalysisRequest {
        genotype_path: g_path,
        phenotype_path: y_path,
        covariate_path: None,
        weights: WeightSpec::File(dir.join("weights.txt")),
        trait_kind: TraitKind::Binary,
        methods: vec![MethodTag::Waf, MethodTag::Af],
        plan: PermutationPlan::with_seed(3),
        alpha: 0.05,
    };
    let report = run_test_command(&request)?;
    print!("{}", report.render(OutputFormat::Csv)?);
    // Unit weights from a file reproduce AF exactly.
    assert_eq!(report.methods[0].p_value, report.methods[1].p_value);
    println!("weight scheme: {}", report.metadata.weight_scheme);
    Ok(())
}
