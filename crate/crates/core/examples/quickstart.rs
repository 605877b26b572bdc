//! Simulate one dense binary-trait dataset and test it with the five study
//! methods on a shared permutation stream.
//!
//!     cargo run --release --example quickstart

use adaptive_fisher::prelude::*;

fn main() -> Result<()> {
    let mut config = ScenarioConfig::dense_binary(40, 2024);
    config.delta = 0.8;
    let data = simulate_replicate(&config, 0)?;
    println!(
        "{} subjects, {} variants, {} causal",
        data.genotypes.n(),
        data.genotypes.k(),
        data.beta.iter().filter(|b| **b != 0.0).count()
    );

    let options = AnalysisOptions {
        methods: MethodSet::new(&MethodTag::study_set()),
        weights: WeightChoice::MafSd,
        plan: PermutationPlan::with_seed(7),
    };
    let result = analyze(&data.genotypes, &data.phenotype, None, &options)?;

    println!("{:<6} {:>12} {:>10} {:>7}", "method", "statistic", "p", "B");
    for o in &result.outcomes {
        println!("{:<6} {:>12.5} {:>10.5} {:>7}", o.method.to_string(), o.statistic, o.p_value, o.b_used);
    }

    // wAF reports which variants made up the selected prefix.
    if let Some(d) = &result.outcome(MethodTag::Waf).and_then(|o| o.diagnostics.clone()) {
        let chosen: Vec<&str> = d.sort_order[..d.best_k]
            .iter()
            .map(|&k| data.genotypes.labels()[k].as_str())
            .collect();
        println!("wAF selected {} variants: {}", d.best_k, chosen.join(" "));
    }
    Ok(())
}
