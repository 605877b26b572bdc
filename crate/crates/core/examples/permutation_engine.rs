//! The permutation machinery one layer down: score kernel, shared
//! permutation table, rank p-values and the per-row minimum.
//!
//!     cargo run --release --example permutation_engine

use adaptive_fisher::perm::{build_table, step6_pvalue_le};
use adaptive_fisher::prelude::*;
use adaptive_fisher::score::QuantizedResiduals;

fn main() -> Result<()> {
    let config = ScenarioConfig::sparse_binary(25, 11);
    let data = simulate_replicate(&config, 0)?;

    let null = fit_null(&data.phenotype, None)?;
    let kernel = precompute_kernel(&data.genotypes, &null)?;
    println!("{} active variants, {} excluded", kernel.k_active(), kernel.excluded().len());

    let observed = score(&kernel, null.residuals())?;
    let weights = WeightVector::maf_sd(&data.genotypes.maf())?.select(kernel.active())?;
    let path = partial_sums(&r_values(&observed.active_u_std())?, &weights)?;
    println!("observed S*: {:?}", &path.s_star[..5.min(path.s_star.len())]);

    // Row 0 is the observed data; rows 1..=B are residual permutations.
    let b = 999;
    let residuals = QuantizedResiduals::new(null.residuals())?;
    let methods = MethodSet::new(&[MethodTag::Waf, MethodTag::MinP]);
    let table = build_table(&kernel, &residuals, &weights, &methods, b, 0, 42)?;

    let paths = table.waf_paths().expect("wAF evaluated");
    let ranks = column_rank_pvalues(&paths)?;
    let t = min_over_k(&ranks)?;
    println!("observed path p-values (first 5): {:?}", &ranks.row(0)[..5.min(ranks.cols())]);
    println!("wAF statistic {:.4}, p = {:.4}", t[0], step6_pvalue_le(&t)?);

    // The high-level entry point gives the same answer for a fixed budget.
    let outcomes = run_permutations(&kernel, null.residuals(), &WeightVector::maf_sd(&data.genotypes.maf())?, &methods, &PermutationPlan::fixed(b, 42))?;
    for o in outcomes {
        println!("{}: p = {:.4} from B = {}", o.method, o.p_value, o.b_used);
    }

    // Staged escalation: budgets grow tenfold while the count of permuted
    // statistics at least as extreme stays small.
    let plan = PermutationPlan { b_initial: 100, b_max: 10_000, ..PermutationPlan::with_seed(42) };
    println!("escalation stages: {:?}", plan.stages());
    Ok(())
}
