//! Min-P, SSU, SPU(c) and aSPU on the observed data, then their permutation
//! p-values from one shared run.
//!
//!     cargo run --release --example comparators

use adaptive_fisher::comparators::spu_significance;
use adaptive_fisher::prelude::*;

fn main() -> Result<()> {
    let config = ScenarioConfig::dense_continuous(30, 5);
    let data = simulate_replicate(&config, 3)?;
    let null = fit_null(&data.phenotype, None)?;
    let kernel = precompute_kernel(&data.genotypes, &null)?;
    let s = score(&kernel, null.residuals())?;
    let u_std = s.active_u_std();

    println!("Min-P  max|U~| = {:.4}", minp_statistic(&u_std));
    println!("SSU    sum U^2 = {:.4}", ssu_statistic(&s.active_u()));
    for c in SpuPower::standard_set() {
        let t = spu_statistic(&u_std, kernel.sd_active(), c)?;
        println!("SPU({c:<3}) = {:>12.5e}  extremeness {:.5e}", t, spu_significance(t, c));
    }

    let methods: Vec<MethodTag> = MethodTag::all();
    let options = AnalysisOptions {
        methods: MethodSet::new(&methods),
        weights: WeightChoice::MafSd,
        plan: PermutationPlan::fixed(1999, 9),
    };
    let result = analyze(&data.genotypes, &data.phenotype, None, &options)?;
    for o in &result.outcomes {
        println!("{:<7} p = {:.4}", o.method.to_string(), o.p_value);
    }
    Ok(())
}
