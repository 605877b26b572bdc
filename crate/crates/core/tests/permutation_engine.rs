mod common;

use adaptive_fisher::prelude::*;
use adaptive_fisher::perm::{build_table, permute_residuals, step6_pvalue_ge, step6_pvalue_le};
use adaptive_fisher::score::QuantizedResiduals;
use adaptive_fisher::stat_math::RngStream;
use common::random_dataset;

fn tiny_single_variant(seed: u64) -> (GenotypeMatrix, PhenotypeVector) {
    let mut rng = RngStream::new(seed, 1);
    let n = 8 + rng.index_inclusive(16);
    loop {
        let g: Vec<u8> = (0..n).map(|_| rng.index_inclusive(2) as u8).collect();
        let y: Vec<f64> = (0..n).map(|_| (rng.uniform() < 0.5) as u8 as f64).collect();
        let cases = y.iter().sum::<f64>();
        if g.iter().any(|&v| v != g[0]) && cases > 0.0 && cases < n as f64 {
            return (
                GenotypeMatrix::from_columns(vec![g], None).unwrap(),
                PhenotypeVector::new(y, TraitKind::Binary).unwrap(),
            );
        }
    }
}

fn outcomes(g: &GenotypeMatrix, y: &PhenotypeVector, methods: MethodSet, weights: WeightVector, plan: PermutationPlan) -> Vec<TestOutcome> {
    let null = fit_null(y, None).unwrap();
    let kernel = precompute_kernel(g, &null).unwrap();
    run_permutations(&kernel, null.residuals(), &weights, &methods, &plan).unwrap()
}

#[test]
fn single_variant_waf_equals_minp_and_aspu() {
    for seed in 0..50 {
        let (g, y) = tiny_single_variant(seed);
        let methods = MethodSet::new(&[MethodTag::Waf, MethodTag::MinP, MethodTag::Aspu])
            .with_aspu_powers(vec![SpuPower::Finite(2), SpuPower::Infinity]);
        let out = outcomes(&g, &y, methods, WeightVector::maf_sd(&g.maf()).unwrap(), PermutationPlan::fixed(199, seed));
        assert_eq!(out[0].p_value, out[1].p_value, "dataset {seed}");
        assert_eq!(out[0].p_value, out[2].p_value, "dataset {seed}");
    }
}

#[test]
fn flat_weights_reproduce_af_bit_for_bit() {
    for seed in 0..10 {
        let data = random_dataset(seed, 200, 12, TraitKind::Continuous, 0, 0.05);
        let out = outcomes(
            &data.g,
            &data.y,
            MethodSet::new(&[MethodTag::Waf, MethodTag::Af]),
            WeightVector::flat(12),
            PermutationPlan::fixed(499, seed),
        );
        assert_eq!(out[0].p_value.to_bits(), out[1].p_value.to_bits());
        assert_eq!(out[0].statistic.to_bits(), out[1].statistic.to_bits());
        assert_eq!(out[0].diagnostics, out[1].diagnostics);
    }
}

#[test]
fn spu_infinity_with_flat_weights_matches_minp() {
    for seed in 0..10 {
        let data = random_dataset(100 + seed, 150, 8, TraitKind::Binary, 0, 0.08);
        let methods = MethodSet::new(&[MethodTag::Spu(SpuPower::Infinity), MethodTag::MinP]).with_spu_weighting(SpuWeighting::Flat);
        let out = outcomes(&data.g, &data.y, methods, WeightVector::flat(8), PermutationPlan::fixed(299, seed));
        assert_eq!(out[0].p_value, out[1].p_value);
    }
}

#[test]
fn rescaled_weights_leave_waf_unchanged() {
    for seed in 0..10 {
        let data = random_dataset(200 + seed, 150, 10, TraitKind::Binary, 0, 0.05);
        let w = WeightVector::maf_sd(&data.g.maf()).unwrap();
        let methods = || MethodSet::new(&[MethodTag::Waf]);
        let plan = PermutationPlan::fixed(299, seed);
        let a = outcomes(&data.g, &data.y, methods(), w.clone(), plan);
        let b = outcomes(&data.g, &data.y, methods(), w.scaled(2.0).unwrap(), plan);
        assert_eq!(a[0].p_value, b[0].p_value);
        assert_eq!(a[0].statistic, b[0].statistic);
    }
}

#[test]
fn observed_row_is_the_observed_partial_sum_path() {
    let data = random_dataset(3, 300, 15, TraitKind::Binary, 1, 0.04);
    let null = fit_null(&data.y, data.covariates.as_ref()).unwrap();
    let kernel = precompute_kernel(&data.g, &null).unwrap();
    let weights = WeightVector::maf_sd(&data.g.maf()).unwrap().select(kernel.active()).unwrap();
    let table = build_table(
        &kernel,
        &QuantizedResiduals::new(null.residuals()).unwrap(),
        &weights,
        &MethodSet::new(&[MethodTag::Waf]),
        50,
        0,
        1,
    )
    .unwrap();
    let observed = score(&kernel, null.residuals()).unwrap();
    let path = partial_sums(&r_values(&observed.active_u_std()).unwrap(), &weights).unwrap();
    assert_eq!(table.waf_paths().unwrap().row(0), path.s_star);
}

#[test]
fn table_rows_match_manual_recomputation() {
    let data = random_dataset(4, 250, 6, TraitKind::Continuous, 0, 0.06);
    let null = fit_null(&data.y, None).unwrap();
    let kernel = precompute_kernel(&data.g, &null).unwrap();
    let methods = MethodSet::new(&[MethodTag::Spu(SpuPower::Finite(2)), MethodTag::Ssu]).with_spu_weighting(SpuWeighting::Flat);
    let b = 40;
    let table = build_table(
        &kernel,
        &QuantizedResiduals::new(null.residuals()).unwrap(),
        &WeightVector::flat(kernel.k_active()),
        &methods,
        b,
        2,
        17,
    )
    .unwrap();
    let spu2 = table.method_statistics(MethodTag::Spu(SpuPower::Finite(2)), &[]).unwrap();
    let ssu = table.method_statistics(MethodTag::Ssu, &[]).unwrap();
    let mut e = Vec::new();
    for row in 0..=b {
        permute_residuals(null.residuals(), 17, 2, row, &mut e);
        let s = score(&kernel, &e).unwrap();
        let z2: f64 = s.active_u_std().iter().map(|z| z * z).sum();
        let u2: f64 = s.active_u().iter().map(|u| u * u).sum();
        assert!((spu2[row] - z2).abs() <= 1e-12 * z2.max(1.0), "row {row}");
        assert!((ssu[row] - u2).abs() <= 1e-12 * u2.max(1.0), "row {row}");
    }
}

#[test]
fn methods_share_one_permutation_stream() {
    let data = random_dataset(9, 200, 10, TraitKind::Binary, 0, 0.05);
    let w = WeightVector::maf_sd(&data.g.maf()).unwrap();
    let plan = PermutationPlan::fixed(199, 5);
    let together = outcomes(&data.g, &data.y, MethodSet::new(&MethodTag::all()), w.clone(), plan);
    for o in &together {
        let alone = outcomes(&data.g, &data.y, MethodSet::new(&[o.method]), w.clone(), plan);
        assert_eq!(alone[0], *o, "{}", o.method);
    }
}

#[test]
fn step6_pvalues_for_micro_tables() {
    assert_eq!(step6_pvalue_le(&[0.5, 0.5]).unwrap(), 1.0);
    assert_eq!(step6_pvalue_le(&[0.2, 0.9]).unwrap(), 0.5);
    assert_eq!(step6_pvalue_le(&[0.2, 0.1, 0.9]).unwrap(), 2.0 / 3.0);
    assert_eq!(step6_pvalue_ge(&[3.0, 1.0, 2.0]).unwrap(), 1.0 / 3.0);
}

#[test]
fn strong_signal_escalates_to_the_largest_budget() {
    let n = 200;
    let g: Vec<u8> = (0..n).map(|i| (i % 4 == 0) as u8).collect();
    let y: Vec<f64> = g.iter().enumerate().map(|(i, &v)| if v == 1 || i % 7 == 0 { 1.0 } else { 0.0 }).collect();
    let g = GenotypeMatrix::from_columns(vec![g], None).unwrap();
    let y = PhenotypeVector::new(y, TraitKind::Binary).unwrap();
    let plan = PermutationPlan { b_initial: 100, b_max: 2000, ..PermutationPlan::with_seed(1) };
    let out = outcomes(&g, &y, MethodSet::new(&[MethodTag::Waf, MethodTag::MinP]), WeightVector::flat(1), plan);
    for o in out {
        assert_eq!(o.b_used, 2000);
        assert!(o.escalated);
        assert_eq!(o.p_value, 1.0 / 2001.0);
    }
}

#[test]
fn budget_grows_only_for_extreme_results() {
    let data = random_dataset(12, 200, 5, TraitKind::Continuous, 0, 0.1);
    let y = PhenotypeVector::new(
        {
            let mut rng = RngStream::new(12, 99);
            (0..200).map(|_| rng.standard_normal()).collect()
        },
        TraitKind::Continuous,
    )
    .unwrap();
    let out = outcomes(&data.g, &y, MethodSet::new(&[MethodTag::Waf]), WeightVector::flat(5), PermutationPlan::with_seed(2));
    assert_eq!(out[0].b_used == 100, out[0].p_value > 5.0 / 101.0);
    assert_eq!(out[0].escalated, out[0].b_used > 100);
}

#[test]
fn identical_residuals_are_degenerate() {
    let g = GenotypeMatrix::from_columns(vec![vec![0, 1, 2, 1]], None).unwrap();
    let y = PhenotypeVector::new(vec![2.0; 4], TraitKind::Continuous);
    // A constant trait is already rejected by the phenotype type.
    assert!(y.is_err());
    let null = fit_null(&PhenotypeVector::new(vec![0.0, 1.0, 0.0, 1.0], TraitKind::Binary).unwrap(), None).unwrap();
    let kernel = precompute_kernel(&g, &null).unwrap();
    let err = run_permutations(&kernel, &[0.5; 4], &WeightVector::flat(1), &MethodSet::new(&[MethodTag::Waf]), &PermutationPlan::with_seed(0));
    assert!(matches!(err, Err(Error::Degenerate(_))));
}
