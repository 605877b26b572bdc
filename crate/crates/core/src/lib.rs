//! Weighted adaptive Fisher (wAF) association testing for SNV sets.
//!
//! The crate fits a null model, turns residual permutations into score
//! vectors, and evaluates wAF together with AF, Min-P, SSU, SPU(c) and aSPU on
//! one shared permutation stream. A simulation layer generates correlated
//! rare-variant genotypes and traits and estimates power and type-I error.
//!
//! ```no_run
//! use adaptive_fisher::prelude::*;
//!
//! let mut config = ScenarioConfig::dense_binary(30, 7);
//! config.n = 400;
//! let data = simulate_replicate(&config, 0).unwrap();
//! let options = AnalysisOptions {
//!     methods: MethodSet::new(&[MethodTag::Waf, MethodTag::MinP]),
//!     weights: WeightChoice::MafSd,
//!     plan: PermutationPlan::with_seed(1),
//! };
//! let result = analyze(&data.genotypes, &data.phenotype, None, &options).unwrap();
//! for o in &result.outcomes {
//!     println!("{} p = {}", o.method, o.p_value);
//! }
//! ```
//!
//! Runnable walkthroughs of each capability live in `examples/`.

pub mod af;
pub mod analysis;
pub mod comparators;
pub mod error;
pub mod io;
pub mod null_model;
pub mod perm;
pub mod power;
pub mod score;
pub mod simgen;
pub mod stat_math;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::af::{af_statistic, partial_sums, r_values, PartialSumPath, WeightScheme, WeightVector};
    pub use crate::analysis::{analyze, AnalysisOptions, AnalysisResult, WeightChoice};
    pub use crate::comparators::{
        aspu_combine, minp_statistic, spu_statistic, ssu_statistic, MethodTag, SpuPower, SpuWeighting,
    };
    pub use crate::error::{Error, Result};
    pub use crate::null_model::{
        fit_null, project_genotypes, CovariateMatrix, ModelCase, NullModel, PhenotypeVector, TraitKind,
    };
    pub use crate::perm::{
        column_rank_pvalues, min_over_k, run_permutations, ColumnMatrix, MethodSet, PermutationPlan,
        PermutationTable, TestOutcome,
    };
    pub use crate::power::{run_scenario, sweep_k, PowerOptions, PowerResult, PowerTable};
    pub use crate::score::{precompute_kernel, score, GenotypeMatrix, ScoreKernel, ScoreResult};
    pub use crate::simgen::{simulate_replicate, ScenarioConfig, SimulatedData};
    pub use crate::stat_math::{neg_log_two_sided_p, normal_sf_log, RngStream};
}
