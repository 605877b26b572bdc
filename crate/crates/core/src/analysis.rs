//! End-to-end test of one SNV set: null fit, score kernel, weights and the
//! shared permutation run.

use serde::{Deserialize, Serialize};

use crate::af::{WeightScheme, WeightVector};
use crate::error::{Error, Result};
use crate::null_model::{fit_null, CovariateMatrix, ModelCase, PhenotypeVector};
use crate::perm::{run_permutations, MethodSet, PermutationPlan, TestOutcome};
use crate::score::{precompute_kernel, GenotypeMatrix};

/// How wAF weights are obtained.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub enum WeightChoice {
    Flat,
    /// `√(maf (1 - maf))` from the sample allele frequencies.
    #[default]
    MafSd,
    /// One weight per genotype column.
    Values(Vec<f64>),
}

impl WeightChoice {
    pub fn scheme(&self) -> WeightScheme {
        match self {
            WeightChoice::Flat => WeightScheme::Flat,
            WeightChoice::MafSd => WeightScheme::MafSd,
            WeightChoice::Values(_) => WeightScheme::File,
        }
    }

    pub fn resolve(&self, g: &GenotypeMatrix) -> Result<WeightVector> {
        match self {
            WeightChoice::Flat => Ok(WeightVector::flat(g.k())),
            WeightChoice::MafSd => WeightVector::maf_sd(&g.maf()),
            WeightChoice::Values(v) => {
                if v.len() != g.k() {
                    return Err(Error::Dimension(format!("{} weights for {} variants", v.len(), g.k())));
                }
                WeightVector::from_values(v.clone())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub methods: MethodSet,
    pub weights: WeightChoice,
    pub plan: PermutationPlan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisResult {
    pub n: usize,
    pub k: usize,
    pub case: ModelCase,
    /// Labels of variants dropped as monomorphic after adjustment.
    pub excluded_snvs: Vec<String>,
    pub outcomes: Vec<TestOutcome>,
}

impl AnalysisResult {
    pub fn outcome(&self, method: crate::comparators::MethodTag) -> Option<&TestOutcome> {
        self.outcomes.iter().find(|o| o.method == method)
    }
}

pub fn analyze(
    g: &GenotypeMatrix,
    y: &PhenotypeVector,
    covariates: Option<&CovariateMatrix>,
    options: &AnalysisOptions,
) -> Result<AnalysisResult> {
    if y.len() != g.n() {
        return Err(Error::Dimension(format!(
            "phenotype has {} subjects, genotypes have {}",
            y.len(),
            g.n()
        )));
    }
    let null = fit_null(y, covariates)?;
    let kernel = precompute_kernel(g, &null)?;
    let weights = options.weights.resolve(g)?;
    let outcomes = run_permutations(&kernel, null.residuals(), &weights, &options.methods, &options.plan)?;
    Ok(AnalysisResult {
        n: g.n(),
        k: g.k(),
        case: null.case(),
        excluded_snvs: kernel.excluded().iter().map(|&k| g.labels()[k].clone()).collect(),
        outcomes,
    })
}
