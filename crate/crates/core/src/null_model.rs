//! Null-model fitting: intercept-only or intercept plus covariates, with the
//! logit link for binary traits and the identity link for continuous traits.
//!
//! The fitted model carries the residuals `e = Y - μ̂`, the fitted means, the
//! variance scalar that scales the score covariance, and (when covariates are
//! present) the design used to project genotypes onto the covariate space.
//!
//! The binary-with-covariates variance scalar is `(1/n) Σ μ̂_i (1 - μ̂_i)`,
//! the mean Bernoulli variance at the null fit.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::score::GenotypeMatrix;

const IRLS_MAX_ITERATIONS: usize = 50;
const IRLS_GRADIENT_TOL: f64 = 1e-8;
/// A linear predictor this large means fitted probabilities have hit 0 or 1.
const SEPARATION_ETA: f64 = 15.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraitKind {
    Binary,
    Continuous,
}

impl std::str::FromStr for TraitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "binary" => Ok(TraitKind::Binary),
            "continuous" => Ok(TraitKind::Continuous),
            other => Err(Error::Config(format!("unknown trait kind '{other}'"))),
        }
    }
}

/// Trait values for `n` subjects, validated for their kind.
#[derive(Clone, Debug, PartialEq)]
pub struct PhenotypeVector {
    values: Vec<f64>,
    kind: TraitKind,
}

impl PhenotypeVector {
    pub fn new(values: Vec<f64>, kind: TraitKind) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Phenotype(format!(
                "need at least 2 subjects, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Phenotype(format!("value at subject {i} is not finite")));
        }
        match kind {
            TraitKind::Binary => {
                if let Some(i) = values.iter().position(|&v| v != 0.0 && v != 1.0) {
                    return Err(Error::Phenotype(format!(
                        "binary trait value {} at subject {i} is not 0 or 1",
                        values[i]
                    )));
                }
                let cases = values.iter().filter(|&&v| v == 1.0).count();
                if cases == 0 || cases == values.len() {
                    return Err(Error::Phenotype("binary trait has a single class".into()));
                }
            }
            TraitKind::Continuous => {
                let first = values[0];
                if values.iter().all(|&v| v == first) {
                    return Err(Error::Phenotype("continuous trait has zero variance".into()));
                }
            }
        }
        Ok(Self { values, kind })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> TraitKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// `n × J` covariates; the intercept is implicit and must not be supplied.
#[derive(Clone, Debug, PartialEq)]
pub struct CovariateMatrix {
    columns: Vec<Vec<f64>>,
    labels: Vec<String>,
}

impl CovariateMatrix {
    pub fn new(columns: Vec<Vec<f64>>, labels: Vec<String>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Covariate("at least one covariate column required".into()));
        }
        if labels.len() != columns.len() {
            return Err(Error::Covariate(format!(
                "{} labels for {} columns",
                labels.len(),
                columns.len()
            )));
        }
        let n = columns[0].len();
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::Covariate(format!(
                    "column '{}' has {} rows, expected {n}",
                    labels[j],
                    col.len()
                )));
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::Covariate(format!("column '{}' has non-finite values", labels[j])));
            }
            if col.iter().all(|&v| v == col[0]) {
                return Err(Error::Covariate(format!("column '{}' is constant", labels[j])));
            }
        }
        Ok(Self { columns, labels })
    }

    /// Builds a matrix with generated labels `cov1..covJ`.
    pub fn from_columns(columns: Vec<Vec<f64>>) -> Result<Self> {
        let labels = (1..=columns.len()).map(|j| format!("cov{j}")).collect();
        Self::new(columns, labels)
    }

    pub fn n(&self) -> usize {
        self.columns[0].len()
    }

    pub fn j(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelCase {
    BinaryNoCov,
    ContinuousNoCov,
    BinaryCov,
    ContinuousCov,
}

impl ModelCase {
    pub fn has_covariates(self) -> bool {
        matches!(self, ModelCase::BinaryCov | ModelCase::ContinuousCov)
    }
}

/// Design matrix `[1, C]` with a factored Gram matrix for repeated OLS solves.
#[derive(Clone, Debug)]
pub struct CovariateDesign {
    x: DMatrix<f64>,
    gram: Cholesky<f64, Dyn>,
}

impl CovariateDesign {
    pub fn new(covariates: &CovariateMatrix) -> Result<Self> {
        let n = covariates.n();
        let p = covariates.j() + 1;
        if p >= n {
            return Err(Error::Covariate(format!(
                "{} covariates leave no residual degrees of freedom for {n} subjects",
                covariates.j()
            )));
        }
        let mut x = DMatrix::from_element(n, p, 1.0);
        for (j, col) in covariates.columns().iter().enumerate() {
            x.column_mut(j + 1).copy_from_slice(col);
        }
        // Column scaling keeps the rank tolerance meaningful for any units.
        let mut scaled = x.clone();
        for mut col in scaled.column_iter_mut() {
            let norm = col.norm();
            col /= norm;
        }
        let sv = scaled.singular_values();
        let max_sv = sv.max();
        let tol = max_sv * 1e-10;
        let rank = sv.iter().filter(|&&s| s > tol).count();
        if rank < p {
            return Err(Error::RankDeficient { rank, cols: p });
        }
        let gram = (x.transpose() * &x)
            .cholesky()
            .ok_or(Error::RankDeficient { rank: p - 1, cols: p })?;
        Ok(Self { x, gram })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.x.ncols()
    }

    /// OLS coefficients with one step of iterative refinement.
    pub fn ols(&self, y: &[f64]) -> DVector<f64> {
        let y = DVector::from_column_slice(y);
        let mut beta = self.gram.solve(&(self.x.tr_mul(&y)));
        let resid = &y - &self.x * &beta;
        beta += self.gram.solve(&self.x.tr_mul(&resid));
        beta
    }

    /// OLS fitted values of `y` on `[1, C]`.
    pub fn fitted(&self, y: &[f64]) -> Vec<f64> {
        let beta = self.ols(y);
        (&self.x * beta).as_slice().to_vec()
    }

    fn logistic(&self, y: &[f64]) -> Result<(DVector<f64>, Vec<f64>)> {
        let n = y.len();
        let ybar = y.iter().sum::<f64>() / n as f64;
        let yv = DVector::from_column_slice(y);
        let mut beta = DVector::zeros(self.ncols());
        beta[0] = (ybar / (1.0 - ybar)).ln();
        let mut gradient_norm = f64::INFINITY;
        for iteration in 0..=IRLS_MAX_ITERATIONS {
            let eta = &self.x * &beta;
            if eta.amax() > SEPARATION_ETA {
                return Err(Error::PerfectSeparation { iterations: iteration });
            }
            let mu = eta.map(sigmoid);
            let gradient = self.x.tr_mul(&(&yv - &mu));
            gradient_norm = gradient.amax();
            if gradient_norm <= IRLS_GRADIENT_TOL {
                return Ok((beta, mu.as_slice().to_vec()));
            }
            if iteration == IRLS_MAX_ITERATIONS {
                break;
            }
            let mut weighted = self.x.clone();
            for (i, mut row) in weighted.row_iter_mut().enumerate() {
                row *= mu[i] * (1.0 - mu[i]);
            }
            let hessian = self.x.tr_mul(&weighted);
            let Some(chol) = hessian.cholesky() else {
                return Err(Error::PerfectSeparation { iterations: iteration });
            };
            beta += chol.solve(&gradient);
        }
        Err(Error::IrlsDivergence {
            iterations: IRLS_MAX_ITERATIONS,
            gradient_norm,
        })
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Fitted null model shared by the observed-data score and every permutation.
#[derive(Clone, Debug)]
pub struct NullModel {
    residuals: Vec<f64>,
    fitted_means: Vec<f64>,
    sigma2: f64,
    case: ModelCase,
    coefficients: Vec<f64>,
    design: Option<CovariateDesign>,
}

impl NullModel {
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn fitted_means(&self) -> &[f64] {
        &self.fitted_means
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn case(&self) -> ModelCase {
        self.case
    }

    pub fn n(&self) -> usize {
        self.residuals.len()
    }

    /// `(β̂₀, α̂₁, …, α̂_J)` on the link scale.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn design(&self) -> Option<&CovariateDesign> {
        self.design.as_ref()
    }
}

/// Fits the null model of `Y` on an intercept and optional covariates.
pub fn fit_null(y: &PhenotypeVector, covariates: Option<&CovariateMatrix>) -> Result<NullModel> {
    let n = y.len();
    let values = y.values();
    match covariates {
        None => {
            let ybar = y.mean();
            let mut residuals: Vec<f64> = values.iter().map(|v| v - ybar).collect();
            recenter(&mut residuals);
            let (case, sigma2, coefficient) = match y.kind() {
                TraitKind::Binary => (ModelCase::BinaryNoCov, ybar * (1.0 - ybar), (ybar / (1.0 - ybar)).ln()),
                TraitKind::Continuous => {
                    let ss: f64 = residuals.iter().map(|e| e * e).sum();
                    (ModelCase::ContinuousNoCov, ss / (n - 1) as f64, ybar)
                }
            };
            Ok(NullModel {
                residuals,
                fitted_means: vec![ybar; n],
                sigma2,
                case,
                coefficients: vec![coefficient],
                design: None,
            })
        }
        Some(cov) => {
            if cov.n() != n {
                return Err(Error::Dimension(format!(
                    "covariates have {} rows, phenotype has {n}",
                    cov.n()
                )));
            }
            let design = CovariateDesign::new(cov)?;
            let (case, coefficients, fitted) = match y.kind() {
                TraitKind::Binary => {
                    let (beta, mu) = design.logistic(values)?;
                    (ModelCase::BinaryCov, beta, mu)
                }
                TraitKind::Continuous => {
                    let beta = design.ols(values);
                    let fitted = (&design.x * &beta).as_slice().to_vec();
                    (ModelCase::ContinuousCov, beta, fitted)
                }
            };
            let residuals: Vec<f64> = values.iter().zip(&fitted).map(|(v, m)| v - m).collect();
            let sigma2 = match case {
                ModelCase::BinaryCov => fitted.iter().map(|m| m * (1.0 - m)).sum::<f64>() / n as f64,
                _ => residuals.iter().map(|e| e * e).sum::<f64>() / (n - 1) as f64,
            };
            Ok(NullModel {
                residuals,
                fitted_means: fitted,
                sigma2,
                case,
                coefficients: coefficients.as_slice().to_vec(),
                design: Some(design),
            })
        }
    }
}

fn recenter(values: &mut [f64]) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter_mut().for_each(|v| *v -= mean);
}

/// `Ĝ`: per-column OLS fit of genotypes on `[1, C]`, or column means without
/// covariates. Returned column-major, `n × K`.
pub fn project_genotypes(g: &GenotypeMatrix, covariates: Option<&CovariateMatrix>) -> Result<Vec<f64>> {
    match covariates {
        None => Ok(project_with(g, None)),
        Some(cov) => {
            if cov.n() != g.n() {
                return Err(Error::Dimension(format!(
                    "covariates have {} rows, genotypes have {}",
                    cov.n(),
                    g.n()
                )));
            }
            let design = CovariateDesign::new(cov)?;
            Ok(project_with(g, Some(&design)))
        }
    }
}

pub(crate) fn project_with(g: &GenotypeMatrix, design: Option<&CovariateDesign>) -> Vec<f64> {
    let n = g.n();
    let mut out = Vec::with_capacity(n * g.k());
    for k in 0..g.k() {
        let col = g.column_f64(k);
        match design {
            None => {
                let mean = col.iter().sum::<f64>() / n as f64;
                out.extend(std::iter::repeat_n(mean, n));
            }
            Some(d) => out.extend(d.fitted(&col)),
        }
    }
    out
}
