//! Adaptive Fisher paths.
//!
//! Each standardized score becomes `R_k = -log p_k`, is multiplied by its
//! variant weight, and the weighted values are summed in descending order.
//! The AF and wAF statistics are the minimum, over path positions, of the
//! permutation p-values of those partial sums; the permutation side lives in
//! [`crate::perm`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stat_math::neg_log_two_sided_p;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightScheme {
    Flat,
    #[serde(rename = "maf")]
    MafSd,
    File,
}

impl std::fmt::Display for WeightScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WeightScheme::Flat => "flat",
            WeightScheme::MafSd => "maf",
            WeightScheme::File => "file",
        })
    }
}

/// Per-variant weights `w_k ≥ 0`, at least one positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    w: Vec<f64>,
    scheme: WeightScheme,
}

impl WeightVector {
    pub fn flat(k: usize) -> Self {
        Self {
            w: vec![1.0; k],
            scheme: WeightScheme::Flat,
        }
    }

    /// `w_k = √(maf_k (1 - maf_k))`.
    pub fn maf_sd(maf: &[f64]) -> Result<Self> {
        if let Some(m) = maf.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return Err(Error::Domain(format!("allele frequency {m} outside [0, 1]")));
        }
        Self::checked(maf.iter().map(|m| (m * (1.0 - m)).sqrt()).collect(), WeightScheme::MafSd)
    }

    /// User-supplied weights.
    pub fn from_values(w: Vec<f64>) -> Result<Self> {
        Self::checked(w, WeightScheme::File)
    }

    fn checked(w: Vec<f64>, scheme: WeightScheme) -> Result<Self> {
        if let Some(v) = w.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Domain(format!("weight {v} is not a finite non-negative number")));
        }
        if !w.iter().any(|&v| v > 0.0) {
            return Err(Error::Domain("at least one weight must be positive".into()));
        }
        Ok(Self { w, scheme })
    }

    pub fn values(&self) -> &[f64] {
        &self.w
    }

    pub fn scheme(&self) -> WeightScheme {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// Multiplies every weight by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Domain(format!("scale factor {factor} must be positive")));
        }
        Ok(Self {
            w: self.w.iter().map(|v| v * factor).collect(),
            scheme: self.scheme,
        })
    }

    /// Weights restricted to the given columns, keeping the scheme tag.
    pub fn select(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&k) = columns.iter().find(|&&k| k >= self.w.len()) {
            return Err(Error::Dimension(format!(
                "column {k} out of range for {} weights",
                self.w.len()
            )));
        }
        let w: Vec<f64> = columns.iter().map(|&k| self.w[k]).collect();
        if !w.iter().any(|&v| v > 0.0) {
            return Err(Error::Degenerate("every informative variant has zero weight".into()));
        }
        Ok(Self { w, scheme: self.scheme })
    }
}

/// `R_k = -log(2(1 - Φ(|Ũ_k|)))`.
pub fn r_values(u_std: &[f64]) -> Result<Vec<f64>> {
    u_std.iter().map(|&z| neg_log_two_sided_p(z)).collect()
}

/// Cumulative sums of weighted `R` values taken in descending order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialSumPath {
    pub s_star: Vec<f64>,
    /// Positions (into the input) of the sorted values, largest first; ties
    /// keep input order.
    pub sort_order: Vec<usize>,
}

pub fn partial_sums(r: &[f64], w: &WeightVector) -> Result<PartialSumPath> {
    if r.len() != w.len() {
        return Err(Error::Dimension(format!("{} R values but {} weights", r.len(), w.len())));
    }
    let x: Vec<f64> = r.iter().zip(w.values()).map(|(a, b)| a * b).collect();
    let mut sort_order: Vec<usize> = (0..x.len()).collect();
    sort_order.sort_by(|&a, &b| x[b].total_cmp(&x[a]));
    let mut acc = 0.0;
    let s_star = sort_order
        .iter()
        .map(|&i| {
            acc += x[i];
            acc
        })
        .collect();
    Ok(PartialSumPath { s_star, sort_order })
}

/// Sorts `x` descending in place and replaces it by its running sums.
///
/// Produces the same values as [`partial_sums`] without the index bookkeeping.
pub fn cumulate_descending(x: &mut [f64]) {
    x.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    for v in x.iter_mut() {
        acc += *v;
        *v = acc;
    }
}

/// `min_k P_k` over a path of p-values.
pub fn af_statistic(path_pvalues: &[f64]) -> Result<f64> {
    if path_pvalues.is_empty() {
        return Err(Error::Domain("AF statistic needs at least one path p-value".into()));
    }
    if let Some(p) = path_pvalues.iter().find(|p| !(**p > 0.0 && **p <= 1.0)) {
        return Err(Error::Domain(format!("path p-value {p} outside (0, 1]")));
    }
    Ok(path_pvalues.iter().copied().fold(f64::INFINITY, f64::min))
}
