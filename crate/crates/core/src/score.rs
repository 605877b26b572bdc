//! Score vectors for a fixed genotype set.
//!
//! [`precompute_kernel`] centres the genotypes against the null model once
//! (`D = G - Ĝ`) and freezes `V_kk = σ̂² Σ_i D_ik²`. [`score`] is then `U = Dᵀe`
//! for any residual vector, which is what the permutation engine calls for the
//! observed residuals and for every permuted copy.
//!
//! Dot products are accumulated exactly: `D` and `e` are rounded once to 53-bit
//! fixed point and summed in `i128`. Two residual vectors that pair the same
//! values with the same genotype rows produce bit-identical `U`, whatever
//! order the permutation put them in, so tied permutation statistics compare
//! as ties.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::null_model::{project_with, NullModel};

/// Fixed-point mantissa width used for both factors of every product.
const FIXED_BITS: i32 = 52;
/// Keeps `n · 2^104` below `i128::MAX`.
const MAX_SUBJECTS: usize = 1 << 22;
/// A residual genotype column whose energy falls below this fraction of its
/// raw centred energy is treated as monomorphic after adjustment.
const DEGENERATE_RELATIVE_SS: f64 = 1e-10;

/// Minor-allele counts for `n` subjects at `K` variants, stored column-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenotypeMatrix {
    n: usize,
    k: usize,
    counts: Vec<u8>,
    labels: Vec<String>,
}

impl GenotypeMatrix {
    /// `counts` is column-major (`counts[k * n + i]`).
    pub fn new(n: usize, k: usize, counts: Vec<u8>, labels: Vec<String>) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(format!("need at least 2 subjects, got {n}")));
        }
        if k == 0 {
            return Err(Error::Dimension("need at least one variant".into()));
        }
        if counts.len() != n * k {
            return Err(Error::Dimension(format!(
                "{} genotype entries for {n} subjects × {k} variants",
                counts.len()
            )));
        }
        if labels.len() != k {
            return Err(Error::Dimension(format!("{} labels for {k} variants", labels.len())));
        }
        if let Some(pos) = counts.iter().position(|&c| c > 2) {
            return Err(Error::Domain(format!(
                "genotype {} at subject {}, variant {} is not 0, 1 or 2",
                counts[pos],
                pos % n,
                pos / n
            )));
        }
        Ok(Self { n, k, counts, labels })
    }

    pub fn from_columns(columns: Vec<Vec<u8>>, labels: Option<Vec<String>>) -> Result<Self> {
        let k = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if let Some(bad) = columns.iter().position(|c| c.len() != n) {
            return Err(Error::Dimension(format!("column {bad} has a different length")));
        }
        let labels = labels.unwrap_or_else(|| default_labels(k));
        Self::new(n, k, columns.concat(), labels)
    }

    /// Rows are subjects.
    pub fn from_rows(rows: &[Vec<u8>], labels: Option<Vec<String>>) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != k) {
            return Err(Error::Dimension(format!("row {bad} has a different length")));
        }
        let mut counts = vec![0u8; n * k];
        for (i, row) in rows.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                counts[j * n + i] = c;
            }
        }
        Self::new(n, k, counts, labels.unwrap_or_else(|| default_labels(k)))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn column(&self, k: usize) -> &[u8] {
        &self.counts[k * self.n..(k + 1) * self.n]
    }

    pub fn column_f64(&self, k: usize) -> Vec<f64> {
        self.column(k).iter().map(|&c| c as f64).collect()
    }

    pub fn get(&self, subject: usize, variant: usize) -> u8 {
        self.counts[variant * self.n + subject]
    }

    /// Sample frequency of the counted allele, `Σ_i G_ik / 2n`.
    pub fn maf(&self) -> Vec<f64> {
        (0..self.k)
            .map(|k| {
                let total: u64 = self.column(k).iter().map(|&c| c as u64).sum();
                total as f64 / (2 * self.n) as f64
            })
            .collect()
    }

    /// Subset of subjects in the given order.
    pub fn select_subjects(&self, subjects: &[usize]) -> Result<Self> {
        let mut counts = Vec::with_capacity(subjects.len() * self.k);
        for k in 0..self.k {
            let col = self.column(k);
            counts.extend(subjects.iter().map(|&i| col[i]));
        }
        Self::new(subjects.len(), self.k, counts, self.labels.clone())
    }
}

fn default_labels(k: usize) -> Vec<String> {
    (1..=k).map(|j| format!("snv{j}")).collect()
}

/// Power of two built from the exponent bits, exact over the normal range.
fn pow2(exp: i32) -> f64 {
    if (-1022..=1023).contains(&exp) {
        f64::from_bits(((exp + 1023) as u64) << 52)
    } else {
        2f64.powi(exp)
    }
}

/// Rounds `values` to integers `q` with `values ≈ q · 2^-scale` and `|q| ≤ 2^52`.
fn quantize(values: &[f64]) -> (Vec<i64>, i32) {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return (vec![0; values.len()], 0);
    }
    let mut top = max.log2().floor() as i32 + 1;
    while max >= pow2(top) {
        top += 1;
    }
    while top > -1000 && max < pow2(top - 1) {
        top -= 1;
    }
    let scale = FIXED_BITS - top;
    let factor = pow2(scale);
    let q = values.iter().map(|v| (v * factor).round() as i64).collect();
    (q, scale)
}

/// A residual vector in the fixed-point form consumed by [`ScoreKernel`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantizedResiduals {
    values: Vec<i64>,
    scale: i32,
}

impl QuantizedResiduals {
    pub fn new(e: &[f64]) -> Result<Self> {
        if let Some(i) = e.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("residual {i} is not finite")));
        }
        let (values, scale) = quantize(e);
        Ok(Self { values, scale })
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn scale(&self) -> i32 {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Centred genotype residuals and the frozen score variances.
#[derive(Clone, Debug)]
pub struct ScoreKernel {
    n: usize,
    k_total: usize,
    active: Vec<usize>,
    excluded: Vec<usize>,
    resid: Vec<f64>,
    fixed: Vec<i64>,
    fixed_scale: Vec<i32>,
    v_diag: Vec<f64>,
    sqrt_v: Vec<f64>,
    sd: Vec<f64>,
    maf: Vec<f64>,
    labels: Vec<String>,
}

/// Builds `D = G - Ĝ` and `V_kk = σ̂² Σ_i D_ik²`; monomorphic columns are excluded.
pub fn precompute_kernel(g: &GenotypeMatrix, nm: &NullModel) -> Result<ScoreKernel> {
    let n = g.n();
    if nm.n() != n {
        return Err(Error::Dimension(format!(
            "null model fitted on {} subjects, genotypes have {n}",
            nm.n()
        )));
    }
    if n > MAX_SUBJECTS {
        return Err(Error::Dimension(format!("at most {MAX_SUBJECTS} subjects supported, got {n}")));
    }
    let projection = project_with(g, nm.design());
    let sigma2 = nm.sigma2();
    let mut kernel = ScoreKernel {
        n,
        k_total: g.k(),
        active: Vec::new(),
        excluded: Vec::new(),
        resid: Vec::new(),
        fixed: Vec::new(),
        fixed_scale: Vec::new(),
        v_diag: vec![0.0; g.k()],
        sqrt_v: Vec::new(),
        sd: Vec::new(),
        maf: g.maf(),
        labels: g.labels().to_vec(),
    };
    for k in 0..g.k() {
        let col = g.column(k);
        let d: Vec<f64> = col
            .iter()
            .zip(&projection[k * n..(k + 1) * n])
            .map(|(&gv, &p)| gv as f64 - p)
            .collect();
        let ss: f64 = d.iter().map(|x| x * x).sum();
        let mean = col.iter().map(|&c| c as f64).sum::<f64>() / n as f64;
        let raw_ss: f64 = col.iter().map(|&c| (c as f64 - mean).powi(2)).sum();
        if raw_ss == 0.0 || ss <= DEGENERATE_RELATIVE_SS * raw_ss {
            kernel.excluded.push(k);
            continue;
        }
        let v = sigma2 * ss;
        kernel.v_diag[k] = v;
        kernel.active.push(k);
        kernel.sqrt_v.push(v.sqrt());
        kernel.sd.push((ss / (n - 1) as f64).sqrt());
        let (q, scale) = quantize(&d);
        kernel.fixed.extend(q);
        kernel.fixed_scale.push(scale);
        kernel.resid.extend(d);
    }
    Ok(kernel)
}

impl ScoreKernel {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of variants in the input, including excluded ones.
    pub fn k_total(&self) -> usize {
        self.k_total
    }

    /// Number of variants that enter the test statistics.
    pub fn k_active(&self) -> usize {
        self.active.len()
    }

    /// Original column indices of the active variants.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn excluded(&self) -> &[usize] {
        &self.excluded
    }

    /// `V_kk` for every input column; zero for excluded columns.
    pub fn v_diag(&self) -> &[f64] {
        &self.v_diag
    }

    pub fn sqrt_v_active(&self) -> &[f64] {
        &self.sqrt_v
    }

    /// Sample standard deviation of each active residual genotype column.
    pub fn sd_active(&self) -> &[f64] {
        &self.sd
    }

    /// Sample allele frequencies for all input columns.
    pub fn maf(&self) -> &[f64] {
        &self.maf
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Residual genotype column for the `j`-th active variant.
    pub fn residual_column(&self, j: usize) -> &[f64] {
        &self.resid[j * self.n..(j + 1) * self.n]
    }

    /// `U` for the active variants from fixed-point residuals.
    pub fn active_scores_into(&self, e: &[i64], e_scale: i32, out: &mut [f64]) {
        debug_assert_eq!(e.len(), self.n);
        debug_assert_eq!(out.len(), self.active.len());
        for (j, slot) in out.iter_mut().enumerate() {
            let col = &self.fixed[j * self.n..(j + 1) * self.n];
            let acc: i128 = col.iter().zip(e).map(|(&a, &b)| a as i128 * b as i128).sum();
            *slot = acc as f64 * pow2(-(self.fixed_scale[j] + e_scale));
        }
    }

    /// `Ũ = U / √V` for the active variants.
    pub fn standardize_into(&self, u: &[f64], out: &mut [f64]) {
        for ((o, &uv), &s) in out.iter_mut().zip(u).zip(&self.sqrt_v) {
            *o = uv / s;
        }
    }
}

/// Score vector and its standardization for one residual vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreResult {
    /// `U_k` for all input columns (zero for excluded columns).
    pub u: Vec<f64>,
    pub v_diag: Vec<f64>,
    /// `Ũ_k`, absent for excluded columns.
    pub u_std: Vec<Option<f64>>,
    pub excluded: Vec<usize>,
}

impl ScoreResult {
    /// `Ũ` restricted to the active columns, in column order.
    pub fn active_u_std(&self) -> Vec<f64> {
        self.u_std.iter().flatten().copied().collect()
    }

    pub fn active_u(&self) -> Vec<f64> {
        self.u
            .iter()
            .enumerate()
            .filter(|(k, _)| !self.excluded.contains(k))
            .map(|(_, &u)| u)
            .collect()
    }
}

/// `U = Dᵀe` and `Ũ_k = U_k / √V_kk`, with `V` frozen in the kernel.
pub fn score(kernel: &ScoreKernel, e: &[f64]) -> Result<ScoreResult> {
    if e.len() != kernel.n {
        return Err(Error::Dimension(format!(
            "residual vector has length {}, kernel expects {}",
            e.len(),
            kernel.n
        )));
    }
    let q = QuantizedResiduals::new(e)?;
    let mut active_u = vec![0.0; kernel.k_active()];
    kernel.active_scores_into(q.values(), q.scale(), &mut active_u);
    let mut u = vec![0.0; kernel.k_total];
    let mut u_std = vec![None; kernel.k_total];
    for (j, &k) in kernel.active.iter().enumerate() {
        u[k] = active_u[j];
        u_std[k] = Some(active_u[j] / kernel.sqrt_v[j]);
    }
    Ok(ScoreResult {
        u,
        v_diag: kernel.v_diag.clone(),
        u_std,
        excluded: kernel.excluded.clone(),
    })
}
