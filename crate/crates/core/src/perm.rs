//! Residual-permutation engine.
//!
//! One call permutes the null-model residuals `B` times and evaluates every
//! requested method on the same permuted copies. Row 0 of every table is the
//! observed data. Path statistics (AF, wAF) are turned into per-row p-values by
//! ranking each path position within its column, then minimised over the path;
//! scalar statistics are ranked directly. The observed statistic is counted in
//! its own reference set, so p-values lie in `[1/(B+1), 1]`.
//!
//! Each permutation `b` of stage `s` draws from its own stream
//! `(seed, hash(s, b))`, which makes the output independent of thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::af::{cumulate_descending, partial_sums, r_values, WeightVector};
use crate::comparators::{
    aspu_combine, minp_statistic, spu_significance, spu_statistic, ssu_statistic, MethodTag, SpuPower,
    SpuWeighting,
};
use crate::error::{Error, Result};
use crate::score::{QuantizedResiduals, ScoreKernel};
use crate::stat_math::{neg_log_two_sided_p, stream_id, RngStream};

const PERMUTATION_DOMAIN: u64 = 0x7065_726d;

/// Permutation budget with staged escalation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermutationPlan {
    pub b_initial: usize,
    pub b_max: usize,
    /// Escalate while `p̂ ≤ escalation_hits / (B + 1)` and `B < b_max`.
    pub escalation_hits: f64,
    pub seed: u64,
}

impl Default for PermutationPlan {
    fn default() -> Self {
        Self {
            b_initial: 100,
            b_max: 10_000,
            escalation_hits: 5.0,
            seed: 0,
        }
    }
}

impl PermutationPlan {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    /// Exactly `b` permutations, no escalation.
    pub fn fixed(b: usize, seed: u64) -> Self {
        Self {
            b_initial: b,
            b_max: b,
            escalation_hits: 5.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.b_initial < 19 {
            return Err(Error::Plan(format!(
                "initial budget {} is below 19 permutations",
                self.b_initial
            )));
        }
        if self.b_max < self.b_initial {
            return Err(Error::Plan(format!(
                "maximum budget {} is below the initial budget {}",
                self.b_max, self.b_initial
            )));
        }
        if !self.escalation_hits.is_finite() || self.escalation_hits < 0.0 {
            return Err(Error::Plan("escalation threshold must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// Budgets tried in order: `b_initial`, ×10 per stage, capped at `b_max`.
    pub fn stages(&self) -> Vec<usize> {
        let mut out = vec![self.b_initial];
        let mut b = self.b_initial;
        while b < self.b_max {
            b = b.saturating_mul(10).min(self.b_max);
            out.push(b);
        }
        out
    }
}

/// Dense `rows × cols` matrix stored column by column.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ColumnMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// `data` holds the columns back to back.
    pub fn from_columns(rows: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || !data.len().is_multiple_of(rows) {
            return Err(Error::Dimension(format!(
                "{} values do not form columns of height {rows}",
                data.len()
            )));
        }
        Ok(Self {
            rows,
            cols: data.len() / rows,
            data,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("rows must be non-empty and equally long".into()));
        }
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                m.data[c * m.rows + r] = v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, c: usize) -> &[f64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.rows + row]
    }

    pub fn row(&self, r: usize) -> Vec<f64> {
        (0..self.cols).map(|c| self.get(r, c)).collect()
    }

    /// Copy of columns `start..start + len`.
    pub fn column_block(&self, start: usize, len: usize) -> ColumnMatrix {
        ColumnMatrix {
            rows: self.rows,
            cols: len,
            data: self.data[start * self.rows..(start + len) * self.rows].to_vec(),
        }
    }
}

/// Per-column rank p-values: entry `(b*, k)` is the fraction of rows
/// `b ∈ {0..B}` whose value in column `k` is at least the value at `b*`.
pub fn column_rank_pvalues(m: &ColumnMatrix) -> Result<ColumnMatrix> {
    if m.rows < 2 {
        return Err(Error::Plan("rank p-values need at least one permutation".into()));
    }
    let total = m.rows as f64;
    let mut out = ColumnMatrix::zeros(m.rows, m.cols);
    out.data
        .par_chunks_mut(m.rows)
        .zip(m.data.par_chunks(m.rows))
        .for_each(|(dst, col)| {
            let mut sorted = col.to_vec();
            sorted.sort_unstable_by(f64::total_cmp);
            for (d, &v) in dst.iter_mut().zip(col) {
                let below = sorted.partition_point(|&s| s < v);
                *d = (m.rows - below) as f64 / total;
            }
        });
    Ok(out)
}

/// Row-wise minimum.
pub fn min_over_k(p: &ColumnMatrix) -> Result<Vec<f64>> {
    if p.cols == 0 {
        return Err(Error::Dimension("minimum over an empty path".into()));
    }
    let mut out = p.column(0).to_vec();
    for c in 1..p.cols {
        for (o, &v) in out.iter_mut().zip(p.column(c)) {
            *o = o.min(v);
        }
    }
    Ok(out)
}

fn check_reference(t: &[f64]) -> Result<()> {
    if t.len() < 2 {
        return Err(Error::Plan("a permutation p-value needs at least one permutation".into()));
    }
    Ok(())
}

/// `(1 + #{b ≥ 1 : t_b ≤ t_0}) / (B + 1)`, for statistics where smaller is
/// more extreme.
pub fn step6_pvalue_le(t: &[f64]) -> Result<f64> {
    check_reference(t)?;
    let hits = t[1..].iter().filter(|&&v| v <= t[0]).count();
    Ok((1 + hits) as f64 / t.len() as f64)
}

/// `(1 + #{b ≥ 1 : t_b ≥ t_0}) / (B + 1)`, for statistics where larger is
/// more extreme.
pub fn step6_pvalue_ge(t: &[f64]) -> Result<f64> {
    check_reference(t)?;
    let hits = t[1..].iter().filter(|&&v| v >= t[0]).count();
    Ok((1 + hits) as f64 / t.len() as f64)
}

/// Methods evaluated together on one permutation stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodSet {
    pub tags: Vec<MethodTag>,
    pub spu_weighting: SpuWeighting,
    pub aspu_powers: Vec<SpuPower>,
}

impl MethodSet {
    pub fn new(tags: &[MethodTag]) -> Self {
        let mut unique = Vec::with_capacity(tags.len());
        for &t in tags {
            if !unique.contains(&t) {
                unique.push(t);
            }
        }
        Self {
            tags: unique,
            spu_weighting: SpuWeighting::Sd,
            aspu_powers: SpuPower::standard_set(),
        }
    }

    pub fn with_spu_weighting(mut self, weighting: SpuWeighting) -> Self {
        self.spu_weighting = weighting;
        self
    }

    pub fn with_aspu_powers(mut self, powers: Vec<SpuPower>) -> Self {
        self.aspu_powers = powers;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.tags.is_empty() {
            return Err(Error::Config("no test method requested".into()));
        }
        if self.tags.contains(&MethodTag::Aspu) && self.aspu_powers.is_empty() {
            return Err(Error::Config("aSPU needs at least one SPU power".into()));
        }
        Ok(())
    }
}

/// Column offsets of each statistic block within a table row.
#[derive(Clone, Debug, Default, PartialEq)]
struct RowLayout {
    k: usize,
    waf: Option<usize>,
    af: Option<usize>,
    minp: Option<usize>,
    ssu: Option<usize>,
    spu: Vec<(SpuPower, usize)>,
    width: usize,
}

impl RowLayout {
    fn new(k: usize, tags: &[MethodTag], aspu_powers: &[SpuPower]) -> Self {
        let mut layout = RowLayout {
            k,
            ..Default::default()
        };
        let mut width = 0;
        let mut take = |n: usize| {
            let at = width;
            width += n;
            at
        };
        if tags.contains(&MethodTag::Waf) {
            layout.waf = Some(take(k));
        }
        if tags.contains(&MethodTag::Af) {
            layout.af = Some(take(k));
        }
        if tags.contains(&MethodTag::MinP) {
            layout.minp = Some(take(1));
        }
        if tags.contains(&MethodTag::Ssu) {
            layout.ssu = Some(take(1));
        }
        let mut powers: Vec<SpuPower> = tags
            .iter()
            .filter_map(|t| match t {
                MethodTag::Spu(c) => Some(*c),
                _ => None,
            })
            .collect();
        if tags.contains(&MethodTag::Aspu) {
            powers.extend_from_slice(aspu_powers);
        }
        powers.sort();
        powers.dedup();
        layout.spu = powers.into_iter().map(|c| (c, take(1))).collect();
        layout.width = width;
        layout
    }

    fn spu_offset(&self, c: SpuPower) -> usize {
        self.spu.iter().find(|(p, _)| *p == c).map(|(_, o)| *o).expect("power in layout")
    }
}

/// Opens the random stream for permutation `b` of escalation stage `stage`.
pub fn permutation_stream(seed: u64, stage: usize, b: usize) -> RngStream {
    RngStream::new(seed, stream_id(&[PERMUTATION_DOMAIN, stage as u64, b as u64]))
}

/// Writes permutation `b` of `observed` into `out`; `b = 0` is the identity.
pub fn permute_residuals<T: Copy>(observed: &[T], seed: u64, stage: usize, b: usize, out: &mut Vec<T>) {
    out.clear();
    out.extend_from_slice(observed);
    if b > 0 {
        permutation_stream(seed, stage, b).shuffle(out);
    }
}

struct RowContext<'a> {
    kernel: &'a ScoreKernel,
    weights: &'a [f64],
    spu_sd: Vec<f64>,
    layout: &'a RowLayout,
}

struct RowScratch {
    perm: Vec<i64>,
    u: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
}

impl RowContext<'_> {
    fn fill_row(&self, z: &[f64], u: &[f64], r: &mut [f64], row: &mut [f64]) {
        let layout = self.layout;
        let k = layout.k;
        if layout.waf.is_some() || layout.af.is_some() {
            for (rv, &zv) in r.iter_mut().zip(z) {
                *rv = neg_log_two_sided_p(zv).expect("finite standardized score");
            }
        }
        if let Some(at) = layout.waf {
            let block = &mut row[at..at + k];
            for ((x, rv), w) in block.iter_mut().zip(r.iter()).zip(self.weights) {
                *x = w * rv;
            }
            cumulate_descending(block);
        }
        if let Some(at) = layout.af {
            let block = &mut row[at..at + k];
            block.copy_from_slice(r);
            cumulate_descending(block);
        }
        if let Some(at) = layout.minp {
            row[at] = minp_statistic(z);
        }
        if let Some(at) = layout.ssu {
            row[at] = ssu_statistic(u);
        }
        for &(c, at) in &layout.spu {
            let stat = spu_statistic(z, &self.spu_sd, c).expect("matching lengths");
            row[at] = spu_significance(stat, c);
        }
    }
}

/// All statistics for rows `b = 0..=B` of one stage.
#[derive(Clone, Debug)]
pub struct PermutationTable {
    b: usize,
    layout: RowLayout,
    values: ColumnMatrix,
}

impl PermutationTable {
    pub fn b(&self) -> usize {
        self.b
    }

    /// `(B+1) × K` wAF partial sums, if wAF was evaluated.
    pub fn waf_paths(&self) -> Option<ColumnMatrix> {
        self.layout.waf.map(|at| self.values.column_block(at, self.layout.k))
    }

    /// `(B+1) × K` unweighted partial sums, if AF was evaluated.
    pub fn af_paths(&self) -> Option<ColumnMatrix> {
        self.layout.af.map(|at| self.values.column_block(at, self.layout.k))
    }

    /// Per-row statistic `T^(b)` for a method, oriented as the method ranks it
    /// (min-p for AF/wAF/aSPU, larger-is-extreme otherwise).
    pub fn method_statistics(&self, method: MethodTag, aspu_powers: &[SpuPower]) -> Result<Vec<f64>> {
        let missing = || Error::Config(format!("method {method} was not evaluated in this table"));
        match method {
            MethodTag::Waf => min_over_k(&column_rank_pvalues(&self.waf_paths().ok_or_else(missing)?)?),
            MethodTag::Af => min_over_k(&column_rank_pvalues(&self.af_paths().ok_or_else(missing)?)?),
            MethodTag::MinP => Ok(self.values.column(self.layout.minp.ok_or_else(missing)?).to_vec()),
            MethodTag::Ssu => Ok(self.values.column(self.layout.ssu.ok_or_else(missing)?).to_vec()),
            MethodTag::Spu(c) => {
                let at = self.layout.spu.iter().find(|(p, _)| *p == c).ok_or_else(missing)?.1;
                Ok(self.values.column(at).to_vec())
            }
            MethodTag::Aspu => min_over_k(&column_rank_pvalues(&self.aspu_block(aspu_powers)?)?),
        }
    }

    fn aspu_block(&self, powers: &[SpuPower]) -> Result<ColumnMatrix> {
        let rows = self.values.rows();
        let mut data = Vec::with_capacity(rows * powers.len());
        for &c in powers {
            if !self.layout.spu.iter().any(|(p, _)| *p == c) {
                return Err(Error::Config(format!("SPU power {c} was not evaluated")));
            }
            data.extend_from_slice(self.values.column(self.layout.spu_offset(c)));
        }
        ColumnMatrix::from_columns(rows, data)
    }
}

fn spu_weights(kernel: &ScoreKernel, weighting: SpuWeighting) -> Vec<f64> {
    match weighting {
        SpuWeighting::Sd => kernel.sd_active().to_vec(),
        SpuWeighting::Flat => vec![1.0; kernel.k_active()],
    }
}

/// Evaluates the statistics needed by `methods` on `b` permutations of stage
/// `stage`. `weights` covers the active variants only.
pub fn build_table(
    kernel: &ScoreKernel,
    residuals: &QuantizedResiduals,
    weights: &WeightVector,
    methods: &MethodSet,
    b: usize,
    stage: usize,
    seed: u64,
) -> Result<PermutationTable> {
    if residuals.len() != kernel.n() {
        return Err(Error::Dimension(format!(
            "residual vector has length {}, kernel expects {}",
            residuals.len(),
            kernel.n()
        )));
    }
    let k = kernel.k_active();
    if weights.len() != k {
        return Err(Error::Dimension(format!("{} weights for {k} active variants", weights.len())));
    }
    let layout = RowLayout::new(k, &methods.tags, &methods.aspu_powers);
    let ctx = RowContext {
        kernel,
        weights: weights.values(),
        spu_sd: spu_weights(kernel, methods.spu_weighting),
        layout: &layout,
    };
    let rows: Vec<Vec<f64>> = (0..=b)
        .into_par_iter()
        .map_init(
            || RowScratch {
                perm: Vec::with_capacity(kernel.n()),
                u: vec![0.0; k],
                z: vec![0.0; k],
                r: vec![0.0; k],
            },
            |s, row_index| {
                permute_residuals(residuals.values(), seed, stage, row_index, &mut s.perm);
                ctx.kernel.active_scores_into(&s.perm, residuals.scale(), &mut s.u);
                ctx.kernel.standardize_into(&s.u, &mut s.z);
                let mut row = vec![0.0; layout.width];
                ctx.fill_row(&s.z, &s.u, &mut s.r, &mut row);
                row
            },
        )
        .collect();
    let values = ColumnMatrix::from_rows(&rows)?;
    Ok(PermutationTable { b, layout, values })
}

/// Observed-path details reported with AF and wAF outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathDiagnostics {
    /// `R_k` for the active variants in column order.
    pub r_values: Vec<f64>,
    pub weights: Vec<f64>,
    /// Observed partial sums `S*_k`.
    pub s_star: Vec<f64>,
    /// Original genotype column indices in path order.
    pub sort_order: Vec<usize>,
    /// Permutation p-value of each observed partial sum.
    pub path_pvalues: Vec<f64>,
    /// Number of leading variants in the minimising partial sum.
    pub best_k: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub method: MethodTag,
    /// Observed statistic: the minimum path p-value for AF/wAF/aSPU, the raw
    /// statistic for Min-P, SSU and SPU.
    pub statistic: f64,
    pub p_value: f64,
    pub b_used: usize,
    pub escalated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<PathDiagnostics>,
}

struct Evaluated {
    outcome: TestOutcome,
    hits: usize,
}

fn hits_from(p: f64, rows: usize) -> usize {
    (p * rows as f64).round() as usize
}

fn path_outcome(
    method: MethodTag,
    paths: &ColumnMatrix,
    z_obs: &[f64],
    w: &[f64],
    active: &[usize],
    b: usize,
) -> Result<Evaluated> {
    let pvalues = column_rank_pvalues(paths)?;
    let t = min_over_k(&pvalues)?;
    let p = step6_pvalue_le(&t)?;
    let r = r_values(z_obs)?;
    let weights = WeightVector::from_values(w.to_vec())?;
    let path = partial_sums(&r, &weights)?;
    let path_pvalues = pvalues.row(0);
    let best_k = path_pvalues
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) })
        .0
        + 1;
    Ok(Evaluated {
        outcome: TestOutcome {
            method,
            statistic: t[0],
            p_value: p,
            b_used: b,
            escalated: false,
            diagnostics: Some(PathDiagnostics {
                r_values: r,
                weights: w.to_vec(),
                s_star: path.s_star,
                sort_order: path.sort_order.iter().map(|&i| active[i]).collect(),
                path_pvalues,
                best_k,
            }),
        },
        hits: hits_from(p, b + 1),
    })
}

fn scalar_outcome(method: MethodTag, column: &[f64], statistic: f64, b: usize) -> Result<Evaluated> {
    let p = step6_pvalue_ge(column)?;
    Ok(Evaluated {
        outcome: TestOutcome {
            method,
            statistic,
            p_value: p,
            b_used: b,
            escalated: false,
            diagnostics: None,
        },
        hits: hits_from(p, b + 1),
    })
}

fn evaluate(
    method: MethodTag,
    table: &PermutationTable,
    kernel: &ScoreKernel,
    residuals: &QuantizedResiduals,
    weights: &WeightVector,
    methods: &MethodSet,
) -> Result<Evaluated> {
    let k = kernel.k_active();
    let mut u = vec![0.0; k];
    let mut z = vec![0.0; k];
    kernel.active_scores_into(residuals.values(), residuals.scale(), &mut u);
    kernel.standardize_into(&u, &mut z);
    let b = table.b;
    match method {
        MethodTag::Waf => {
            let paths = table.waf_paths().expect("wAF block");
            path_outcome(method, &paths, &z, weights.values(), kernel.active(), b)
        }
        MethodTag::Af => {
            let paths = table.af_paths().expect("AF block");
            path_outcome(method, &paths, &z, &vec![1.0; k], kernel.active(), b)
        }
        MethodTag::MinP | MethodTag::Ssu => {
            let col = table.method_statistics(method, &methods.aspu_powers)?;
            let stat = col[0];
            scalar_outcome(method, &col, stat, b)
        }
        MethodTag::Spu(c) => {
            let col = table.method_statistics(method, &methods.aspu_powers)?;
            let raw = spu_statistic(&z, &spu_weights(kernel, methods.spu_weighting), c)?;
            scalar_outcome(method, &col, raw, b)
        }
        MethodTag::Aspu => {
            let (t0, p) = aspu_combine(&table.aspu_block(&methods.aspu_powers)?)?;
            Ok(Evaluated {
                outcome: TestOutcome {
                    method,
                    statistic: t0,
                    p_value: p,
                    b_used: b,
                    escalated: false,
                    diagnostics: None,
                },
                hits: hits_from(p, b + 1),
            })
        }
    }
}

/// Runs every requested method on shared residual permutations and returns
/// one outcome per method, in request order.
///
/// `weights` covers all input columns; excluded columns are dropped here.
/// Methods whose p-value stays within `escalation_hits / (B+1)` are re-run at
/// the next budget with fresh streams; the others keep their earlier result,
/// so each outcome is the same as a call requesting that method alone.
pub fn run_permutations(
    kernel: &ScoreKernel,
    e_observed: &[f64],
    weights: &WeightVector,
    methods: &MethodSet,
    plan: &PermutationPlan,
) -> Result<Vec<TestOutcome>> {
    plan.validate()?;
    methods.validate()?;
    if e_observed.len() != kernel.n() {
        return Err(Error::Dimension(format!(
            "residual vector has length {}, kernel expects {}",
            e_observed.len(),
            kernel.n()
        )));
    }
    if e_observed.iter().all(|&e| e == e_observed[0]) {
        return Err(Error::Degenerate("all residuals are identical; nothing to permute".into()));
    }
    if kernel.k_active() == 0 {
        return Err(Error::Degenerate("every variant is monomorphic after adjustment".into()));
    }
    if weights.len() != kernel.k_total() {
        return Err(Error::Dimension(format!(
            "{} weights for {} variants",
            weights.len(),
            kernel.k_total()
        )));
    }
    let active_weights = weights.select(kernel.active())?;
    let residuals = QuantizedResiduals::new(e_observed)?;

    let mut finished: Vec<Option<TestOutcome>> = vec![None; methods.tags.len()];
    let stages = plan.stages();
    for (stage, &b) in stages.iter().enumerate() {
        let pending: Vec<MethodTag> = methods
            .tags
            .iter()
            .zip(&finished)
            .filter(|(_, done)| done.is_none())
            .map(|(t, _)| *t)
            .collect();
        if pending.is_empty() {
            break;
        }
        let stage_methods = MethodSet {
            tags: pending.clone(),
            ..methods.clone()
        };
        let table = build_table(kernel, &residuals, &active_weights, &stage_methods, b, stage, plan.seed)?;
        let last = stage + 1 == stages.len();
        for tag in pending {
            let slot = methods.tags.iter().position(|t| *t == tag).expect("pending tag");
            let mut ev = evaluate(tag, &table, kernel, &residuals, &active_weights, methods)?;
            if last || (ev.hits as f64) > plan.escalation_hits {
                ev.outcome.escalated = stage > 0;
                finished[slot] = Some(ev.outcome);
            }
        }
    }
    Ok(finished.into_iter().map(|o| o.expect("every method resolved")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(cols: &[&[f64]]) -> ColumnMatrix {
        ColumnMatrix::from_columns(cols[0].len(), cols.iter().flat_map(|c| c.iter().copied()).collect()).unwrap()
    }

    #[test]
    fn rank_pvalue_examples() {
        let p = column_rank_pvalues(&matrix(&[&[5.0, 3.0]])).unwrap();
        assert_eq!(p.column(0), &[0.5, 1.0]);
        let p = column_rank_pvalues(&matrix(&[&[4.0, 4.0, 4.0]])).unwrap();
        assert_eq!(p.column(0), &[1.0, 1.0, 1.0]);
        let p = column_rank_pvalues(&matrix(&[&[1.0, 2.0, 3.0]])).unwrap();
        assert_eq!(p.column(0), &[1.0, 2.0 / 3.0, 1.0 / 3.0]);
        assert!(column_rank_pvalues(&matrix(&[&[1.0]])).is_err());
    }

    #[test]
    fn rank_pvalues_match_direct_count() {
        let col = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0, 5.0, 3.0];
        let p = column_rank_pvalues(&matrix(&[&col])).unwrap();
        for (i, &v) in col.iter().enumerate() {
            let count = col.iter().filter(|&&x| x >= v).count();
            assert_eq!(p.get(i, 0), count as f64 / col.len() as f64);
        }
    }

    #[test]
    fn min_over_k_examples() {
        let m = ColumnMatrix::from_rows(&[vec![0.4, 0.1, 0.7]]).unwrap();
        assert_eq!(min_over_k(&m).unwrap(), vec![0.1]);
        let single = matrix(&[&[0.3, 0.6]]);
        assert_eq!(min_over_k(&single).unwrap(), vec![0.3, 0.6]);
        let ones = matrix(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert_eq!(min_over_k(&ones).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn step6_examples() {
        let mut t = vec![0.5];
        t.extend(std::iter::repeat_n(0.9, 99));
        assert_eq!(step6_pvalue_le(&t).unwrap(), 0.01);
        assert_eq!(step6_pvalue_le(&[0.2, 0.2, 0.2]).unwrap(), 1.0);
        assert_eq!(step6_pvalue_ge(&[3.0, 1.0, 3.0, 4.0]).unwrap(), 0.75);
        assert!(step6_pvalue_ge(&[1.0]).is_err());
    }

    #[test]
    fn plan_validation_and_stages() {
        assert!(PermutationPlan::fixed(18, 0).validate().is_err());
        assert!(PermutationPlan::fixed(19, 0).validate().is_ok());
        let bad = PermutationPlan {
            b_max: 50,
            ..PermutationPlan::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(PermutationPlan::default().stages(), vec![100, 1_000, 10_000]);
        assert_eq!(PermutationPlan::fixed(200, 1).stages(), vec![200]);
        let odd = PermutationPlan {
            b_initial: 99,
            b_max: 5_000,
            ..PermutationPlan::default()
        };
        assert_eq!(odd.stages(), vec![99, 990, 5_000]);
    }

    #[test]
    fn identity_row_and_shuffles() {
        let obs = [1i64, 2, 3, 4, 5];
        let mut out = Vec::new();
        permute_residuals(&obs, 9, 0, 0, &mut out);
        assert_eq!(out, obs);
        permute_residuals(&obs, 9, 0, 3, &mut out);
        let first = out.clone();
        permute_residuals(&obs, 9, 0, 3, &mut out);
        assert_eq!(out, first);
    }

    #[test]
    fn layout_shares_spu_columns() {
        let tags = [MethodTag::Spu(SpuPower::Finite(2)), MethodTag::Aspu, MethodTag::Waf];
        let layout = RowLayout::new(4, &tags, &[SpuPower::Finite(1), SpuPower::Finite(2)]);
        assert_eq!(layout.waf, Some(0));
        assert_eq!(layout.spu.len(), 2);
        assert_eq!(layout.width, 6);
    }
}
