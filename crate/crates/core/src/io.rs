//! Plain-text inputs and outputs.
//!
//! Genotype files: one header row of variant labels, then one row per
//! subject of `0`/`1`/`2` minor-allele counts, comma- or tab-separated.
//! Orienting columns to the minor allele is the caller's job. Phenotype files
//! hold a header line and one value per subject; covariate files a header of
//! labels and one row of reals per subject; weight files one real per line.
//! Lines starting with `#` are comments everywhere and carry the provenance of
//! generated files. Missing values are not supported.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::af::WeightScheme;
use crate::analysis::{analyze, AnalysisOptions, WeightChoice};
use crate::comparators::MethodTag;
use crate::error::{Error, Result};
use crate::null_model::{CovariateMatrix, PhenotypeVector, TraitKind};
use crate::perm::{MethodSet, PathDiagnostics, PermutationPlan};
use crate::score::GenotypeMatrix;
use crate::simgen::{ScenarioConfig, SimulatedData};

struct Line<'a> {
    number: usize,
    fields: Vec<&'a str>,
}

fn data_lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| {
            let l = l.trim_end_matches('\r');
            let fields = if l.contains('\t') { l.split('\t') } else { l.split(',') }
                .map(str::trim)
                .collect();
            Line { number: i + 1, fields }
        })
        .collect()
}

fn parse_err(source: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: source.to_string(),
        line,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn parse_genotypes(path: &Path) -> Result<GenotypeMatrix> {
    parse_genotypes_str(&read(path)?, &path.display().to_string())
}

/// Parses genotype text; `source` names the input in error messages.
pub fn parse_genotypes_str(text: &str, source: &str) -> Result<GenotypeMatrix> {
    let lines = data_lines(text);
    let Some((header, rows)) = lines.split_first() else {
        return Err(parse_err(source, 1, "empty file"));
    };
    let labels: Vec<String> = header.fields.iter().map(|s| s.to_string()).collect();
    if labels.iter().any(String::is_empty) {
        return Err(parse_err(source, header.number, "empty variant label in header"));
    }
    if rows.is_empty() {
        return Err(parse_err(source, header.number, "no subjects"));
    }
    let k = labels.len();
    let n = rows.len();
    let mut counts = vec![0u8; n * k];
    for (i, row) in rows.iter().enumerate() {
        if row.fields.len() != k {
            return Err(parse_err(
                source,
                row.number,
                format!("expected {k} genotypes, found {}", row.fields.len()),
            ));
        }
        for (j, token) in row.fields.iter().enumerate() {
            counts[j * n + i] = match *token {
                "0" => 0,
                "1" => 1,
                "2" => 2,
                other => {
                    return Err(parse_err(
                        source,
                        row.number,
                        format!("genotype '{other}' in column '{}' is not 0, 1 or 2", labels[j]),
                    ))
                }
            };
        }
    }
    GenotypeMatrix::new(n, k, counts, labels)
}

/// Writes genotypes in the format read by [`parse_genotypes`], after the
/// given comment lines.
pub fn format_genotypes(g: &GenotypeMatrix, comments: &[String]) -> String {
    let mut out = String::with_capacity(g.n() * g.k() * 2 + 64);
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    out.push_str(&g.labels().join(","));
    out.push('\n');
    for i in 0..g.n() {
        for k in 0..g.k() {
            if k > 0 {
                out.push(',');
            }
            out.push((b'0' + g.get(i, k)) as char);
        }
        out.push('\n');
    }
    out
}

pub fn parse_phenotypes(path: &Path, kind: TraitKind) -> Result<PhenotypeVector> {
    parse_phenotypes_str(&read(path)?, &path.display().to_string(), kind)
}

pub fn parse_phenotypes_str(text: &str, source: &str, kind: TraitKind) -> Result<PhenotypeVector> {
    let lines = data_lines(text);
    let Some((header, rows)) = lines.split_first() else {
        return Err(parse_err(source, 1, "empty file"));
    };
    if header.fields.len() != 1 {
        return Err(parse_err(source, header.number, "phenotype file must have a single column"));
    }
    if rows.is_empty() {
        return Err(parse_err(source, header.number, "no subjects"));
    }
    let mut values = Vec::with_capacity(rows.len());
    for row in rows {
        if row.fields.len() != 1 {
            return Err(parse_err(source, row.number, "expected one value per line"));
        }
        let v: f64 = row.fields[0]
            .parse()
            .map_err(|_| parse_err(source, row.number, format!("'{}' is not a number", row.fields[0])))?;
        if !v.is_finite() {
            return Err(parse_err(source, row.number, "value is not finite"));
        }
        if kind == TraitKind::Binary && v != 0.0 && v != 1.0 {
            return Err(parse_err(source, row.number, format!("binary trait value '{}' is not 0 or 1", row.fields[0])));
        }
        values.push(v);
    }
    PhenotypeVector::new(values, kind)
}

pub fn format_phenotypes(y: &PhenotypeVector, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    out.push_str("trait\n");
    for v in y.values() {
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn parse_covariates(path: &Path) -> Result<CovariateMatrix> {
    parse_covariates_str(&read(path)?, &path.display().to_string())
}

pub fn parse_covariates_str(text: &str, source: &str) -> Result<CovariateMatrix> {
    let lines = data_lines(text);
    let Some((header, rows)) = lines.split_first() else {
        return Err(parse_err(source, 1, "empty file"));
    };
    let labels: Vec<String> = header.fields.iter().map(|s| s.to_string()).collect();
    if rows.is_empty() {
        return Err(parse_err(source, header.number, "no subjects"));
    }
    let mut columns = vec![Vec::with_capacity(rows.len()); labels.len()];
    for row in rows {
        if row.fields.len() != labels.len() {
            return Err(parse_err(
                source,
                row.number,
                format!("expected {} covariates, found {}", labels.len(), row.fields.len()),
            ));
        }
        for (col, token) in columns.iter_mut().zip(&row.fields) {
            let v: f64 = token
                .parse()
                .map_err(|_| parse_err(source, row.number, format!("'{token}' is not a number")))?;
            if !v.is_finite() {
                return Err(parse_err(source, row.number, "covariate is not finite"));
            }
            col.push(v);
        }
    }
    CovariateMatrix::new(columns, labels)
}

pub fn format_covariates(c: &CovariateMatrix, comments: &[String]) -> String {
    let mut out = String::new();
    for line in comments {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str(&c.labels().join(","));
    out.push('\n');
    for i in 0..c.n() {
        let row: Vec<String> = c.columns().iter().map(|col| col[i].to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_weights(path: &Path) -> Result<Vec<f64>> {
    parse_weights_str(&read(path)?, &path.display().to_string())
}

pub fn parse_weights_str(text: &str, source: &str) -> Result<Vec<f64>> {
    let lines = data_lines(text);
    if lines.is_empty() {
        return Err(parse_err(source, 1, "no weights"));
    }
    lines
        .iter()
        .map(|l| {
            if l.fields.len() != 1 {
                return Err(parse_err(source, l.number, "expected one weight per line"));
            }
            match l.fields[0].parse::<f64>() {
                Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
                _ => Err(parse_err(source, l.number, format!("'{}' is not a non-negative weight", l.fields[0]))),
            }
        })
        .collect()
}

/// `key=value` configuration lines; `#` starts a comment. Repeated keys keep
/// every value in order.
pub fn parse_config_str(text: &str, source: &str) -> Result<BTreeMap<String, Vec<String>>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(parse_err(source, i + 1, format!("expected key=value, got '{line}'")));
        };
        out.entry(key.trim().replace('_', "-")).or_default().push(value.trim().to_string());
    }
    Ok(out)
}

pub fn parse_config(path: &Path) -> Result<BTreeMap<String, Vec<String>>> {
    parse_config_str(&read(path)?, &path.display().to_string())
}

/// Weight source named on the command line: `maf`, `flat` or `file:PATH`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightSpec {
    Maf,
    Flat,
    File(PathBuf),
}

impl std::str::FromStr for WeightSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "maf" => Ok(WeightSpec::Maf),
            "flat" => Ok(WeightSpec::Flat),
            other => match other.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(WeightSpec::File(PathBuf::from(p))),
                _ => Err(Error::Config(format!("unknown weight scheme '{other}' (maf, flat or file:PATH)"))),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::Config(format!("unknown output format '{other}'"))),
        }
    }
}

/// Everything needed to test one SNV set from files.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisRequest {
    pub genotype_path: PathBuf,
    pub phenotype_path: PathBuf,
    pub covariate_path: Option<PathBuf>,
    pub weights: WeightSpec,
    pub trait_kind: TraitKind,
    pub methods: Vec<MethodTag>,
    pub plan: PermutationPlan,
    pub alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: MethodTag,
    pub statistic: f64,
    pub p_value: f64,
    #[serde(rename = "B_used")]
    pub b_used: usize,
    pub escalated: bool,
    pub significant: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<PathDiagnostics>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub excluded_snvs: Vec<String>,
    pub weight_scheme: WeightScheme,
    pub trait_kind: TraitKind,
    pub covariates: Option<String>,
    pub seed: u64,
    pub perms: usize,
    pub perms_max: usize,
    pub alpha: f64,
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub methods: Vec<MethodReport>,
    pub metadata: ReportMetadata,
}

impl TestReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,statistic,p_value,B_used,escalated\n");
        for m in &self.methods {
            let _ = writeln!(out, "{},{},{},{},{}", m.method, m.statistic, m.p_value, m.b_used, m.escalated);
        }
        out
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => Ok(self.to_csv()),
        }
    }
}

/// Loads, validates and tests the request.
pub fn run_test_command(request: &AnalysisRequest) -> Result<TestReport> {
    let start = Instant::now();
    let g = parse_genotypes(&request.genotype_path)?;
    let y = parse_phenotypes(&request.phenotype_path, request.trait_kind)?;
    if y.len() != g.n() {
        return Err(Error::Dimension(format!(
            "{} phenotype values for {} genotyped subjects",
            y.len(),
            g.n()
        )));
    }
    let covariates = match &request.covariate_path {
        Some(p) => {
            let c = parse_covariates(p)?;
            if c.n() != g.n() {
                return Err(Error::Dimension(format!("{} covariate rows for {} subjects", c.n(), g.n())));
            }
            Some(c)
        }
        None => None,
    };
    let weights = match &request.weights {
        WeightSpec::Maf => WeightChoice::MafSd,
        WeightSpec::Flat => WeightChoice::Flat,
        WeightSpec::File(p) => {
            let w = parse_weights(p)?;
            if w.len() != g.k() {
                return Err(Error::Dimension(format!("{} weights for {} variants", w.len(), g.k())));
            }
            WeightChoice::Values(w)
        }
    };
    if !(request.alpha > 0.0 && request.alpha < 1.0) {
        return Err(Error::Config(format!("alpha {} outside (0, 1)", request.alpha)));
    }
    let options = AnalysisOptions {
        methods: MethodSet::new(&request.methods),
        weights: weights.clone(),
        plan: request.plan,
    };
    let result = analyze(&g, &y, covariates.as_ref(), &options)?;
    let methods = result
        .outcomes
        .into_iter()
        .map(|o| MethodReport {
            method: o.method,
            statistic: o.statistic,
            p_value: o.p_value,
            b_used: o.b_used,
            escalated: o.escalated,
            significant: o.p_value <= request.alpha,
            diagnostics: o.diagnostics,
        })
        .collect();
    Ok(TestReport {
        methods,
        metadata: ReportMetadata {
            n: result.n,
            k: result.k,
            excluded_snvs: result.excluded_snvs,
            weight_scheme: weights.scheme(),
            trait_kind: request.trait_kind,
            covariates: covariates.map(|c| c.labels().join(",")),
            seed: request.plan.seed,
            perms: request.plan.b_initial,
            perms_max: request.plan.b_max,
            alpha: request.alpha,
            wall_time: start.elapsed().as_secs_f64(),
        },
    })
}

/// Files written for one simulated replicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulationFiles {
    pub genotypes: PathBuf,
    pub phenotypes: PathBuf,
    pub covariates: Option<PathBuf>,
    pub truth: PathBuf,
}

/// Writes `genotypes.csv`, `phenotypes.csv`, `truth.csv` and, when the
/// scenario has a covariate, `covariates.csv` into `dir`. Every file starts
/// with comment lines holding the scenario and replicate index.
pub fn write_simulation(dir: &Path, config: &ScenarioConfig, replicate: u64, data: &SimulatedData) -> Result<SimulationFiles> {
    fs::create_dir_all(dir)?;
    let provenance = vec![
        format!("scenario {}", serde_json::to_string(config)?),
        format!("replicate {replicate}"),
    ];
    let files = SimulationFiles {
        genotypes: dir.join("genotypes.csv"),
        phenotypes: dir.join("phenotypes.csv"),
        covariates: data.covariates.as_ref().map(|_| dir.join("covariates.csv")),
        truth: dir.join("truth.csv"),
    };
    fs::write(&files.genotypes, format_genotypes(&data.genotypes, &provenance))?;
    fs::write(&files.phenotypes, format_phenotypes(&data.phenotype, &provenance))?;
    if let (Some(path), Some(c)) = (&files.covariates, &data.covariates) {
        fs::write(path, format_covariates(c, &provenance))?;
    }
    let mut truth = String::new();
    for c in &provenance {
        let _ = writeln!(truth, "# {c}");
    }
    truth.push_str("snv,true_maf,sample_maf,beta\n");
    let sample_maf = data.genotypes.maf();
    for (k, label) in data.genotypes.labels().iter().enumerate() {
        let _ = writeln!(truth, "{label},{},{},{}", data.true_mafs[k], sample_maf[k], data.beta[k]);
    }
    fs::write(&files.truth, truth)?;
    Ok(files)
}
