//! Monte Carlo power and type-I-error estimation over simulated replicates.
//!
//! Replicate `r` of a scenario uses data streams keyed by `(seed, r)` and a
//! permutation seed derived from the same pair, so results never depend on
//! thread count and a longer run extends a shorter one.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, AnalysisOptions, WeightChoice};
use crate::comparators::MethodTag;
use crate::error::{Error, Result};
use crate::null_model::TraitKind;
use crate::perm::{MethodSet, PermutationPlan};
use crate::simgen::{simulate_replicate, ScenarioConfig};
use crate::stat_math::derive_seed;

const PERMUTATION_SEED_DOMAIN: u64 = 0x5045_524d;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerOptions {
    pub methods: MethodSet,
    pub weights: WeightChoice,
    pub replicates: usize,
    /// Budget per replicate; the seed field is replaced per replicate.
    pub plan: PermutationPlan,
    pub alpha: f64,
    /// Runs with a larger share of unusable replicates fail.
    pub max_skip_fraction: f64,
}

impl PowerOptions {
    /// 500 replicates at a fixed 200 permutations, `α = 0.05`.
    pub fn desk_scale(methods: &[MethodTag]) -> Self {
        Self {
            methods: MethodSet::new(methods),
            weights: WeightChoice::MafSd,
            replicates: 500,
            plan: PermutationPlan::fixed(200, 0),
            alpha: 0.05,
            max_skip_fraction: 0.01,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config("at least one replicate required".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        self.plan.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub label: String,
    pub k: usize,
    pub n: usize,
    pub c: f64,
    pub pi: f64,
    pub delta: f64,
    pub trait_kind: TraitKind,
    pub covariate_effect: Option<f64>,
    pub seed: u64,
}

impl ScenarioSummary {
    pub fn from_config(config: &ScenarioConfig, label: Option<&str>) -> Self {
        let kind = match config.trait_kind {
            TraitKind::Binary => "binary",
            TraitKind::Continuous => "continuous",
        };
        let label = label.map_or_else(
            || format!("{kind}-pi{}-delta{}", config.pi, config.delta),
            str::to_string,
        );
        Self {
            label,
            k: config.k,
            n: config.n,
            c: config.c,
            pi: config.pi,
            delta: config.delta,
            trait_kind: config.trait_kind,
            covariate_effect: config.covariate_effect,
            seed: config.seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerResult {
    pub scenario: ScenarioSummary,
    pub method: MethodTag,
    /// Usable replicates (requested minus skipped).
    pub replicates: usize,
    pub skipped: usize,
    pub b: usize,
    pub alpha: f64,
    pub rejections: usize,
    pub power: f64,
    /// `1.96 √(power (1 - power) / replicates)`.
    pub mc_halfwidth: f64,
}

/// Permutation seed used for replicate `replicate` of a scenario.
pub fn replicate_permutation_seed(scenario_seed: u64, replicate: u64) -> u64 {
    derive_seed(derive_seed(scenario_seed, PERMUTATION_SEED_DOMAIN), replicate)
}

/// Per-replicate p-values, one entry per requested method, or `None` for a
/// degenerate replicate.
pub fn replicate_pvalues(config: &ScenarioConfig, options: &AnalysisOptions, replicate: u64) -> Result<Option<Vec<f64>>> {
    let data = simulate_replicate(config, replicate)?;
    let mut opts = options.clone();
    opts.plan.seed = replicate_permutation_seed(config.seed, replicate);
    match analyze(&data.genotypes, &data.phenotype, data.covariates.as_ref(), &opts) {
        Ok(result) => Ok(Some(result.outcomes.iter().map(|o| o.p_value).collect())),
        Err(e) if e.is_degenerate_data() => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn run_scenario(config: &ScenarioConfig, options: &PowerOptions) -> Result<Vec<PowerResult>> {
    run_labeled_scenario(config, None, options)
}

pub fn run_labeled_scenario(
    config: &ScenarioConfig,
    label: Option<&str>,
    options: &PowerOptions,
) -> Result<Vec<PowerResult>> {
    config.validate()?;
    options.validate()?;
    let analysis = AnalysisOptions {
        methods: options.methods.clone(),
        weights: options.weights.clone(),
        plan: options.plan,
    };
    let per_replicate: Vec<Option<Vec<f64>>> = (0..options.replicates as u64)
        .into_par_iter()
        .map(|r| replicate_pvalues(config, &analysis, r))
        .collect::<Result<_>>()?;
    let skipped = per_replicate.iter().filter(|r| r.is_none()).count();
    if skipped as f64 > options.max_skip_fraction * options.replicates as f64 {
        return Err(Error::Degenerate(format!(
            "{skipped} of {} replicates were degenerate (cap {:.1}%)",
            options.replicates,
            100.0 * options.max_skip_fraction
        )));
    }
    let used = options.replicates - skipped;
    let summary = ScenarioSummary::from_config(config, label);
    Ok(options
        .methods
        .tags
        .iter()
        .enumerate()
        .map(|(m, &method)| {
            let rejections = per_replicate
                .iter()
                .flatten()
                .filter(|p| p[m] <= options.alpha)
                .count();
            let power = rejections as f64 / used as f64;
            PowerResult {
                scenario: summary.clone(),
                method,
                replicates: used,
                skipped,
                b: options.plan.b_initial,
                alpha: options.alpha,
                rejections,
                power,
                mc_halfwidth: 1.96 * (power * (1.0 - power) / used as f64).sqrt(),
            }
        })
        .collect())
}

/// Results keyed by `(scenario, K, method)` in run order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PowerTable {
    pub rows: Vec<PowerResult>,
}

/// One `run_scenario` per `K`, all with the base seed.
pub fn sweep_k(base: &ScenarioConfig, k_values: &[usize], label: Option<&str>, options: &PowerOptions) -> Result<PowerTable> {
    if k_values.is_empty() {
        return Err(Error::Config("no K values to sweep".into()));
    }
    let mut table = PowerTable::default();
    for &k in k_values {
        let config = ScenarioConfig { k, ..base.clone() };
        table.rows.extend(run_labeled_scenario(&config, label, options)?);
    }
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub k: usize,
    pub power: f64,
    pub halfwidth: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub method: MethodTag,
    pub points: Vec<PlotPoint>,
}

/// Power-versus-K series for one scenario, ready for plotting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotFigure {
    pub scenario: String,
    pub x_axis: String,
    pub y_axis: String,
    pub series: Vec<PlotSeries>,
}

impl PowerTable {
    pub const CSV_HEADER: &'static str =
        "scenario,trait,method,K,n,pi,delta,power,halfwidth,rejections,replicates,skipped,B,alpha,seed";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let s = &r.scenario;
            let kind = match s.trait_kind {
                TraitKind::Binary => "binary",
                TraitKind::Continuous => "continuous",
            };
            let _ = writeln!(
                out,
                "{},{kind},{},{},{},{},{},{:.6},{:.6},{},{},{},{},{},{}",
                s.label, r.method, s.k, s.n, s.pi, s.delta, r.power, r.mc_halfwidth, r.rejections, r.replicates,
                r.skipped, r.b, r.alpha, s.seed
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn plot_data(&self) -> Vec<PlotFigure> {
        let mut figures: BTreeMap<String, BTreeMap<MethodTag, Vec<PlotPoint>>> = BTreeMap::new();
        let mut order: Vec<String> = Vec::new();
        for r in &self.rows {
            if !figures.contains_key(&r.scenario.label) {
                order.push(r.scenario.label.clone());
            }
            figures
                .entry(r.scenario.label.clone())
                .or_default()
                .entry(r.method)
                .or_default()
                .push(PlotPoint {
                    k: r.scenario.k,
                    power: r.power,
                    halfwidth: r.mc_halfwidth,
                });
        }
        order
            .into_iter()
            .map(|label| {
                let series = figures
                    .remove(&label)
                    .unwrap_or_default()
                    .into_iter()
                    .map(|(method, points)| PlotSeries { method, points })
                    .collect();
                PlotFigure {
                    scenario: label,
                    x_axis: "K".into(),
                    y_axis: "power".into(),
                    series,
                }
            })
            .collect()
    }

    pub fn power_of(&self, method: MethodTag) -> Option<f64> {
        self.rows.iter().find(|r| r.method == method).map(|r| r.power)
    }
}
