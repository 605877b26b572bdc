//! Synthetic SNV-set data.
//!
//! Genotypes come from two independent AR(1) latent vectors per subject,
//! thresholded at each variant's MAF quantile. MAFs are log-uniform on
//! `[0.001, 0.05]`; `round(πK)` randomly placed effects are uniform on
//! `[-δ, δ]`; traits follow the logit or identity model with zero intercept.
//!
//! Every replicate draws from its own streams keyed by `(seed, replicate)`,
//! so replicates can be generated in any order or in parallel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::null_model::{CovariateMatrix, PhenotypeVector, TraitKind};
use crate::score::GenotypeMatrix;
use crate::stat_math::{fill_ar1, normal_quantile, stream_id, RngStream};

const MAF_DOMAIN: u64 = 1;
const GENOTYPE_DOMAIN: u64 = 2;
const EFFECT_DOMAIN: u64 = 3;
const TRAIT_DOMAIN: u64 = 4;
const COVARIATE_DOMAIN: u64 = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub k: usize,
    pub n: usize,
    /// AR(1) correlation between adjacent latent loci.
    pub c: f64,
    /// Bounds of the log-uniform MAF distribution.
    pub maf_range: (f64, f64),
    /// Proportion of variants with a nonzero effect.
    pub pi: f64,
    /// Effects are uniform on `[-delta, delta]`.
    pub delta: f64,
    pub trait_kind: TraitKind,
    /// When set, one standard-normal covariate with this effect enters the
    /// linear predictor and is supplied to the test.
    #[serde(default)]
    pub covariate_effect: Option<f64>,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Simulation defaults: `n = 1000`, `c = 0.9`, MAF in `[0.001, 0.05]`.
    pub fn new(k: usize, pi: f64, delta: f64, trait_kind: TraitKind, seed: u64) -> Self {
        Self {
            k,
            n: 1000,
            c: 0.9,
            maf_range: (0.001, 0.05),
            pi,
            delta,
            trait_kind,
            covariate_effect: None,
            seed,
        }
    }

    /// `β = 0`.
    pub fn null(k: usize, trait_kind: TraitKind, seed: u64) -> Self {
        Self::new(k, 0.0, 0.0, trait_kind, seed)
    }

    pub fn dense_binary(k: usize, seed: u64) -> Self {
        Self::new(k, 0.20, 0.25, TraitKind::Binary, seed)
    }

    pub fn sparse_binary(k: usize, seed: u64) -> Self {
        Self::new(k, 0.02, 1.0, TraitKind::Binary, seed)
    }

    pub fn dense_continuous(k: usize, seed: u64) -> Self {
        Self::new(k, 0.20, 0.15, TraitKind::Continuous, seed)
    }

    pub fn sparse_continuous(k: usize, seed: u64) -> Self {
        Self::new(k, 0.02, 0.5, TraitKind::Continuous, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("K must be at least 1".into()));
        }
        if self.n < 2 {
            return Err(Error::Config("n must be at least 2".into()));
        }
        if !(0.0..1.0).contains(&self.c) {
            return Err(Error::Config(format!("AR(1) coefficient {} outside [0, 1)", self.c)));
        }
        let (lo, hi) = self.maf_range;
        if !(lo > 0.0 && lo <= hi && hi <= 0.5) {
            return Err(Error::Config(format!("MAF range ({lo}, {hi}) must satisfy 0 < lo ≤ hi ≤ 0.5")));
        }
        if !(0.0..=1.0).contains(&self.pi) {
            return Err(Error::Config(format!("effect proportion {} outside [0, 1]", self.pi)));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::Config(format!("effect bound {} must be non-negative", self.delta)));
        }
        if let Some(a) = self.covariate_effect {
            if !a.is_finite() {
                return Err(Error::Config("covariate effect must be finite".into()));
            }
        }
        Ok(())
    }

    /// `round(πK)`, halves rounded up.
    pub fn n_causal(&self) -> usize {
        (self.pi * self.k as f64 + 0.5).floor() as usize
    }

    fn stream(&self, domain: u64, replicate: u64) -> RngStream {
        RngStream::new(self.seed, stream_id(&[domain, replicate]))
    }
}

/// Log-uniform MAFs on `range`.
pub fn sample_mafs(k: usize, range: (f64, f64), rng: &mut RngStream) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::Config("K must be at least 1".into()));
    }
    let (lo, hi) = (range.0.ln(), range.1.ln());
    Ok((0..k)
        .map(|_| (lo + (hi - lo) * rng.uniform()).exp().clamp(range.0, range.1))
        .collect())
}

/// `G_ik = 1{Φ(Z1_ik) ≤ MAF_k} + 1{Φ(Z2_ik) ≤ MAF_k}` with AR(1) latents.
pub fn sample_genotypes(config: &ScenarioConfig, mafs: &[f64], rng: &mut RngStream) -> Result<GenotypeMatrix> {
    config.validate()?;
    if mafs.len() != config.k {
        return Err(Error::Dimension(format!("{} MAFs for K = {}", mafs.len(), config.k)));
    }
    // Φ(z) ≤ m  ⇔  z ≤ Φ⁻¹(m).
    let thresholds = mafs.iter().map(|&m| normal_quantile(m)).collect::<Result<Vec<_>>>()?;
    let (n, k) = (config.n, config.k);
    let mut counts = vec![0u8; n * k];
    let mut z1 = vec![0.0; k];
    let mut z2 = vec![0.0; k];
    for i in 0..n {
        fill_ar1(&mut z1, config.c, rng)?;
        fill_ar1(&mut z2, config.c, rng)?;
        for j in 0..k {
            counts[j * n + i] = (z1[j] <= thresholds[j]) as u8 + (z2[j] <= thresholds[j]) as u8;
        }
    }
    let labels = (1..=k).map(|j| format!("snv{j}")).collect();
    GenotypeMatrix::new(n, k, counts, labels)
}

/// `round(πK)` effects uniform on `[-δ, δ]` at positions drawn without
/// replacement; the rest are exactly zero.
pub fn sample_effects(config: &ScenarioConfig, rng: &mut RngStream) -> Result<Vec<f64>> {
    config.validate()?;
    let mut beta = vec![0.0; config.k];
    let m = config.n_causal();
    if m == 0 {
        return Ok(beta);
    }
    let mut positions: Vec<usize> = (0..config.k).collect();
    // Partial Fisher–Yates: the first m slots are a uniform draw without replacement.
    for i in 0..m {
        let j = i + rng.index_inclusive(config.k - 1 - i);
        positions.swap(i, j);
    }
    for &pos in &positions[..m] {
        beta[pos] = config.delta * (2.0 * rng.uniform() - 1.0);
    }
    Ok(beta)
}

/// Trait from the zero-intercept logit or identity model, with an optional
/// extra linear-predictor offset per subject.
pub fn sample_trait(
    g: &GenotypeMatrix,
    beta: &[f64],
    trait_kind: TraitKind,
    offset: Option<&[f64]>,
    rng: &mut RngStream,
) -> Result<PhenotypeVector> {
    if beta.len() != g.k() {
        return Err(Error::Dimension(format!("{} effects for {} variants", beta.len(), g.k())));
    }
    let n = g.n();
    if let Some(o) = offset {
        if o.len() != n {
            return Err(Error::Dimension(format!("offset length {} for {n} subjects", o.len())));
        }
    }
    let mut eta = offset.map_or_else(|| vec![0.0; n], <[f64]>::to_vec);
    for (k, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            for (e, &c) in eta.iter_mut().zip(g.column(k)) {
                *e += b * c as f64;
            }
        }
    }
    let values = match trait_kind {
        TraitKind::Binary => eta
            .iter()
            .map(|&x| {
                let p = 1.0 / (1.0 + (-x).exp());
                if rng.uniform() < p {
                    1.0
                } else {
                    0.0
                }
            })
            .collect(),
        TraitKind::Continuous => eta.iter().map(|&x| x + rng.standard_normal()).collect(),
    };
    PhenotypeVector::new(values, trait_kind)
}

/// One simulated dataset with its generating truth.
#[derive(Clone, Debug)]
pub struct SimulatedData {
    pub genotypes: GenotypeMatrix,
    pub phenotype: PhenotypeVector,
    pub covariates: Option<CovariateMatrix>,
    pub true_mafs: Vec<f64>,
    pub beta: Vec<f64>,
}

/// Generates replicate `replicate` of a scenario.
pub fn simulate_replicate(config: &ScenarioConfig, replicate: u64) -> Result<SimulatedData> {
    config.validate()?;
    let mafs = sample_mafs(config.k, config.maf_range, &mut config.stream(MAF_DOMAIN, replicate))?;
    let genotypes = sample_genotypes(config, &mafs, &mut config.stream(GENOTYPE_DOMAIN, replicate))?;
    let beta = sample_effects(config, &mut config.stream(EFFECT_DOMAIN, replicate))?;
    let (covariates, offset) = match config.covariate_effect {
        None => (None, None),
        Some(alpha) => {
            let mut rng = config.stream(COVARIATE_DOMAIN, replicate);
            let c: Vec<f64> = (0..config.n).map(|_| rng.standard_normal()).collect();
            let offset: Vec<f64> = c.iter().map(|v| alpha * v).collect();
            (Some(CovariateMatrix::new(vec![c], vec!["x1".into()])?), Some(offset))
        }
    };
    let phenotype = sample_trait(
        &genotypes,
        &beta,
        config.trait_kind,
        offset.as_deref(),
        &mut config.stream(TRAIT_DOMAIN, replicate),
    )?;
    Ok(SimulatedData {
        genotypes,
        phenotype,
        covariates,
        true_mafs: mafs,
        beta,
    })
}
