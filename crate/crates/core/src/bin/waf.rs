use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use adaptive_fisher::analysis::WeightChoice;
use adaptive_fisher::comparators::MethodTag;
use adaptive_fisher::io::{self, AnalysisRequest, OutputFormat, WeightSpec};
use adaptive_fisher::null_model::TraitKind;
use adaptive_fisher::perm::{MethodSet, PermutationPlan};
use adaptive_fisher::power::{sweep_k, PowerOptions};
use adaptive_fisher::simgen::{simulate_replicate, ScenarioConfig};
use adaptive_fisher::{Error, Result};

/// Weighted adaptive Fisher tests for rare-variant sets.
///
/// Set WAF_THREADS to bound the worker pool; results do not depend on it.
#[derive(Parser)]
#[command(name = "waf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test one SNV set read from files.
    Test(TestArgs),
    /// Write one simulated replicate as input files.
    Simulate(SimulateArgs),
    /// Estimate power or type-I error over simulated replicates.
    Power(PowerArgs),
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    genotypes: Option<PathBuf>,
    #[arg(long)]
    phenotypes: Option<PathBuf>,
    #[arg(long)]
    covariates: Option<PathBuf>,
    /// Repeatable; also accepts comma lists. Defaults to waf.
    #[arg(long = "method")]
    methods: Vec<String>,
    #[arg(long)]
    perms: Option<usize>,
    #[arg(long)]
    perms_max: Option<usize>,
    /// maf, flat or file:PATH
    #[arg(long)]
    weights: Option<String>,
    #[arg(long = "trait")]
    trait_kind: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// json or csv
    #[arg(long)]
    format: Option<String>,
    /// key=value file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ScenarioArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// AR(1) correlation.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    pi: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "trait")]
    trait_kind: Option<String>,
    #[arg(long)]
    maf_min: Option<f64>,
    #[arg(long)]
    maf_max: Option<f64>,
    /// Adds a standard-normal covariate with this effect.
    #[arg(long)]
    covariate_effect: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, default_value_t = 0)]
    replicate: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PowerArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Comma list of K values; defaults to --k.
    #[arg(long)]
    k_values: Option<String>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Fixed permutations per replicate.
    #[arg(long)]
    perms: Option<usize>,
    #[arg(long = "method")]
    methods: Vec<String>,
    #[arg(long)]
    weights: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    label: Option<String>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

struct Settings(BTreeMap<String, Vec<String>>);

impl Settings {
    fn load(path: Option<&PathBuf>) -> Result<Self> {
        Ok(Settings(match path {
            Some(p) => io::parse_config(p)?,
            None => BTreeMap::new(),
        }))
    }

    fn get<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.0.get(key).and_then(|v| v.last()) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| Error::Config(format!("config value '{raw}' for '{key}' is invalid"))),
            None => Ok(None),
        }
    }

    fn list(&self, flag: &[String], key: &str) -> Vec<String> {
        let raw = if flag.is_empty() { self.0.get(key).cloned().unwrap_or_default() } else { flag.to_vec() };
        raw.iter()
            .flat_map(|s| s.split(','))
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect()
    }
}

fn parse_methods(tokens: &[String]) -> Result<Vec<MethodTag>> {
    if tokens.is_empty() {
        return Ok(vec![MethodTag::Waf]);
    }
    let mut out = Vec::new();
    for t in tokens {
        if t == "all" {
            out.extend(MethodTag::study_set());
        } else {
            out.push(t.parse()?);
        }
    }
    Ok(out)
}

fn required<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("--{name} is required")))
}

fn run_test(args: TestArgs) -> Result<()> {
    let cfg = Settings::load(args.config.as_ref())?;
    let b_initial = cfg.get(args.perms, "perms")?.unwrap_or(100);
    let plan = PermutationPlan {
        b_initial,
        b_max: cfg.get(args.perms_max, "perms-max")?.unwrap_or(10_000.max(b_initial)),
        seed: cfg.get(args.seed, "seed")?.unwrap_or(0),
        ..PermutationPlan::default()
    };
    let request = AnalysisRequest {
        genotype_path: required(cfg.get(args.genotypes, "genotypes")?, "genotypes")?,
        phenotype_path: required(cfg.get(args.phenotypes, "phenotypes")?, "phenotypes")?,
        covariate_path: cfg.get(args.covariates, "covariates")?,
        weights: cfg.get(args.weights, "weights")?.as_deref().unwrap_or("maf").parse()?,
        trait_kind: required(cfg.get(args.trait_kind, "trait")?, "trait")?.parse()?,
        methods: parse_methods(&cfg.list(&args.methods, "method"))?,
        plan,
        alpha: cfg.get(args.alpha, "alpha")?.unwrap_or(0.05),
    };
    let format: OutputFormat = cfg.get(args.format, "format")?.as_deref().unwrap_or("json").parse()?;
    let report = io::run_test_command(&request)?;
    let mut text = report.render(format)?;
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match cfg.get(args.out, "out")? {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn scenario(args: &ScenarioArgs) -> Result<ScenarioConfig> {
    let cfg = Settings::load(args.config.as_ref())?;
    let kind: TraitKind = cfg.get(args.trait_kind.clone(), "trait")?.as_deref().unwrap_or("binary").parse()?;
    let mut config = ScenarioConfig::new(
        cfg.get(args.k, "k")?.unwrap_or(50),
        cfg.get(args.pi, "pi")?.unwrap_or(0.0),
        cfg.get(args.delta, "delta")?.unwrap_or(0.0),
        kind,
        cfg.get(args.seed, "seed")?.unwrap_or(0),
    );
    config.n = cfg.get(args.n, "n")?.unwrap_or(config.n);
    config.c = cfg.get(args.c, "c")?.unwrap_or(config.c);
    config.maf_range = (
        cfg.get(args.maf_min, "maf-min")?.unwrap_or(config.maf_range.0),
        cfg.get(args.maf_max, "maf-max")?.unwrap_or(config.maf_range.1),
    );
    config.covariate_effect = cfg.get(args.covariate_effect, "covariate-effect")?;
    config.validate()?;
    Ok(config)
}

fn run_simulate(args: SimulateArgs) -> Result<()> {
    let config = scenario(&args.scenario)?;
    let data = simulate_replicate(&config, args.replicate)?;
    let files = io::write_simulation(&args.out, &config, args.replicate, &data)?;
    eprintln!(
        "wrote {} subjects x {} variants to {}",
        data.genotypes.n(),
        data.genotypes.k(),
        files.genotypes.parent().unwrap_or(&args.out).display()
    );
    Ok(())
}

fn run_power(args: PowerArgs) -> Result<()> {
    let base = scenario(&args.scenario)?;
    let cfg = Settings::load(args.scenario.config.as_ref())?;
    let k_values: Vec<usize> = match cfg.get(args.k_values, "k-values")? {
        Some(list) => list
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| Error::Config(format!("bad K value '{s}'"))))
            .collect::<Result<_>>()?,
        None => vec![base.k],
    };
    let methods = {
        let tokens = cfg.list(&args.methods, "method");
        if tokens.is_empty() { MethodTag::study_set() } else { parse_methods(&tokens)? }
    };
    let weights = match cfg.get(args.weights, "weights")?.as_deref().unwrap_or("maf").parse()? {
        WeightSpec::Maf => WeightChoice::MafSd,
        WeightSpec::Flat => WeightChoice::Flat,
        WeightSpec::File(_) => return Err(Error::Config("file weights are not available for simulated data".into())),
    };
    let options = PowerOptions {
        methods: MethodSet::new(&methods),
        weights,
        replicates: cfg.get(args.replicates, "replicates")?.unwrap_or(500),
        plan: PermutationPlan::fixed(cfg.get(args.perms, "perms")?.unwrap_or(200), 0),
        alpha: cfg.get(args.alpha, "alpha")?.unwrap_or(0.05),
        max_skip_fraction: 0.01,
    };
    let label = cfg.get(args.label, "label")?;
    let table = sweep_k(&base, &k_values, label.as_deref(), &options)?;
    let csv = table.to_csv();
    match cfg.get(args.out, "out")? {
        Some(path) => fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    if let Some(path) = cfg.get(args.json, "json")? {
        fs::write(path, table.to_json()?)?;
    }
    if let Some(path) = cfg.get(args.plot_data, "plot-data")? {
        fs::write(path, serde_json::to_string_pretty(&table.plot_data())?)?;
    }
    Ok(())
}

fn configure_threads() -> Result<()> {
    if let Ok(raw) = std::env::var("WAF_THREADS") {
        let threads: usize = raw
            .parse()
            .map_err(|_| Error::Config(format!("WAF_THREADS='{raw}' is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Test(a) => run_test(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Power(a) => run_power(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("waf: {} error: {e}", e.kind());
            ExitCode::from(if matches!(e, Error::Config(_) | Error::Plan(_)) { 2 } else { 1 })
        }
    }
}
