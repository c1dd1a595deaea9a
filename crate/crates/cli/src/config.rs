//! Command-line arguments and the optional JSON config file they override.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use sgpv_select::lasso::LassoOptions;
use sgpv_select::simbench::{Method, MethodSettings};
use sgpv_select::NullBound;

pub const WORKERS_ENV: &str = "SGPV_SELECT_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "sgpv-select", version, about = "Sparse linear model selection with second-generation p-values")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit selection methods on a CSV data set.
    Fit(FitArgs),
    /// Run one simulation scenario.
    Simulate(SimArgs),
    /// Run the cross-product of scenario lists.
    Sweep(SimArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON file supplying any of the flags; flags given here win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// prosgpv, prosgpv1, lasso, alasso, oracle, all, or a comma list.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub null_bound: Option<NullBound>,
    /// Number of penalty grid points.
    #[arg(long)]
    pub n_lambda: Option<usize>,
    /// Smallest-to-largest penalty ratio (default 1e-4 when n > p, else 1e-2).
    #[arg(long)]
    pub lambda_ratio: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: $SGPV_SELECT_WORKERS, then all cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Name of the outcome column.
    #[arg(long)]
    pub outcome: Option<String>,
    /// Repeated random train/test splits instead of a single fit.
    #[arg(long)]
    pub splits: Option<usize>,
    /// Training share in split mode.
    #[arg(long)]
    pub train_frac: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub s: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    pub rho: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub snr: Vec<f64>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Share of rows held out for test error.
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// Fixed coefficient vector (overrides --s).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub beta: Vec<f64>,
    /// Fixed noise variance (overrides --snr).
    #[arg(long)]
    pub sigma2: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub method: Option<String>,
    pub null_bound: Option<NullBound>,
    pub n_lambda: Option<usize>,
    pub lambda_ratio: Option<f64>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub data: Option<PathBuf>,
    pub outcome: Option<String>,
    pub splits: Option<usize>,
    pub train_frac: Option<f64>,
    pub label: Option<String>,
    pub n: Option<OneOrMany<usize>>,
    pub p: Option<OneOrMany<usize>>,
    pub s: Option<OneOrMany<usize>>,
    pub rho: Option<OneOrMany<f64>>,
    pub snr: Option<OneOrMany<f64>>,
    pub reps: Option<usize>,
    pub test_fraction: Option<f64>,
    pub beta: Option<Vec<f64>>,
    pub sigma2: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Flag if given, else config-file value, else `default`.
pub fn pick_list<T: Clone>(flag: &[T], file: &Option<OneOrMany<T>>, default: T) -> Vec<T> {
    if !flag.is_empty() {
        flag.to_vec()
    } else if let Some(v) = file {
        v.clone().into_vec()
    } else {
        vec![default]
    }
}

/// Settings shared by every subcommand after merging flags over the file.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub out: PathBuf,
    pub methods: Vec<Method>,
    pub settings: MethodSettings,
    pub seed: u64,
    pub workers: usize,
}

pub fn resolve_common(c: &Common, file: &FileConfig, default_methods: &str) -> Result<Resolved> {
    let method = c.method.clone().or_else(|| file.method.clone());
    let methods = Method::parse_list(method.as_deref().unwrap_or(default_methods))?;

    let mut lasso = LassoOptions::default();
    if let Some(k) = c.n_lambda.or(file.n_lambda) {
        lasso.n_lambda = k;
    }
    lasso.lambda_ratio = c.lambda_ratio.or(file.lambda_ratio);
    let mut settings = MethodSettings::default();
    settings.prosgpv.lasso = lasso;
    settings.alasso.lasso = lasso;
    if let Some(b) = c.null_bound.or(file.null_bound) {
        settings.prosgpv.null_bound = b;
    }

    let env_workers = match std::env::var(WORKERS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .with_context(|| format!("{WORKERS_ENV}={v} is not a count"))?,
        ),
        Err(_) => None,
    };
    let workers = c
        .workers
        .or(file.workers)
        .or(env_workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        bail!("workers must be at least 1");
    }

    Ok(Resolved {
        out: c.out.clone().or_else(|| file.out.clone()).unwrap_or_else(|| PathBuf::from("sgpv-out")),
        methods,
        settings,
        seed: c.seed.or(file.seed).unwrap_or(1),
        workers,
    })
}
