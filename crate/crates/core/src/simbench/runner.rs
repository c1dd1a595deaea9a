//! Replication loop and per-method aggregation.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{self, AdaptiveLassoConfig};
use crate::error::{Error, Result};
use crate::linalg::{Dataset, LinearModel};
use crate::prosgpv::{self, ProSgpvConfig};
use crate::simbench::generate::{draw_replication, ScenarioSpec};
use crate::simbench::metrics::{eval_metrics, MetricsRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Two-stage SGPV selection.
    ProSgpv,
    /// One-stage SGPV selection (full OLS screen).
    ProSgpv1,
    /// Lasso at the GIC penalty.
    Lasso,
    /// Adaptive lasso at the GIC penalty.
    Alasso,
    /// OLS on the true support.
    Oracle,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::ProSgpv,
        Method::ProSgpv1,
        Method::Lasso,
        Method::Alasso,
        Method::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::ProSgpv => "prosgpv",
            Method::ProSgpv1 => "prosgpv1",
            Method::Lasso => "lasso",
            Method::Alasso => "alasso",
            Method::Oracle => "oracle",
        }
    }

    /// Parses `all` or a comma-separated list of method names, dropping duplicates.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            if part == "all" {
                return Ok(Method::ALL.to_vec());
            }
            let m: Method = part.parse()?;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidInput("no methods given".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct MethodSettings {
    pub prosgpv: ProSgpvConfig,
    pub alasso: AdaptiveLassoConfig,
}

/// Fits `method` on `train`; `support` is only used by the oracle.
pub fn fit_method(
    method: Method,
    train: &Dataset,
    support: &[usize],
    settings: &MethodSettings,
) -> Result<LinearModel> {
    Ok(match method {
        Method::ProSgpv => prosgpv::fit_two_stage(train, &settings.prosgpv)?.model,
        Method::ProSgpv1 => prosgpv::fit_one_stage(train, &settings.prosgpv)?.model,
        Method::Lasso => baselines::lasso_gic_fit(train, &settings.prosgpv.lasso)?.model,
        Method::Alasso => baselines::adaptive_lasso_fit(train, &settings.alasso)?.model,
        Method::Oracle => baselines::oracle_model(train, support)?,
    })
}

#[cfg(not(target_arch = "wasm32"))]
fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = std::time::Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

#[cfg(target_arch = "wasm32")]
fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    (f(), 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub method: Method,
    /// Metrics, or the error tag of a failed fit.
    pub outcome: std::result::Result<MetricsRecord, String>,
}

/// Runs every method on one replication.
pub fn run_replication(
    spec: &ScenarioSpec,
    rep: usize,
    methods: &[Method],
    settings: &MethodSettings,
) -> Vec<ReplicationRecord> {
    let failed = |method: Method, e: &Error| ReplicationRecord {
        replication: rep,
        method,
        outcome: Err(e.tag().to_string()),
    };
    let draw = match draw_replication(spec, rep) {
        Ok(d) => d,
        Err(e) => return methods.iter().map(|&m| failed(m, &e)).collect(),
    };
    let support = &draw.truth.support;
    let oracle = baselines::oracle_model(&draw.train, support).ok();
    methods
        .iter()
        .map(|&method| {
            let (fit, secs) = timed(|| fit_method(method, &draw.train, support, settings));
            match fit {
                Ok(model) => {
                    let mut m = eval_metrics(&model, &draw.truth, &draw.test, oracle.as_ref());
                    m.runtime_seconds = secs;
                    ReplicationRecord {
                        replication: rep,
                        method,
                        outcome: Ok(m),
                    }
                }
                Err(e) => failed(method, &e),
            }
        })
        .collect()
}

/// First quartile, median and third quartile (linear interpolation between
/// order statistics).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Self {
            q1: quantile_sorted(&v, 0.25),
            median: quantile_sorted(&v, 0.5),
            q3: quantile_sorted(&v, 0.75),
        })
    }
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let h = (v.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub method: Method,
    /// Successful replications.
    pub reps: usize,
    pub failures: usize,
    pub capture_rate: f64,
    /// Wald 95% interval, clipped to [0, 1].
    pub capture_lo: f64,
    pub capture_hi: f64,
    pub power: f64,
    pub type1: f64,
    pub pfdr: f64,
    pub pfnr: f64,
    pub selected_size: f64,
    pub mae: Option<Quartiles>,
    pub relative_mae: Option<Quartiles>,
    pub test_rmse: Option<Quartiles>,
    pub relative_rmse: Option<Quartiles>,
    pub runtime_seconds: f64,
}

pub fn wald_interval(rate: f64, reps: usize) -> (f64, f64) {
    let hw = 1.96 * (rate * (1.0 - rate) / reps as f64).sqrt();
    ((rate - hw).max(0.0), (rate + hw).min(1.0))
}

pub fn aggregate(method: Method, records: &[ReplicationRecord]) -> Aggregate {
    let ok: Vec<&MetricsRecord> = records
        .iter()
        .filter(|r| r.method == method)
        .filter_map(|r| r.outcome.as_ref().ok())
        .collect();
    let failures = records
        .iter()
        .filter(|r| r.method == method && r.outcome.is_err())
        .count();
    let k = ok.len();
    let mean = |f: &dyn Fn(&MetricsRecord) -> f64| {
        if k == 0 {
            f64::NAN
        } else {
            ok.iter().map(|m| f(m)).sum::<f64>() / k as f64
        }
    };
    let quart = |f: &dyn Fn(&MetricsRecord) -> Option<f64>| {
        Quartiles::of(&ok.iter().filter_map(|m| f(m)).collect::<Vec<_>>())
    };
    let capture_rate = mean(&|m| m.captured as u8 as f64);
    let (capture_lo, capture_hi) = if k == 0 {
        (f64::NAN, f64::NAN)
    } else {
        wald_interval(capture_rate, k)
    };
    Aggregate {
        method,
        reps: k,
        failures,
        capture_rate,
        capture_lo,
        capture_hi,
        power: mean(&|m| m.power),
        type1: mean(&|m| m.type1),
        pfdr: mean(&|m| m.pfdr),
        pfnr: mean(&|m| m.pfnr),
        selected_size: mean(&|m| m.selected_size as f64),
        mae: quart(&|m| Some(m.mae)),
        relative_mae: quart(&|m| m.relative_mae),
        test_rmse: quart(&|m| Some(m.test_rmse)),
        relative_rmse: quart(&|m| m.relative_rmse),
        runtime_seconds: mean(&|m| m.runtime_seconds),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ScenarioSpec,
    pub methods: Vec<Method>,
    /// Ordered by replication, then by method order.
    pub records: Vec<ReplicationRecord>,
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentResult {
    pub fn failures(&self) -> usize {
        self.aggregates.iter().map(|a| a.failures).sum()
    }

    pub fn aggregate_for(&self, method: Method) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.method == method)
    }
}

/// Runs `spec.reps` replications on `workers` threads. Results do not depend
/// on `workers`.
pub fn run_experiment(
    spec: &ScenarioSpec,
    methods: &[Method],
    settings: &MethodSettings,
    workers: usize,
) -> Result<ExperimentResult> {
    spec.validate()?;
    if methods.is_empty() {
        return Err(Error::InvalidInput("no methods given".into()));
    }
    let one = |rep: usize| run_replication(spec, rep, methods, settings);
    let per_rep: Vec<Vec<ReplicationRecord>> = if workers <= 1 {
        (0..spec.reps).map(one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
        pool.install(|| (0..spec.reps).into_par_iter().map(one).collect())
    };
    let records: Vec<ReplicationRecord> = per_rep.into_iter().flatten().collect();
    let aggregates = methods.iter().map(|&m| aggregate(m, &records)).collect();
    Ok(ExperimentResult {
        spec: spec.clone(),
        methods: methods.to_vec(),
        records,
        aggregates,
    })
}
