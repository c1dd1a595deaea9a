use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde_json::{json, Value};
use sgpv_select::baselines::{adaptive_lasso_fit, lasso_gic_fit};
use sgpv_select::data::read_csv_path;
use sgpv_select::prosgpv::{fit_one_stage, fit_two_stage, SelectionResult};
use sgpv_select::simbench::generate::stream_rng;
use sgpv_select::simbench::{Method, MethodSettings, Quartiles};
use sgpv_select::{Dataset, LinearModel, OlsFit};

use crate::config::{resolve_common, FileConfig, FitArgs, Resolved};

const FIT_METHODS: &str = "prosgpv";

struct MethodFit {
    model: LinearModel,
    /// Original-scale refit with intercept, when the method produces one.
    refit: Option<OlsFit>,
    diagnostics: Value,
}

fn names(data: &Dataset, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&j| data.column_names()[j].clone()).collect()
}

fn sgpv_diagnostics(data: &Dataset, r: &SelectionResult) -> Value {
    let entries: Vec<Value> = r
        .sgpv_report
        .entries
        .iter()
        .map(|e| {
            json!({
                "variable": data.column_names()[e.index],
                "estimate_std": e.estimate,
                "se_std": e.se,
                "ci_lo": e.interval.lo,
                "ci_hi": e.interval.hi,
                "sgpv": e.p_delta,
                "keep": e.keep,
            })
        })
        .collect();
    json!({
        "lambda_gic": r.stage1_lambda(),
        "candidates": names(data, r.stage1_candidate_set()),
        "candidates_truncated_from": r.stage_one.truncated_from,
        "null_bound": r.null_bound,
        "sgpv": entries,
    })
}

fn fit_one(method: Method, data: &Dataset, settings: &MethodSettings) -> sgpv_select::Result<MethodFit> {
    Ok(match method {
        Method::ProSgpv | Method::ProSgpv1 => {
            let r = if method == Method::ProSgpv {
                fit_two_stage(data, &settings.prosgpv)?
            } else {
                fit_one_stage(data, &settings.prosgpv)?
            };
            let mut diagnostics = sgpv_diagnostics(data, &r);
            diagnostics["null_bound_variant"] = json!(settings.prosgpv.null_bound.name());
            MethodFit {
                model: r.model,
                refit: Some(r.refit),
                diagnostics,
            }
        }
        Method::Lasso => {
            let f = lasso_gic_fit(data, &settings.prosgpv.lasso)?;
            MethodFit {
                model: f.model,
                refit: None,
                diagnostics: json!({ "lambda_gic": f.lambda }),
            }
        }
        Method::Alasso => {
            let f = adaptive_lasso_fit(data, &settings.alasso)?;
            let weights: Vec<Option<f64>> = f.weights.iter().map(|w| w.is_finite().then_some(*w)).collect();
            MethodFit {
                model: f.model,
                refit: None,
                diagnostics: json!({ "lambda_gic": f.lambda, "gamma": f.gamma, "weights": weights }),
            }
        }
        Method::Oracle => unreachable!("rejected before fitting"),
    })
}

fn method_report(method: Method, data: &Dataset, fit: &MethodFit) -> Value {
    let sel = &fit.model.selected;
    let coefficients: Vec<Value> = sel
        .iter()
        .enumerate()
        .map(|(k, &j)| {
            json!({
                "variable": data.column_names()[j],
                "estimate": fit.model.coefficients[j],
                "se": fit.refit.as_ref().map(|r| r.se[k]),
            })
        })
        .collect();
    json!({
        "method": method.name(),
        "selected": names(data, sel),
        "intercept": fit.model.intercept,
        "intercept_se": fit.refit.as_ref().and_then(|r| r.intercept_se),
        "coefficients": coefficients,
        "diagnostics": fit.diagnostics,
    })
}

fn print_summary(method: Method, data: &Dataset, fit: &MethodFit) {
    println!("== {method} ==");
    let sel = &fit.model.selected;
    if sel.is_empty() {
        println!("  no variables selected (intercept {:.6})", fit.model.intercept);
        return;
    }
    println!("  {:<20} {:>14} {:>12}", "variable", "estimate", "se");
    println!("  {:<20} {:>14.6}", "(intercept)", fit.model.intercept);
    for (k, &j) in sel.iter().enumerate() {
        let se = fit
            .refit
            .as_ref()
            .map_or_else(|| "-".to_string(), |r| format!("{:.6}", r.se[k]));
        println!("  {:<20} {:>14.6} {:>12}", data.column_names()[j], fit.model.coefficients[j], se);
    }
}

pub fn run(args: FitArgs) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let cfg = resolve_common(&args.common, &file, FIT_METHODS)?;
    let requested = args.common.method.as_deref().or(file.method.as_deref()).unwrap_or(FIT_METHODS);
    if requested.split(',').any(|m| m.trim() == "oracle") {
        bail!("the oracle needs the true support and is only available in simulations");
    }
    // `all` on real data means every method that needs no ground truth
    let methods: Vec<Method> = cfg.methods.iter().copied().filter(|m| *m != Method::Oracle).collect();
    let data_path = args
        .data
        .or(file.data.clone())
        .context("fit needs --data")?;
    let outcome = args
        .outcome
        .or(file.outcome.clone())
        .context("fit needs --outcome")?;
    let loaded = read_csv_path(&data_path, &outcome)?;
    if loaded.dropped_rows > 0 {
        eprintln!("warning: dropped {} rows with missing values", loaded.dropped_rows);
    }
    let data = loaded.data;
    if data.p() < 2 {
        bail!("need at least two feature columns besides `{outcome}`");
    }
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;

    let splits = args.splits.or(file.splits);
    let report = match splits {
        Some(k) => {
            let frac = args.train_frac.or(file.train_frac).unwrap_or(0.7);
            run_splits(&data, &methods, &cfg, k, frac)?
        }
        None => single_fit(&data, &methods, &cfg)?,
    };
    let report = json!({
        "data": data_path.display().to_string(),
        "outcome": outcome,
        "rows": data.n(),
        "dropped_rows": loaded.dropped_rows,
        "features": data.column_names(),
        "result": report,
    });
    write_json(&cfg.out.join("report.json"), &report)?;
    eprintln!("wrote {}", cfg.out.join("report.json").display());
    Ok(())
}

fn single_fit(data: &Dataset, methods: &[Method], cfg: &Resolved) -> Result<Value> {
    let mut reports = Vec::new();
    let mut failures = 0;
    for &m in methods {
        match fit_one(m, data, &cfg.settings) {
            Ok(fit) => {
                print_summary(m, data, &fit);
                reports.push(method_report(m, data, &fit));
            }
            Err(e) => {
                eprintln!("warning: {m} failed: {e}");
                failures += 1;
                reports.push(json!({ "method": m.name(), "error": e.tag(), "message": e.to_string() }));
            }
        }
    }
    if failures == methods.len() {
        bail!("every requested method failed");
    }
    Ok(json!({ "methods": reports }))
}

struct SplitOutcome {
    split: usize,
    method: Method,
    result: std::result::Result<(Vec<usize>, f64), &'static str>,
}

fn run_splits(data: &Dataset, methods: &[Method], cfg: &Resolved, splits: usize, frac: f64) -> Result<Value> {
    if splits == 0 || !(frac > 0.0 && frac < 1.0) {
        bail!("need --splits >= 1 and --train-frac in (0, 1)");
    }
    let n = data.n();
    let n_train = (n as f64 * frac).round() as usize;
    if n_train < 3 || n_train >= n {
        bail!("train fraction {frac} leaves {n_train} of {n} rows for training");
    }
    let one = |split: usize| -> Vec<SplitOutcome> {
        let mut rows: Vec<usize> = (0..n).collect();
        rows.shuffle(&mut stream_rng(cfg.seed, split as u64));
        let (train_rows, test_rows) = rows.split_at(n_train);
        let train = data.select_rows(train_rows);
        let test = data.select_rows(test_rows);
        methods
            .iter()
            .map(|&method| {
                let result = match (&train, &test) {
                    (Ok(train), Ok(test)) => fit_one(method, train, &cfg.settings)
                        .map(|f| {
                            let r = f.model.predict(test.x()) - test.y();
                            (f.model.selected, (r.norm_squared() / test.n() as f64).sqrt())
                        })
                        .map_err(|e| e.tag()),
                    (Err(e), _) | (_, Err(e)) => Err(e.tag()),
                };
                SplitOutcome { split, method, result }
            })
            .collect()
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build()?;
    let outcomes: Vec<SplitOutcome> = pool.install(|| (0..splits).into_par_iter().flat_map_iter(one).collect());

    let path = cfg.out.join("splits.csv");
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["split", "method", "status", "selected_size", "test_rmse", "selected"])?;
    for o in &outcomes {
        let row = match &o.result {
            Ok((sel, rmse)) => [
                o.split.to_string(),
                o.method.to_string(),
                "ok".into(),
                sel.len().to_string(),
                rmse.to_string(),
                names(data, sel).join(";"),
            ],
            Err(tag) => [o.split.to_string(), o.method.to_string(), tag.to_string(), String::new(), String::new(), String::new()],
        };
        w.write_record(&row)?;
    }
    w.flush()?;
    eprintln!("wrote {}", path.display());

    let mut per_method = Vec::new();
    for &m in methods {
        let ok: Vec<&(Vec<usize>, f64)> = outcomes
            .iter()
            .filter(|o| o.method == m)
            .filter_map(|o| o.result.as_ref().ok())
            .collect();
        let failures = splits - ok.len();
        let sizes: Vec<f64> = ok.iter().map(|(s, _)| s.len() as f64).collect();
        let rmse: Vec<f64> = ok.iter().map(|(_, r)| *r).collect();
        let mut freq = vec![0usize; data.p()];
        for (sel, _) in &ok {
            for &j in sel {
                freq[j] += 1;
            }
        }
        let frequency: serde_json::Map<String, Value> = data
            .column_names()
            .iter()
            .zip(&freq)
            .map(|(name, &c)| (name.clone(), json!(c as f64 / ok.len().max(1) as f64)))
            .collect();
        let size = Quartiles::of(&sizes);
        let err = Quartiles::of(&rmse);
        println!(
            "{m:<9} splits ok {:>5}  median size {:>5}  median test RMSE {}",
            ok.len(),
            size.map_or("-".into(), |q| q.median.to_string()),
            err.map_or("-".into(), |q| format!("{:.6}", q.median)),
        );
        per_method.push(json!({
            "method": m.name(),
            "failures": failures,
            "selected_size": size,
            "test_rmse": err,
            "selection_frequency": frequency,
        }));
    }
    Ok(json!({
        "splits": splits,
        "train_fraction": frac,
        "train_rows": n_train,
        "seed": cfg.seed,
        "methods": per_method,
    }))
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}
