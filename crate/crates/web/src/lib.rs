//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain numbers and returns a JSON string; failures come
//! back as `{"error": "..."}` so the page can show them inline.

use serde_json::{json, Value};
use sgpv_select::prosgpv::{fit_two_stage, ProSgpvConfig};
use sgpv_select::sgpv::{exceeds_threshold, sgpv_value, Interval, NullBound, Z_95};
use sgpv_select::simbench::{draw_replication, run_experiment, Method, MethodSettings, ScenarioSpec};
use wasm_bindgen::prelude::*;

fn respond(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn scenario(n: usize, p: usize, s: usize, rho: f64, snr: f64, seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        n,
        p,
        s,
        rho,
        snr,
        reps: 1,
        master_seed: seed,
        ..Default::default()
    }
}

/// SGPV of the interval `estimate +- 1.96 se` against the null `[-bound, bound]`.
#[wasm_bindgen]
pub fn sgpv_interval(estimate: f64, se: f64, bound: f64) -> String {
    respond((|| {
        if !(se > 0.0 && bound >= 0.0) {
            return Err("need se > 0 and bound >= 0".to_string());
        }
        let ci = Interval::symmetric(estimate, Z_95 * se);
        let keep = exceeds_threshold(estimate, se, bound, Z_95);
        let p_delta = if bound > 0.0 {
            sgpv_value(&ci, &Interval::symmetric(0.0, bound)).map_err(|e| e.to_string())?
        } else if keep {
            0.0
        } else {
            0.5
        };
        Ok(json!({
            "lo": ci.lo,
            "hi": ci.hi,
            "bound": bound,
            "sgpv": p_delta,
            "keep": keep,
            "threshold": Z_95 * se + bound,
        }))
    })())
}

/// Simulates one data set and runs the two-stage selection on it, returning
/// the lasso path, the GIC choice, the candidate intervals and the selection.
#[wasm_bindgen]
pub fn fit_simulated(n: usize, p: usize, s: usize, rho: f64, snr: f64, seed: u32, null_bound: &str) -> String {
    respond((|| {
        let bound: NullBound = null_bound.parse().map_err(|e: sgpv_select::Error| e.to_string())?;
        let spec = scenario(n, p, s, rho, snr, seed.into());
        let draw = draw_replication(&spec, 0).map_err(|e| e.to_string())?;
        let config = ProSgpvConfig {
            null_bound: bound,
            ..Default::default()
        };
        let fit = fit_two_stage(&draw.train, &config).map_err(|e| e.to_string())?;
        let path = fit.stage_one.path.as_ref();
        let lambdas = path.map(|p| p.lambdas.clone()).unwrap_or_default();
        // one series per column across the grid
        let coefs: Vec<Vec<f64>> = (0..p)
            .map(|j| path.map_or_else(Vec::new, |pp| pp.betas.iter().map(|b| b[j]).collect()))
            .collect();
        let intervals: Vec<Value> = fit
            .sgpv_report
            .entries
            .iter()
            .map(|e| {
                json!({
                    "index": e.index,
                    "estimate": e.estimate,
                    "lo": e.interval.lo,
                    "hi": e.interval.hi,
                    "sgpv": e.p_delta,
                    "keep": e.keep,
                })
            })
            .collect();
        Ok(json!({
            "lambdas": lambdas,
            "coefficients": coefs,
            "lambda_gic": fit.stage1_lambda(),
            "candidates": fit.stage1_candidate_set(),
            "null_bound": fit.null_bound,
            "intervals": intervals,
            "selected": fit.selected,
            "truth": draw.truth.support,
            "beta0": draw.truth.beta0.as_slice(),
            "estimates": fit.model.coefficients.as_slice(),
        }))
    })())
}

/// Small Monte Carlo comparison of exact-support capture rates.
#[wasm_bindgen]
pub fn capture_rates(n: usize, p: usize, s: usize, rho: f64, snr: f64, reps: usize, seed: u32) -> String {
    respond((|| {
        let spec = ScenarioSpec {
            reps,
            ..scenario(n, p, s, rho, snr, seed.into())
        };
        let methods = [Method::ProSgpv, Method::Lasso, Method::Alasso];
        let res = run_experiment(&spec, &methods, &MethodSettings::default(), 1).map_err(|e| e.to_string())?;
        let rows: Vec<Value> = res
            .aggregates
            .iter()
            .map(|a| {
                json!({
                    "method": a.method.name(),
                    "reps": a.reps,
                    "failures": a.failures,
                    "capture": a.capture_rate,
                    "lo": a.capture_lo,
                    "hi": a.capture_hi,
                    "power": a.power,
                    "type1": a.type1,
                })
            })
            .collect();
        Ok(json!({ "methods": rows }))
    })())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: String) -> Value {
        serde_json::from_str(&s).unwrap()
    }

    #[test]
    fn interval_explorer() {
        let v = parse(sgpv_interval(0.5, 0.1, 0.1));
        assert_eq!(v["keep"], true);
        assert_eq!(v["sgpv"], 0.0);
        let v = parse(sgpv_interval(0.25, 0.1, 0.1));
        assert_eq!(v["keep"], false);
        assert!(v["sgpv"].as_f64().unwrap() > 0.0);
        assert!(parse(sgpv_interval(0.1, 0.0, 0.1))["error"].is_string());
    }

    #[test]
    fn simulated_fit() {
        let v = parse(fit_simulated(200, 10, 3, 0.35, 2.0, 3, "sebar"));
        assert!(v.get("error").is_none(), "{v}");
        assert_eq!(v["coefficients"].as_array().unwrap().len(), 10);
        assert_eq!(v["lambdas"].as_array().unwrap().len(), 100);
        let sel = v["selected"].as_array().unwrap();
        let cand = v["candidates"].as_array().unwrap();
        assert!(sel.iter().all(|j| cand.contains(j)));
        assert!(parse(fit_simulated(200, 10, 3, 0.35, 2.0, 3, "bogus"))["error"].is_string());
    }

    #[test]
    fn capture_table() {
        let v = parse(capture_rates(100, 8, 2, 0.0, 2.0, 5, 1));
        let rows = v["methods"].as_array().unwrap();
        assert_eq!(rows.len(), 3);
        for r in rows {
            assert_eq!(r["reps"], 5);
            let c = r["capture"].as_f64().unwrap();
            assert!((0.0..=1.0).contains(&c));
        }
        assert!(parse(capture_rates(100, 8, 20, 0.0, 2.0, 5, 1))["error"].is_string());
    }
}
