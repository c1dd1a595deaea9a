//! Tabular and JSON output for experiments.
//!
//! CSV bodies hold only values that are pure functions of the scenario, so
//! reruns are byte-identical; wall-clock runtimes go to the JSON summary's
//! `timing` block.

use std::io::Write;

use crate::error::Result;
use crate::simbench::generate::ScenarioSpec;
use crate::simbench::runner::{Aggregate, ExperimentResult, Quartiles};

pub const SCENARIO_COLUMNS: [&str; 6] = ["scenario", "n", "p", "s", "rho", "snr"];

pub const REPLICATION_COLUMNS: [&str; 19] = [
    "scenario",
    "n",
    "p",
    "s",
    "rho",
    "snr",
    "method",
    "replication",
    "status",
    "captured",
    "power",
    "type1",
    "pfdr",
    "pfnr",
    "mae",
    "relative_mae",
    "test_rmse",
    "relative_rmse",
    "selected_size",
];

pub const AGGREGATE_COLUMNS: [&str; 29] = [
    "scenario",
    "n",
    "p",
    "s",
    "rho",
    "snr",
    "method",
    "reps",
    "failures",
    "capture_rate",
    "capture_lo",
    "capture_hi",
    "power",
    "type1",
    "pfdr",
    "pfnr",
    "selected_size",
    "mae_q1",
    "mae_median",
    "mae_q3",
    "relative_mae_q1",
    "relative_mae_median",
    "relative_mae_q3",
    "test_rmse_q1",
    "test_rmse_median",
    "test_rmse_q3",
    "relative_rmse_q1",
    "relative_rmse_median",
    "relative_rmse_q3",
];

fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn scenario_fields(spec: &ScenarioSpec, s: usize) -> Vec<String> {
    vec![
        spec.label(),
        spec.n.to_string(),
        spec.p.to_string(),
        s.to_string(),
        num(spec.rho),
        if spec.sigma2.is_some() { String::new() } else { num(spec.snr) },
    ]
}

fn true_size(result: &ExperimentResult) -> usize {
    match &result.spec.beta {
        Some(b) => b.iter().filter(|v| **v != 0.0).count(),
        None => result.spec.s,
    }
}

pub fn write_replications_csv<W: Write>(out: W, results: &[ExperimentResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(REPLICATION_COLUMNS)?;
    for res in results {
        let scenario = scenario_fields(&res.spec, true_size(res));
        for rec in &res.records {
            let mut row = scenario.clone();
            row.push(rec.method.to_string());
            row.push(rec.replication.to_string());
            match &rec.outcome {
                Ok(m) => {
                    row.push("ok".into());
                    row.push((m.captured as u8).to_string());
                    row.extend([m.power, m.type1, m.pfdr, m.pfnr, m.mae].map(num));
                    row.push(opt(m.relative_mae));
                    row.push(num(m.test_rmse));
                    row.push(opt(m.relative_rmse));
                    row.push(m.selected_size.to_string());
                }
                Err(tag) => {
                    row.push(tag.clone());
                    row.extend(std::iter::repeat_n(String::new(), 10));
                }
            }
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| crate::Error::Csv(e.to_string()))?;
    Ok(())
}

fn quartile_fields(q: Option<Quartiles>) -> [String; 3] {
    match q {
        Some(q) => [q.q1, q.median, q.q3].map(num),
        None => Default::default(),
    }
}

fn aggregate_row(scenario: &[String], a: &Aggregate) -> Vec<String> {
    let mut row = scenario.to_vec();
    row.push(a.method.to_string());
    row.push(a.reps.to_string());
    row.push(a.failures.to_string());
    row.extend(
        [
            a.capture_rate,
            a.capture_lo,
            a.capture_hi,
            a.power,
            a.type1,
            a.pfdr,
            a.pfnr,
            a.selected_size,
        ]
        .map(num),
    );
    for q in [a.mae, a.relative_mae, a.test_rmse, a.relative_rmse] {
        row.extend(quartile_fields(q));
    }
    row
}

pub fn write_aggregates_csv<W: Write>(out: W, results: &[ExperimentResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(AGGREGATE_COLUMNS)?;
    for res in results {
        let scenario = scenario_fields(&res.spec, true_size(res));
        for a in &res.aggregates {
            w.write_record(aggregate_row(&scenario, a))?;
        }
    }
    w.flush().map_err(|e| crate::Error::Csv(e.to_string()))?;
    Ok(())
}

/// Machine-readable aggregates per scenario, without runtimes.
pub fn summary(results: &[ExperimentResult]) -> serde_json::Value {
    let cells: Vec<serde_json::Value> = results
        .iter()
        .map(|r| {
            let aggregates: Vec<serde_json::Value> = r
                .aggregates
                .iter()
                .map(|a| {
                    let mut v = serde_json::to_value(a).unwrap_or_default();
                    if let Some(obj) = v.as_object_mut() {
                        obj.remove("runtime_seconds");
                    }
                    v
                })
                .collect();
            serde_json::json!({
                "scenario": r.spec.label(),
                "spec": r.spec,
                "failures": r.failures(),
                "aggregates": aggregates,
            })
        })
        .collect();
    let total: usize = results.iter().map(|r| r.failures()).sum();
    serde_json::json!({ "cells": cells, "total_failures": total })
}

/// Mean runtime per scenario and method, in seconds.
pub fn timing(results: &[ExperimentResult]) -> serde_json::Value {
    let mut out = serde_json::Map::new();
    for r in results {
        let per_method: serde_json::Map<String, serde_json::Value> = r
            .aggregates
            .iter()
            .map(|a| (a.method.to_string(), serde_json::json!(a.runtime_seconds)))
            .collect();
        out.insert(r.spec.label(), per_method.into());
    }
    out.into()
}
