use std::fs::{self, File};
use std::io::BufWriter;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use serde_json::json;
use sgpv_select::simbench::report::{summary, timing, write_aggregates_csv, write_replications_csv};
use sgpv_select::simbench::{run_experiment, ExperimentResult, ScenarioSpec};

use crate::config::{pick_list, resolve_common, FileConfig, SimArgs};
use crate::fit::write_json;

const SIM_METHODS: &str = "prosgpv,lasso,alasso,oracle";

fn grid(args: &SimArgs, file: &FileConfig, seed: u64) -> Vec<ScenarioSpec> {
    let d = ScenarioSpec::default();
    let ns = pick_list(&args.n, &file.n, d.n);
    let ps = pick_list(&args.p, &file.p, d.p);
    let ss = pick_list(&args.s, &file.s, d.s);
    let rhos = pick_list(&args.rho, &file.rho, d.rho);
    let snrs = pick_list(&args.snr, &file.snr, d.snr);
    let beta = if args.beta.is_empty() { file.beta.clone() } else { Some(args.beta.clone()) };
    let base = ScenarioSpec {
        reps: args.reps.or(file.reps).unwrap_or(d.reps),
        master_seed: seed,
        test_fraction: args.test_fraction.or(file.test_fraction).unwrap_or(d.test_fraction),
        beta,
        sigma2: args.sigma2.or(file.sigma2),
        label: file.label.clone(),
        ..d
    };
    let mut out = Vec::new();
    for &rho in &rhos {
        for &snr in &snrs {
            for &n in &ns {
                for &p in &ps {
                    for &s in &ss {
                        out.push(ScenarioSpec { n, p, s, rho, snr, ..base.clone() });
                    }
                }
            }
        }
    }
    out
}

pub fn run(args: SimArgs, sweep: bool) -> Result<()> {
    let file = FileConfig::load(args.common.config.as_deref())?;
    let cfg = resolve_common(&args.common, &file, SIM_METHODS)?;
    let specs = grid(&args, &file, cfg.seed);
    if !sweep && specs.len() > 1 {
        bail!("simulate takes one value per scenario parameter; use `sweep` for lists");
    }
    if sweep && specs.len() > 1 && file.label.is_some() {
        bail!("a fixed label cannot name several sweep cells");
    }

    let mut results: Vec<ExperimentResult> = Vec::new();
    let mut failed_cells = Vec::new();
    for spec in &specs {
        eprintln!("running {} ({} reps)", spec.label(), spec.reps);
        match run_experiment(spec, &cfg.methods, &cfg.settings, cfg.workers) {
            Ok(r) => results.push(r),
            Err(e) => {
                eprintln!("warning: cell {} failed: {e}", spec.label());
                failed_cells.push(json!({ "scenario": spec.label(), "error": e.tag(), "message": e.to_string() }));
            }
        }
    }

    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let rep_path = cfg.out.join("replications.csv");
    write_replications_csv(BufWriter::new(File::create(&rep_path)?), &results)?;
    let agg_path = cfg.out.join("aggregates.csv");
    write_aggregates_csv(BufWriter::new(File::create(&agg_path)?), &results)?;

    let replication_failures: usize = results.iter().map(|r| r.failures()).sum();
    let generated = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let doc = json!({
        "metadata": {
            "generated_unix_seconds": generated,
            "version": env!("CARGO_PKG_VERSION"),
            "workers": cfg.workers,
            "mean_runtime_seconds": timing(&results),
        },
        "command": if sweep { "sweep" } else { "simulate" },
        "methods": cfg.methods,
        "settings": cfg.settings,
        "replication_failures": replication_failures,
        "failed_cells": failed_cells,
        "results": summary(&results),
    });
    write_json(&cfg.out.join("summary.json"), &doc)?;

    println!(
        "{:<32} {:<9} {:>5} {:>8} {:>7} {:>7} {:>9}",
        "scenario", "method", "reps", "capture", "power", "type1", "rel.MAE"
    );
    for r in &results {
        for a in &r.aggregates {
            println!(
                "{:<32} {:<9} {:>5} {:>8.3} {:>7.3} {:>7.3} {:>9}",
                r.spec.label(),
                a.method.name(),
                a.reps,
                a.capture_rate,
                a.power,
                a.type1,
                a.relative_mae.map_or("-".into(), |q| format!("{:.3}", q.median)),
            );
        }
    }
    eprintln!(
        "wrote {}, {}, summary.json ({} failed replications, {} failed cells)",
        rep_path.display(),
        agg_path.display(),
        replication_failures,
        failed_cells.len()
    );
    Ok(())
}
