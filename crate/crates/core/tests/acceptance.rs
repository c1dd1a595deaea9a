//! Acceptance suite. Each test prints one `[PASS]`/`[FAIL]` line and then
//! asserts. Run with `cargo test -p sgpv-select --test acceptance -- --nocapture`.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{Binomial, DiscreteCDF};

use sgpv_select::baselines::weighted_lasso_path;
use sgpv_select::lasso::{cd_solve, grid_from_max, lambda_grid, lambda_max, solve_path, LassoOptions};
use sgpv_select::linalg::{standardize, Dataset, OlsFit};
use sgpv_select::prosgpv::{fit_two_stage, ProSgpvConfig};
use sgpv_select::sgpv::{screen, sgpv_value, Interval, Z_95};
use sgpv_select::simbench::generate::{gen_design, gen_response, make_beta, stream_rng};
use sgpv_select::simbench::report::write_replications_csv;
use sgpv_select::simbench::runner::wald_interval;
use sgpv_select::simbench::{draw_replication, run_experiment, ExperimentResult, Method, MethodSettings, ScenarioSpec};

fn verdict(name: &str, pass: bool, detail: String) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(4, |n| n.get())
}

/// `P(X >= k)` for `X ~ Bin(n, 1/2)`: exact one-sided sign test on the
/// discordant pairs of a paired comparison.
fn sign_test_p(k: u64, n: u64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if k == 0 {
        return 1.0;
    }
    let b = Binomial::new(0.5, n).unwrap();
    1.0 - b.cdf(k - 1)
}

fn hadamard(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 })
}

fn soft(z: f64, g: f64) -> f64 {
    z.signum() * (z.abs() - g).max(0.0)
}

#[test]
fn lasso_kkt_certificate() {
    let start = Instant::now();
    let rhos = [0.0, 0.35, 0.7];
    let mut worst: f64 = 0.0;
    let mut unconverged = 0;
    for inst in 0..100u64 {
        let spec = ScenarioSpec {
            n: 100,
            p: 20,
            s: 5,
            rho: rhos[inst as usize % 3],
            snr: 2.0,
            ..Default::default()
        };
        let x = gen_design(100, 20, spec.rho, &mut stream_rng(inst, 0));
        let truth = make_beta(&spec, &mut stream_rng(inst, 1)).unwrap();
        let y = gen_response(&x, &truth, &mut stream_rng(inst, 2));
        let data = standardize(&Dataset::with_default_names(x, y).unwrap()).unwrap();
        let opts = LassoOptions::default();
        let grid = lambda_grid(&data, opts.n_lambda, opts.ratio_for(100, 20)).unwrap();
        let path = cd_solve(&data, &grid, opts.tol, opts.max_iter).unwrap();
        unconverged += path.unconverged_lambdas().len();
        let n = data.n() as f64;
        for (beta, &lam) in path.betas.iter().zip(&path.lambdas) {
            let r = data.y() - data.x() * beta;
            for j in 0..20 {
                let g = data.x().column(j).dot(&r) / n;
                let v = if beta[j] != 0.0 {
                    (g - lam * beta[j].signum()).abs()
                } else {
                    (g.abs() - lam).max(0.0)
                };
                worst = worst.max(v);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        "lasso KKT certificate (100 instances, n=100, p=20)",
        worst <= 1e-6 && secs < 10.0 && unconverged == 0,
        format!("max violation {worst:.2e}, unconverged points {unconverged}, {secs:.2}s"),
    );
}

#[test]
fn orthonormal_closed_forms() {
    let n = 64;
    let x = hadamard(n).columns(1, 12).into_owned();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let y = DVector::from_fn(n, |i, _| {
        1.5 * x[(i, 0)] - 0.7 * x[(i, 5)] + rng.random_range(-1.0..1.0)
    });
    let z: Vec<f64> = x.column_iter().map(|c| c.dot(&y) / n as f64).collect();
    let grid = grid_from_max(lambda_max(&x, &y), 50, 1e-3).unwrap();

    let path = solve_path(&x, &y, &grid, 1e-12, 100_000).unwrap();
    let mut lasso_err: f64 = 0.0;
    for (b, &l) in path.betas.iter().zip(&grid) {
        for j in 0..12 {
            lasso_err = lasso_err.max((b[j] - soft(z[j], l)).abs());
        }
    }

    let w = DVector::from_fn(12, |j, _| 1.0 / (z[j].abs() + 0.05));
    let wpath = weighted_lasso_path(&x, &y, &w, &grid, 1e-12, 100_000).unwrap();
    let mut alasso_err: f64 = 0.0;
    for (b, &l) in wpath.betas.iter().zip(&grid) {
        for j in 0..12 {
            alasso_err = alasso_err.max((b[j] - soft(z[j], l * w[j])).abs());
        }
    }
    verdict(
        "orthonormal closed forms (lasso and adaptive lasso)",
        lasso_err < 1e-8 && alasso_err < 1e-8,
        format!("max |error| lasso {lasso_err:.2e}, adaptive {alasso_err:.2e}"),
    );
}

#[test]
fn sgpv_arithmetic_cases() {
    let iv = |a, b| Interval::new(a, b).unwrap();
    let cases = [
        ("disjoint", iv(0.2, 0.6), iv(-0.1, 0.1), 0.0),
        ("contained", iv(-0.05, 0.05), iv(-0.1, 0.1), 1.0),
        ("wide interval correction", iv(-5.0, 5.0), iv(-1.0, 1.0), 0.5),
        ("half overlap", iv(-1.0, 3.0), iv(-1.0, 1.0), 0.5),
    ];
    let mut bad = Vec::new();
    for (name, i, h, want) in cases {
        let got = sgpv_value(&i, &h).unwrap();
        if got != want {
            bad.push(format!("{name}: got {got}, want {want}"));
        }
    }
    verdict("SGPV arithmetic cases (exact)", bad.is_empty(), format!("4 cases, mismatches {bad:?}"));
}

#[test]
fn sgpv_threshold_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let k = 10_000;
    let beta: Vec<f64> = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
    let se: Vec<f64> = (0..k).map(|_| rng.random_range(0.001..0.5)).collect();
    let bounds: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..0.5)).collect();
    let mut discrepancies = 0;
    let mut kept = 0;
    for i in 0..k {
        let fit = OlsFit {
            beta_hat: DVector::from_element(1, beta[i]),
            se: DVector::from_element(1, se[i]),
            sigma2_hat: 1.0,
            rss: 1.0,
            df_resid: 10,
            intercept: None,
            intercept_se: None,
        };
        let r = screen(&fit, &[0], bounds[i], Z_95).unwrap();
        let rule = beta[i].abs() > 1.96 * se[i] + bounds[i];
        kept += rule as usize;
        if r.entries[0].keep != rule {
            discrepancies += 1;
        }
    }
    verdict(
        "SGPV keep/drop equals threshold rule (10^4 configurations)",
        discrepancies == 0,
        format!("{discrepancies} discrepancies, {kept} kept by the rule"),
    );
}

#[test]
fn two_stage_beats_candidate_set_on_weak_signal() {
    let start = Instant::now();
    let spec = ScenarioSpec {
        n: 400,
        p: 5,
        rho: 0.5,
        beta: Some(vec![0.0, 0.0, 0.28, 0.0, 0.0]),
        sigma2: Some(1.0),
        reps: 1000,
        master_seed: 2024,
        ..Default::default()
    };
    let target = vec![2usize];
    let outcomes: Vec<(bool, bool)> = (0..spec.reps)
        .into_par_iter()
        .map(|rep| {
            let d = draw_replication(&spec, rep).unwrap();
            let fit = fit_two_stage(&d.train, &ProSgpvConfig::default()).unwrap();
            (fit.selected == target, fit.stage1_candidate_set() == target.as_slice())
        })
        .collect();
    let pro = outcomes.iter().filter(|o| o.0).count();
    let cand = outcomes.iter().filter(|o| o.1).count();
    let only_pro = outcomes.iter().filter(|o| o.0 && !o.1).count() as u64;
    let only_cand = outcomes.iter().filter(|o| !o.0 && o.1).count() as u64;
    let p = sign_test_p(only_pro, only_pro + only_cand);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        "weak single signal: two-stage capture of {V3} exceeds lasso candidate set",
        pro > cand && p < 0.05 && secs < 120.0,
        format!(
            "two-stage {:.3}, candidate set {:.3}, paired one-sided p = {p:.2e}, {secs:.1}s",
            pro as f64 / 1000.0,
            cand as f64 / 1000.0
        ),
    );
}

struct Grid {
    cells: Vec<ExperimentResult>,
    elapsed: Duration,
}

fn growth_grid() -> &'static Grid {
    static GRID: OnceLock<Grid> = OnceLock::new();
    GRID.get_or_init(|| {
        let start = Instant::now();
        let cells = [100, 300, 500]
            .into_iter()
            .map(|n| {
                let spec = ScenarioSpec {
                    n,
                    p: 50,
                    s: 10,
                    rho: 0.0,
                    snr: 2.0,
                    reps: 200,
                    master_seed: 7,
                    ..Default::default()
                };
                run_experiment(
                    &spec,
                    &[Method::ProSgpv, Method::Alasso, Method::Oracle],
                    &MethodSettings::default(),
                    workers(),
                )
                .unwrap()
            })
            .collect();
        Grid {
            cells,
            elapsed: start.elapsed(),
        }
    })
}

/// Paired capture indicators of two methods in one experiment.
fn paired_captures(res: &ExperimentResult, a: Method, b: Method) -> Vec<(bool, bool)> {
    let pick = |m: Method| -> Vec<Option<bool>> {
        res.records
            .iter()
            .filter(|r| r.method == m)
            .map(|r| r.outcome.as_ref().ok().map(|x| x.captured))
            .collect()
    };
    pick(a)
        .into_iter()
        .zip(pick(b))
        .filter_map(|(x, y)| Some((x?, y?)))
        .collect()
}

#[test]
fn capture_rate_grows_with_n_and_matches_adaptive_lasso() {
    let grid = growth_grid();
    let rates: Vec<(f64, usize)> = grid
        .cells
        .iter()
        .map(|c| {
            let a = c.aggregate_for(Method::ProSgpv).unwrap();
            (a.capture_rate, a.reps)
        })
        .collect();
    let monotone = rates.windows(2).all(|w| {
        let (lo_prev, _) = wald_interval(w[0].0, w[0].1);
        let (_, hi_next) = wald_interval(w[1].0, w[1].1);
        hi_next >= lo_prev
    });
    let last = grid.cells.last().unwrap();
    let pairs = paired_captures(last, Method::ProSgpv, Method::Alasso);
    let only_al = pairs.iter().filter(|p| p.1 && !p.0).count() as u64;
    let only_pro = pairs.iter().filter(|p| p.0 && !p.1).count() as u64;
    let p_lower = sign_test_p(only_al, only_al + only_pro);
    let al = last.aggregate_for(Method::Alasso).unwrap().capture_rate;
    let secs = grid.elapsed.as_secs_f64();
    verdict(
        "capture rate nondecreasing in n and not below adaptive lasso at n=500",
        monotone && p_lower >= 0.05 && secs < 600.0,
        format!(
            "two-stage capture at n=100/300/500: {:.3}/{:.3}/{:.3}; adaptive lasso at 500: {al:.3}; \
             one-sided p(two-stage lower) = {p_lower:.3}; grid {secs:.1}s",
            rates[0].0, rates[1].0, rates[2].0
        ),
    );
}

#[test]
fn relative_mae_shrinks_with_n() {
    let grid = growth_grid();
    let medians: Vec<f64> = grid
        .cells
        .iter()
        .map(|c| c.aggregate_for(Method::ProSgpv).unwrap().relative_mae.unwrap().median)
        .collect();
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    let last = *medians.last().unwrap();
    verdict(
        "median relative MAE decreases with n, within [1, 2.5] at n=500",
        decreasing && (1.0..=2.5).contains(&last),
        format!("medians at n=100/300/500: {:.4}/{:.4}/{:.4}", medians[0], medians[1], medians[2]),
    );
}

#[test]
fn generator_pve_matches_snr() {
    let mut details = Vec::new();
    let mut pass = true;
    for (k, nu) in [0.7, 2.0].into_iter().enumerate() {
        let spec = ScenarioSpec {
            n: 10_000,
            p: 20,
            s: 6,
            rho: 0.35,
            snr: nu,
            ..Default::default()
        };
        let x = gen_design(10_000, 20, 0.35, &mut stream_rng(k as u64, 0));
        let truth = make_beta(&spec, &mut stream_rng(k as u64, 1)).unwrap();
        let y = gen_response(&x, &truth, &mut stream_rng(k as u64, 2));
        let eps = &y - &x * &truth.beta0;
        let var = |v: &DVector<f64>| {
            let m = v.mean();
            v.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
        };
        let pve = 1.0 - var(&eps) / var(&y);
        let want = nu / (1.0 + nu);
        pass &= (pve - want).abs() <= 0.05;
        details.push(format!("snr {nu}: PVE {pve:.4} vs {want:.4}"));
    }
    verdict("empirical PVE within 0.05 of snr/(1+snr) at n=10^4", pass, details.join("; "));
}

#[test]
fn one_stage_agrees_with_two_stage() {
    let spec = ScenarioSpec {
        n: 500,
        p: 20,
        s: 4,
        rho: 0.0,
        snr: 2.0,
        reps: 200,
        master_seed: 11,
        ..Default::default()
    };
    let res = run_experiment(&spec, &[Method::ProSgpv, Method::ProSgpv1], &MethodSettings::default(), workers())
        .unwrap();
    let two = res.aggregate_for(Method::ProSgpv).unwrap().capture_rate;
    let one = res.aggregate_for(Method::ProSgpv1).unwrap().capture_rate;
    verdict(
        "one-stage and two-stage capture rates within 10 points",
        (two - one).abs() <= 0.10,
        format!("two-stage {two:.3}, one-stage {one:.3}"),
    );
}

#[test]
fn output_independent_of_worker_count() {
    let spec = ScenarioSpec {
        n: 120,
        p: 30,
        s: 5,
        rho: 0.35,
        snr: 0.7,
        reps: 24,
        master_seed: 5,
        ..Default::default()
    };
    let csv_for = |workers: usize| {
        let res = run_experiment(&spec, &Method::ALL, &MethodSettings::default(), workers).unwrap();
        let mut buf = Vec::new();
        write_replications_csv(&mut buf, std::slice::from_ref(&res)).unwrap();
        sgpv_select::simbench::report::write_aggregates_csv(&mut buf, &[res]).unwrap();
        buf
    };
    let a = csv_for(1);
    let b = csv_for(8);
    verdict(
        "CSV output byte-identical for 1 and 8 workers",
        a == b,
        format!("{} bytes vs {} bytes", a.len(), b.len()),
    );
}
