//! Checks against independently computed references.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sgpv_select::data::read_csv;
use sgpv_select::lasso::{gic_select, lambda_grid, cd_solve, LassoOptions};
use sgpv_select::linalg::{standardize, LinearModel};
use sgpv_select::prosgpv::{fit_two_stage, ProSgpvConfig};
use sgpv_select::simbench::generate::{gen_design, make_beta, signal_magnitudes, stream_rng, TrueModel};
use sgpv_select::simbench::{draw_replication, eval_metrics, run_experiment, Method, MethodSettings, ScenarioSpec};
use sgpv_select::{Dataset, Error};

#[test]
fn design_covariance_converges() {
    let n = 20_000;
    let p = 6;
    let x = gen_design(n, p, 0.5, &mut stream_rng(17, 0));
    let mut worst: f64 = 0.0;
    for a in 0..p {
        for b in 0..p {
            let cov = x.column(a).dot(&x.column(b)) / n as f64;
            let want = 0.5f64.powi(a.abs_diff(b) as i32);
            worst = worst.max((cov - want).abs());
        }
    }
    assert!(worst < 0.05, "max deviation {worst}");
}

#[test]
fn equally_spaced_magnitudes() {
    let m = signal_magnitudes(4);
    assert!((m[1] - 7.0 / 3.0).abs() < 1e-15 && (m[2] - 11.0 / 3.0).abs() < 1e-15);
    assert_eq!((m[0], m[3]), (1.0, 5.0));
    let spec = ScenarioSpec { p: 2, beta: Some(vec![1.0, 0.0]), snr: 2.0, ..Default::default() };
    assert_eq!(make_beta(&spec, &mut stream_rng(0, 1)).unwrap().sigma2, 0.5);
}

/// Metric formulas recomputed with plain loops over index sets.
fn scripted(sel: &[usize], truth: &[usize], p: usize, bhat: &[f64], b0: &[f64]) -> [f64; 5] {
    let inter = sel.iter().filter(|j| truth.contains(j)).count() as f64;
    let fp = sel.iter().filter(|j| !truth.contains(j)).count() as f64;
    let fneg = truth.iter().filter(|j| !sel.contains(j)).count() as f64;
    let s = truth.len() as f64;
    let mut mae = 0.0;
    for j in 0..p {
        mae += (bhat[j] - b0[j]).abs();
    }
    [
        inter / s,
        fp / (p as f64 - s),
        fp / (sel.len().max(1) as f64),
        fneg / ((p - sel.len()).max(1) as f64),
        mae / p as f64,
    ]
}

#[test]
fn metrics_match_scripted_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..200 {
        let p = rng.random_range(5..40);
        let s = rng.random_range(1..p);
        let truth_idx = {
            let mut v: Vec<usize> = rand::seq::index::sample(&mut rng, p, s).into_vec();
            v.sort_unstable();
            v
        };
        let mut b0 = vec![0.0; p];
        for &j in &truth_idx {
            b0[j] = rng.random_range(-3.0..3.0);
        }
        let k = rng.random_range(0..=p);
        let mut sel: Vec<usize> = rand::seq::index::sample(&mut rng, p, k).into_vec();
        sel.sort_unstable();
        let slopes = DVector::from_fn(k, |_, _| rng.random_range(-3.0..3.0));
        let model = LinearModel::from_subset(p, &sel, 0.1, &slopes);
        let truth = TrueModel {
            beta0: DVector::from_column_slice(&b0),
            support: truth_idx.clone(),
            sigma2: 1.0,
        };
        let x = DMatrix::from_fn(10, p, |_, _| rng.random_range(-1.0..1.0));
        let y = DVector::from_fn(10, |_, _| rng.random_range(-1.0..1.0));
        let test = Dataset::with_default_names(x.clone(), y.clone()).unwrap();
        let m = eval_metrics(&model, &truth, &test, None);

        let want = scripted(&sel, &truth_idx, p, model.coefficients.as_slice(), &b0);
        let got = [m.power, m.type1, m.pfdr, m.pfnr, m.mae];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
        }
        let mut sq = 0.0;
        for i in 0..10 {
            let mut pred = 0.1;
            for j in 0..p {
                pred += x[(i, j)] * model.coefficients[j];
            }
            sq += (y[i] - pred).powi(2);
        }
        assert!((m.test_rmse - (sq / 10.0).sqrt()).abs() < 1e-12);
        assert_eq!(m.captured, sel == truth_idx);
        if m.captured {
            assert_eq!((m.power, m.type1), (1.0, 0.0));
        }
    }
}

/// Ten-fold cross-validation error of the lasso at each grid point.
fn cv_choice(data: &Dataset, grid: &[f64]) -> usize {
    let n = data.n();
    let mut err = vec![0.0; grid.len()];
    for fold in 0..10 {
        let test: Vec<usize> = (0..n).filter(|i| i % 10 == fold).collect();
        let train: Vec<usize> = (0..n).filter(|i| i % 10 != fold).collect();
        let tr = standardize(&data.select_rows(&train).unwrap()).unwrap();
        let te = data.select_rows(&test).unwrap();
        let path = cd_solve(&tr, grid, 1e-7, 100_000).unwrap();
        for (k, b) in path.betas.iter().enumerate() {
            let (b0, slopes) = tr.coefficients_to_original(b);
            let pred = te.x() * slopes;
            err[k] += te.y().iter().zip(pred.iter()).map(|(y, f)| (y - b0 - f).powi(2)).sum::<f64>();
        }
    }
    (0..grid.len()).min_by(|&a, &b| err[a].total_cmp(&err[b])).unwrap()
}

#[test]
fn gic_is_sparser_than_cross_validation_on_pure_noise() {
    let mut gic_sizes = 0;
    let mut cv_sizes = 0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(200, 10, |_, _| rng.random_range(-1.0..1.0));
        let y = DVector::from_fn(200, |_, _| rng.random_range(-1.0..1.0));
        let data = Dataset::with_default_names(x, y).unwrap();
        let std = standardize(&data).unwrap();
        let grid = lambda_grid(&std, 100, LassoOptions::default().ratio_for(200, 10)).unwrap();
        let path = cd_solve(&std, &grid, 1e-7, 100_000).unwrap();
        let g = gic_select(&path, &std).unwrap();
        gic_sizes += g.candidate_set.len();
        cv_sizes += path.active_sets[cv_choice(&data, &grid)].len();
    }
    assert!(gic_sizes <= cv_sizes, "gic {gic_sizes} vs cv {cv_sizes}");
}

#[test]
fn weak_signal_is_usually_a_candidate() {
    let spec = ScenarioSpec {
        n: 400,
        p: 5,
        rho: 0.5,
        beta: Some(vec![0.0, 0.0, 0.28, 0.0, 0.0]),
        sigma2: Some(1.0),
        master_seed: 3,
        ..Default::default()
    };
    let mut in_c = 0;
    let mut selected_v3 = 0;
    for rep in 0..50 {
        let d = draw_replication(&spec, rep).unwrap();
        let fit = fit_two_stage(&d.train, &ProSgpvConfig::default()).unwrap();
        in_c += fit.stage1_candidate_set().contains(&2) as usize;
        selected_v3 += (fit.selected == vec![2]) as usize;
    }
    assert!(in_c >= 45, "{in_c}");
    assert!(selected_v3 >= 40, "{selected_v3}");
}

#[test]
fn pure_noise_selects_nothing_most_of_the_time() {
    let spec = ScenarioSpec {
        n: 200,
        p: 10,
        s: 0,
        sigma2: Some(1.0),
        reps: 100,
        ..Default::default()
    };
    let res = run_experiment(&spec, &[Method::ProSgpv], &MethodSettings::default(), 4).unwrap();
    let empty = res
        .records
        .iter()
        .filter(|r| r.outcome.as_ref().unwrap().selected_size == 0)
        .count();
    let type1 = res.aggregate_for(Method::ProSgpv).unwrap().type1;
    assert!(empty >= 80, "{empty} empty of 100, type1 {type1}");
    assert!(type1 < 0.05);
}

#[test]
fn csv_fixture_recovers_signal() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut text = String::from("x1,x2,y\n");
    for _ in 0..500 {
        let x1: f64 = rng.random_range(-1.0..1.0);
        let x2: f64 = rng.random_range(-1.0..1.0);
        let y = 2.0 * x1 + 0.3 * rng.random_range(-1.0..1.0);
        text.push_str(&format!("{x1},{x2},{y}\n"));
    }
    let loaded = read_csv(text.as_bytes(), "y").unwrap();
    let fit = fit_two_stage(&loaded.data, &ProSgpvConfig::default()).unwrap();
    assert_eq!(fit.selected, vec![0]);
    let e = fit.sgpv_report.entries.iter().find(|e| e.index == 0).unwrap();
    assert_eq!(e.p_delta, 0.0);
    assert!(matches!(read_csv(text.as_bytes(), "z"), Err(Error::OutcomeMissing(_))));
}
