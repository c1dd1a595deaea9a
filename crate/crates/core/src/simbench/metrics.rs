//! Support-recovery, estimation and prediction metrics for one fitted model.

use serde::{Deserialize, Serialize};

use crate::linalg::{Dataset, LinearModel};
use crate::simbench::generate::TrueModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    /// Selected set equals the true support exactly.
    pub captured: bool,
    pub power: f64,
    pub type1: f64,
    pub pfdr: f64,
    pub pfnr: f64,
    pub mae: f64,
    /// `None` when no oracle was supplied or its MAE is zero.
    pub relative_mae: Option<f64>,
    pub test_rmse: f64,
    pub relative_rmse: Option<f64>,
    pub selected_size: usize,
    pub runtime_seconds: f64,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

pub fn coefficient_mae(model: &LinearModel, truth: &TrueModel) -> f64 {
    let p = truth.beta0.len();
    (&model.coefficients - &truth.beta0).abs().sum() / p as f64
}

pub fn prediction_rmse(model: &LinearModel, test: &Dataset) -> f64 {
    let r = model.predict(test.x()) - test.y();
    (r.norm_squared() / test.n() as f64).sqrt()
}

/// Metrics of `model` against the generating `truth`; relative metrics are
/// taken against `oracle` when given.
///
/// With an empty true support, power is 1 (nothing to miss); with a full
/// support, type I error is 0.
pub fn eval_metrics(
    model: &LinearModel,
    truth: &TrueModel,
    test: &Dataset,
    oracle: Option<&LinearModel>,
) -> MetricsRecord {
    let p = truth.beta0.len();
    let s = truth.support.len();
    let selected = &model.selected;
    let hits = selected.iter().filter(|j| truth.support.binary_search(j).is_ok()).count();
    let false_pos = selected.len() - hits;
    let misses = s - hits;

    let mae = coefficient_mae(model, truth);
    let test_rmse = prediction_rmse(model, test);
    let relative = |value: f64, base: f64| (base > 0.0).then(|| value / base);
    let (relative_mae, relative_rmse) = match oracle {
        Some(o) => (
            relative(mae, coefficient_mae(o, truth)),
            relative(test_rmse, prediction_rmse(o, test)),
        ),
        None => (None, None),
    };

    MetricsRecord {
        captured: *selected == truth.support,
        power: if s == 0 { 1.0 } else { hits as f64 / s as f64 },
        type1: ratio(false_pos as f64, (p - s) as f64),
        pfdr: false_pos as f64 / selected.len().max(1) as f64,
        pfnr: misses as f64 / (p - selected.len()).max(1) as f64,
        mae,
        relative_mae,
        test_rmse,
        relative_rmse,
        selected_size: selected.len(),
        runtime_seconds: 0.0,
    }
}
