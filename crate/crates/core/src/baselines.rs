//! Comparison methods: the lasso at its GIC penalty, the adaptive lasso with
//! lasso-derived weights, and least squares on the true support.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lasso::{self, LassoOptions, LassoPath};
use crate::linalg::{self, refit_subset, Dataset, LinearModel, OlsFit};

/// Lasso coefficients at the GIC-chosen penalty, back on the original scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoGicFit {
    pub selected: Vec<usize>,
    pub model: LinearModel,
    pub lambda: f64,
    pub coefficients_std: DVector<f64>,
}

pub fn lasso_gic_fit(data: &Dataset, options: &LassoOptions) -> Result<LassoGicFit> {
    let std = linalg::standardize(data)?;
    let grid = lasso::lambda_grid(&std, options.n_lambda, options.ratio_for(std.n(), std.p()))?;
    let path = lasso::cd_solve(&std, &grid, options.tol, options.max_iter)?;
    let gic = lasso::gic_select(&path, &std)?;
    let beta = path.betas[gic.chosen_index].clone();
    let (intercept, coefficients) = std.coefficients_to_original(&beta);
    Ok(LassoGicFit {
        selected: gic.candidate_set,
        model: LinearModel {
            selected: lasso::support(&beta),
            intercept,
            coefficients,
        },
        lambda: gic.lambda_gic,
        coefficients_std: beta,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialEstimator {
    /// Lasso at the GIC penalty.
    #[default]
    LassoGic,
    /// Full least squares; only valid when p < n.
    Ols,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptiveLassoConfig {
    /// Exponent on the initial estimates in the weights.
    pub gamma: f64,
    pub lasso: LassoOptions,
    pub initial: InitialEstimator,
    /// Replace the penalized coefficients by an OLS refit on the selected set.
    pub refit: bool,
}

impl Default for AdaptiveLassoConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            lasso: LassoOptions::default(),
            initial: InitialEstimator::LassoGic,
            refit: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveLassoFit {
    pub selected: Vec<usize>,
    pub model: LinearModel,
    /// `1 / |initial|^gamma`; infinite where the initial estimate is zero.
    pub weights: DVector<f64>,
    pub gamma: f64,
    /// GIC-chosen penalty, `None` for the empty model.
    pub lambda: Option<f64>,
    pub coefficients_std: DVector<f64>,
    /// Weighted path in the unscaled (standardized-data) coefficient space.
    pub path: Option<LassoPath>,
}

/// Columns with finite weight, each divided by its weight.
pub fn rescaled_design(x: &DMatrix<f64>, weights: &DVector<f64>) -> (DMatrix<f64>, Vec<usize>) {
    let included: Vec<usize> = (0..x.ncols()).filter(|&j| weights[j].is_finite()).collect();
    let mut xs = x.select_columns(&included);
    for (k, mut col) in xs.column_iter_mut().enumerate() {
        col /= weights[included[k]];
    }
    (xs, included)
}

/// Lasso with penalty `lambda * sum_j w_j |b_j|`, solved on the rescaled
/// design and mapped back. Infinite weights pin coefficients at zero.
pub fn weighted_lasso_path(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    weights: &DVector<f64>,
    lambdas: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<LassoPath> {
    if weights.len() != x.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} columns",
            weights.len(),
            x.ncols()
        )));
    }
    if weights.iter().any(|w| w.is_nan() || *w <= 0.0) {
        return Err(Error::InvalidInput("weights must be positive".into()));
    }
    let (xs, included) = rescaled_design(x, weights);
    let scaled = lasso::solve_path(&xs, y, lambdas, tol, max_iter)?;
    Ok(unscale_path(scaled, &included, weights, x.ncols()))
}

fn unscale_path(scaled: LassoPath, included: &[usize], weights: &DVector<f64>, p: usize) -> LassoPath {
    let betas: Vec<DVector<f64>> = scaled
        .betas
        .iter()
        .map(|b| {
            let mut full = DVector::zeros(p);
            for (k, &j) in included.iter().enumerate() {
                full[j] = b[k] / weights[j];
            }
            full
        })
        .collect();
    LassoPath {
        active_sets: betas.iter().map(lasso::support).collect(),
        betas,
        lambdas: scaled.lambdas,
        n_iters: scaled.n_iters,
        converged: scaled.converged,
    }
}

pub fn adaptive_lasso_fit(data: &Dataset, config: &AdaptiveLassoConfig) -> Result<AdaptiveLassoFit> {
    if config.gamma.is_nan() || config.gamma <= 0.0 {
        return Err(Error::InvalidInput("gamma must be positive".into()));
    }
    let std = linalg::standardize(data)?;
    let (n, p) = (std.n(), std.p());
    let opts = &config.lasso;

    let initial = match config.initial {
        InitialEstimator::LassoGic => {
            let grid = lasso::lambda_grid(&std, opts.n_lambda, opts.ratio_for(n, p))?;
            let path = lasso::cd_solve(&std, &grid, opts.tol, opts.max_iter)?;
            let gic = lasso::gic_select(&path, &std)?;
            path.betas[gic.chosen_index].clone()
        }
        InitialEstimator::Ols => linalg::ols(std.x(), std.y(), false)?.beta_hat,
    };
    let weights = initial.map(|b| {
        if b == 0.0 {
            f64::INFINITY
        } else {
            1.0 / b.abs().powf(config.gamma)
        }
    });

    let (xs, included) = rescaled_design(std.x(), &weights);
    if included.is_empty() {
        let model = LinearModel::intercept_only(p, data.y().mean());
        return Ok(AdaptiveLassoFit {
            selected: Vec::new(),
            model,
            weights,
            gamma: config.gamma,
            lambda: None,
            coefficients_std: DVector::zeros(p),
            path: None,
        });
    }

    let grid = lasso::grid_from_max(lasso::lambda_max(&xs, std.y()), opts.n_lambda, opts.ratio_for(n, p))?;
    let scaled = lasso::solve_path(&xs, std.y(), &grid, opts.tol, opts.max_iter)?;
    // RSS and active-set size are invariant to the column rescaling
    let gic = lasso::gic_select_with(&scaled, &xs, std.y(), p)?;
    let path = unscale_path(scaled, &included, &weights, p);
    let beta = path.betas[gic.chosen_index].clone();
    let selected = lasso::support(&beta);

    let model = if config.refit {
        refit_subset(data, &selected)?.0
    } else {
        let (intercept, coefficients) = std.coefficients_to_original(&beta);
        LinearModel {
            selected: selected.clone(),
            intercept,
            coefficients,
        }
    };
    Ok(AdaptiveLassoFit {
        selected,
        model,
        weights,
        gamma: config.gamma,
        lambda: Some(gic.lambda_gic),
        coefficients_std: beta,
        path: Some(path),
    })
}

/// Least squares with intercept on exactly `support`.
pub fn oracle_ols(data: &Dataset, support: &[usize]) -> Result<OlsFit> {
    if support.len() >= data.n() {
        return Err(Error::Underdetermined {
            rows: data.n(),
            columns: support.len() + 1,
        });
    }
    let xs = data.x().select_columns(support);
    linalg::ols(&xs, data.y(), true)
}

pub fn oracle_model(data: &Dataset, support: &[usize]) -> Result<LinearModel> {
    if support.len() >= data.n() {
        return Err(Error::Underdetermined {
            rows: data.n(),
            columns: support.len() + 1,
        });
    }
    Ok(refit_subset(data, support)?.0)
}
