//! Two-stage selection: a lasso candidate set tuned by GIC, followed by an
//! SGPV screen of the relaxed (OLS) candidate fit, and a final least-squares
//! refit of the survivors on the original scale.
//!
//! Everything up to the refit runs on standardized data. The one-stage
//! variant skips the lasso and screens the full OLS fit.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lasso::{self, GicSelection, LassoOptions, LassoPath};
use crate::linalg::{self, refit_subset, Dataset, LinearModel, OlsFit, StandardizedDataset};
use crate::sgpv::{self, IntervalKind, NullBound, SgpvReport};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ProSgpvConfig {
    pub null_bound: NullBound,
    pub interval: IntervalKind,
    pub lasso: LassoOptions,
    /// Candidates kept when the lasso returns at least `n` of them. Defaults
    /// to `n / 2`.
    pub candidate_cap: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodTag {
    TwoStage,
    OneStage,
}

/// What the first stage handed to the screen.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StageOne {
    /// Sorted candidate column indices.
    pub candidates: Vec<usize>,
    /// Penalty at which the candidates were read off; `None` when no lasso ran.
    pub lambda: Option<f64>,
    /// Standardized lasso coefficients at `lambda`.
    pub lasso_coefficients: Option<DVector<f64>>,
    pub path: Option<LassoPath>,
    pub gic: Option<GicSelection>,
    /// Size of the candidate set before it was capped, if it was.
    pub truncated_from: Option<usize>,
}

/// Supplies the candidate set for the SGPV screen.
pub trait CandidateScreener {
    fn candidates(&self, data: &StandardizedDataset) -> Result<StageOne>;
}

/// Active set of the lasso at the GIC-optimal penalty.
#[derive(Debug, Clone, Copy, Default)]
pub struct LassoGic {
    pub options: LassoOptions,
}

impl CandidateScreener for LassoGic {
    fn candidates(&self, data: &StandardizedDataset) -> Result<StageOne> {
        let (n, p) = (data.n(), data.p());
        if n < 3 {
            return Err(Error::DegenerateGic(n));
        }
        let grid = lasso::lambda_grid(data, self.options.n_lambda, self.options.ratio_for(n, p))?;
        let path = lasso::cd_solve(data, &grid, self.options.tol, self.options.max_iter)?;
        let gic = lasso::gic_select(&path, data)?;
        Ok(StageOne {
            candidates: gic.candidate_set.clone(),
            lambda: Some(gic.lambda_gic),
            lasso_coefficients: Some(path.betas[gic.chosen_index].clone()),
            path: Some(path),
            gic: Some(gic),
            truncated_from: None,
        })
    }
}

/// Every column is a candidate (the penalty is zero).
#[derive(Debug, Clone, Copy, Default)]
pub struct AllColumns;

impl CandidateScreener for AllColumns {
    fn candidates(&self, data: &StandardizedDataset) -> Result<StageOne> {
        Ok(StageOne {
            candidates: (0..data.p()).collect(),
            ..StageOne::default()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: MethodTag,
    /// Sorted selected column indices.
    pub selected: Vec<usize>,
    /// Original-scale intercept and slopes (zero off the selected set).
    pub model: LinearModel,
    /// Intercept-plus-selected OLS refit on the original scale.
    pub refit: OlsFit,
    pub stage_one: StageOne,
    /// Standardized OLS fit on the candidate set.
    pub candidate_fit: Option<OlsFit>,
    pub null_bound: Option<f64>,
    pub sgpv_report: SgpvReport,
}

impl SelectionResult {
    pub fn stage1_candidate_set(&self) -> &[usize] {
        &self.stage_one.candidates
    }

    pub fn stage1_lambda(&self) -> Option<f64> {
        self.stage_one.lambda
    }

    pub fn coefficients_original(&self) -> (f64, &DVector<f64>) {
        (self.model.intercept, &self.model.coefficients)
    }
}

pub fn fit_two_stage(data: &Dataset, config: &ProSgpvConfig) -> Result<SelectionResult> {
    let screener = LassoGic {
        options: config.lasso,
    };
    fit_with_screener(data, config, &screener, MethodTag::TwoStage)
}

pub fn fit_one_stage(data: &Dataset, config: &ProSgpvConfig) -> Result<SelectionResult> {
    if data.p() >= data.n() {
        return Err(Error::Underdetermined {
            rows: data.n(),
            columns: data.p(),
        });
    }
    fit_with_screener(data, config, &AllColumns, MethodTag::OneStage)
}

pub fn fit_with_screener(
    data: &Dataset,
    config: &ProSgpvConfig,
    screener: &dyn CandidateScreener,
    method: MethodTag,
) -> Result<SelectionResult> {
    let std = linalg::standardize(data)?;
    let (n, p) = (std.n(), std.p());
    let mut stage_one = screener.candidates(&std)?;

    if stage_one.candidates.len() >= n {
        let cap = config.candidate_cap.unwrap_or(n / 2).min(n - 1);
        let before = stage_one.candidates.len();
        stage_one.candidates = strongest(&stage_one.candidates, stage_one.lasso_coefficients.as_ref(), cap);
        stage_one.truncated_from = Some(before);
    }

    let (candidate_fit, null_bound, sgpv_report) = if stage_one.candidates.is_empty() {
        (None, None, SgpvReport::default())
    } else {
        let xc = std.x().select_columns(&stage_one.candidates);
        let fit = linalg::ols(&xc, std.y(), false)?;
        let bound = sgpv::null_bound(&fit, config.null_bound, n, p)?;
        let mult = config.interval.multiplier(fit.df_resid);
        let report = sgpv::screen(&fit, &stage_one.candidates, bound, mult)?;
        (Some(fit), Some(bound), report)
    };

    let selected = sgpv_report.kept();
    let (model, refit) = refit_subset(data, &selected)?;
    Ok(SelectionResult {
        method,
        selected,
        model,
        refit,
        stage_one,
        candidate_fit,
        null_bound,
        sgpv_report,
    })
}

/// The `cap` candidates with the largest |coefficient|, returned sorted by index.
fn strongest(candidates: &[usize], coef: Option<&DVector<f64>>, cap: usize) -> Vec<usize> {
    let mut ranked = candidates.to_vec();
    if let Some(b) = coef {
        // stable sort keeps index order among ties
        ranked.sort_by(|&i, &j| b[j].abs().total_cmp(&b[i].abs()));
    }
    ranked.truncate(cap);
    ranked.sort_unstable();
    ranked
}
