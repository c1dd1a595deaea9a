//! Dense linear-algebra substrate: datasets, standardization and least
//! squares with classical coefficient standard errors.
//!
//! Matrices are `nalgebra` column-major `DMatrix<f64>`, so column access (the
//! hot path of coordinate descent) is contiguous.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Columns with a sample standard deviation below this are treated as constant.
pub const CONSTANT_SD: f64 = 1e-12;

/// Relative threshold on the diagonal of R below which a column is declared
/// linearly dependent.
const RANK_TOL: f64 = 1e-10;

/// Outcome vector plus design matrix with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
    column_names: Vec<String>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, column_names: Vec<String>) -> Result<Self> {
        let (n, p) = x.shape();
        if n == 0 || p == 0 {
            return Err(Error::InvalidInput(format!("empty design ({n}x{p})")));
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "outcome has {} entries, design has {n} rows",
                y.len()
            )));
        }
        if column_names.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "{} column names for {p} columns",
                column_names.len()
            )));
        }
        let unique: HashSet<&str> = column_names.iter().map(String::as_str).collect();
        if unique.len() != p {
            return Err(Error::InvalidInput("column names must be unique".into()));
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite value in data".into()));
        }
        Ok(Self { x, y, column_names })
    }

    /// Columns are named `V1..Vp`.
    pub fn with_default_names(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        let names = default_names(x.ncols());
        Self::new(x, y, names)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let x = self.x.select_rows(rows);
        let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| self.y[i]));
        Self::new(x, y, self.column_names.clone())
    }

    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        let x = self.x.select_columns(cols);
        let names = cols.iter().map(|&j| self.column_names[j].clone()).collect();
        Self::new(x, self.y.clone(), names)
    }
}

pub fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|j| format!("V{j}")).collect()
}

/// A dataset whose columns and outcome are centered and scaled to unit
/// sample standard deviation, with the transform recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedDataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
    x_centers: DVector<f64>,
    x_scales: DVector<f64>,
    y_center: f64,
    y_scale: f64,
    column_names: Vec<String>,
}

impl StandardizedDataset {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn x_centers(&self) -> &DVector<f64> {
        &self.x_centers
    }

    pub fn x_scales(&self) -> &DVector<f64> {
        &self.x_scales
    }

    pub fn y_center(&self) -> f64 {
        self.y_center
    }

    pub fn y_scale(&self) -> f64 {
        self.y_scale
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    /// Undo the transform on the design.
    pub fn raw_x(&self) -> DMatrix<f64> {
        let mut x = self.x.clone();
        for (j, mut col) in x.column_iter_mut().enumerate() {
            col.apply(|v| *v = *v * self.x_scales[j] + self.x_centers[j]);
        }
        x
    }

    pub fn raw_y(&self) -> DVector<f64> {
        self.y.map(|v| v * self.y_scale + self.y_center)
    }

    /// Map standardized-scale slopes to an original-scale `(intercept, slopes)` pair.
    pub fn coefficients_to_original(&self, beta_std: &DVector<f64>) -> (f64, DVector<f64>) {
        let slopes = DVector::from_iterator(
            beta_std.len(),
            beta_std
                .iter()
                .enumerate()
                .map(|(j, b)| b * self.y_scale / self.x_scales[j]),
        );
        let intercept = self.y_center - slopes.dot(&self.x_centers);
        (intercept, slopes)
    }
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let ss: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Center and scale every column and the outcome (sd uses the n-1 denominator).
pub fn standardize(data: &Dataset) -> Result<StandardizedDataset> {
    let n = data.n();
    if n < 2 {
        return Err(Error::TooFewRows(n));
    }
    let p = data.p();
    let mut x = data.x.clone();
    let mut x_centers = DVector::zeros(p);
    let mut x_scales = DVector::zeros(p);
    for (j, mut col) in x.column_iter_mut().enumerate() {
        let (mean, sd) = mean_sd(col.as_slice());
        if sd < CONSTANT_SD {
            return Err(Error::ConstantColumn(data.column_names[j].clone()));
        }
        col.apply(|v| *v = (*v - mean) / sd);
        x_centers[j] = mean;
        x_scales[j] = sd;
    }
    let (y_center, y_scale) = mean_sd(data.y.as_slice());
    if y_scale < CONSTANT_SD {
        return Err(Error::ConstantColumn("outcome".into()));
    }
    let y = data.y.map(|v| (v - y_center) / y_scale);
    Ok(StandardizedDataset {
        x,
        y,
        x_centers,
        x_scales,
        y_center,
        y_scale,
        column_names: data.column_names.clone(),
    })
}

/// Ordinary least squares fit with classical standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    /// Slopes, one per fitted column (intercept excluded).
    pub beta_hat: DVector<f64>,
    pub se: DVector<f64>,
    pub sigma2_hat: f64,
    pub rss: f64,
    pub df_resid: usize,
    pub intercept: Option<f64>,
    pub intercept_se: Option<f64>,
}

impl OlsFit {
    pub fn fitted(&self, x: &DMatrix<f64>) -> DVector<f64> {
        let mut f = x * &self.beta_hat;
        if let Some(b0) = self.intercept {
            f.add_scalar_mut(b0);
        }
        f
    }
}

pub fn ols_fit(data: &Dataset, with_intercept: bool) -> Result<OlsFit> {
    ols(&data.x, &data.y, with_intercept)
}

/// Least squares via Householder QR. `x` may have zero columns when an
/// intercept is requested (intercept-only model).
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>, with_intercept: bool) -> Result<OlsFit> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "outcome has {} entries, design has {n} rows",
            y.len()
        )));
    }
    let offset = usize::from(with_intercept);
    let cols = p + offset;
    if cols == 0 {
        return Err(Error::InvalidInput("no columns to fit".into()));
    }
    if cols > n {
        return Err(Error::Underdetermined { rows: n, columns: cols });
    }

    let design = if with_intercept {
        let mut d = DMatrix::from_element(n, cols, 1.0);
        d.view_mut((0, 1), (n, p)).copy_from(x);
        d
    } else {
        x.clone()
    };

    let qr = design.clone().qr();
    let r = qr.r();
    let scale = r.diagonal().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let rank = r
        .diagonal()
        .iter()
        .filter(|v| v.abs() > RANK_TOL * scale.max(f64::MIN_POSITIVE))
        .count();
    if rank < cols {
        return Err(Error::RankDeficient { rank, columns: cols });
    }

    let qty = qr.q().transpose() * y;
    let coef = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient { rank, columns: cols })?;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(cols, cols))
        .ok_or(Error::RankDeficient { rank, columns: cols })?;

    let resid = y - &design * &coef;
    let rss = resid.norm_squared();
    let df_resid = n - cols;
    let sigma2_hat = if df_resid > 0 {
        rss / df_resid as f64
    } else {
        f64::NAN
    };
    // diag((X'X)^-1) = squared row norms of R^-1
    let se_all: Vec<f64> = (0..cols)
        .map(|k| (sigma2_hat * r_inv.row(k).norm_squared()).sqrt())
        .collect();

    Ok(OlsFit {
        beta_hat: coef.rows(offset, p).into_owned(),
        se: DVector::from_iterator(p, se_all[offset..].iter().copied()),
        sigma2_hat,
        rss,
        df_resid,
        intercept: with_intercept.then(|| coef[0]),
        intercept_se: with_intercept.then(|| se_all[0]),
    })
}

/// A sparse linear predictor on the original scale: the common currency
/// between selection methods and the evaluation metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    /// Sorted indices of nonzero slopes.
    pub selected: Vec<usize>,
    pub intercept: f64,
    /// Full-length slope vector; unselected entries are exactly zero.
    pub coefficients: DVector<f64>,
}

impl LinearModel {
    pub fn intercept_only(p: usize, intercept: f64) -> Self {
        Self {
            selected: Vec::new(),
            intercept,
            coefficients: DVector::zeros(p),
        }
    }

    /// Scatter a fit over the columns `support` into a length-`p` model.
    pub fn from_subset(p: usize, support: &[usize], intercept: f64, slopes: &DVector<f64>) -> Self {
        let mut coefficients = DVector::zeros(p);
        for (k, &j) in support.iter().enumerate() {
            coefficients[j] = slopes[k];
        }
        let mut selected = support.to_vec();
        selected.sort_unstable();
        Self {
            selected,
            intercept,
            coefficients,
        }
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> DVector<f64> {
        let mut f = x * &self.coefficients;
        f.add_scalar_mut(self.intercept);
        f
    }
}

/// OLS with intercept on a column subset, scattered back to full length.
pub fn refit_subset(data: &Dataset, support: &[usize]) -> Result<(LinearModel, OlsFit)> {
    let xs = data.x().select_columns(support);
    let fit = ols(&xs, data.y(), true)?;
    let model = LinearModel::from_subset(
        data.p(),
        support,
        fit.intercept.unwrap_or(0.0),
        &fit.beta_hat,
    );
    Ok((model, fit))
}
