//! Warm-started cyclic coordinate descent for the lasso over a penalty grid,
//! and selection of the grid point by a generalized information criterion.
//!
//! Internally the objective is
//!
//! ```text
//!     (1/(2n)) * ||y - X b||^2 + lambda * ||b||_1
//! ```
//!
//! so that `lambda_max = max_j |x_j' y| / n` zeroes every coefficient.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::StandardizedDataset;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LassoOptions {
    /// Number of grid points.
    pub n_lambda: usize,
    /// Smallest penalty as a fraction of `lambda_max`. `None` picks 1e-4 when
    /// n > p and 1e-2 otherwise.
    pub lambda_ratio: Option<f64>,
    /// Convergence threshold on the largest coefficient change in a sweep.
    pub tol: f64,
    /// Maximum number of coordinate sweeps per grid point.
    pub max_iter: usize,
}

impl Default for LassoOptions {
    fn default() -> Self {
        Self {
            n_lambda: 100,
            lambda_ratio: None,
            tol: 1e-7,
            max_iter: 100_000,
        }
    }
}

impl LassoOptions {
    pub fn ratio_for(&self, n: usize, p: usize) -> f64 {
        self.lambda_ratio.unwrap_or(default_ratio(n, p))
    }
}

pub fn default_ratio(n: usize, p: usize) -> f64 {
    if n > p {
        1e-4
    } else {
        1e-2
    }
}

/// `sign(z) * max(|z| - gamma, 0)`
#[inline]
pub fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

pub fn lambda_max(x: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    let n = x.nrows() as f64;
    x.column_iter()
        .map(|c| c.dot(y).abs() / n)
        .fold(0.0, f64::max)
}

/// Geometric grid from `lambda_max` down to `lambda_max * ratio`.
pub fn grid_from_max(lambda_max: f64, k: usize, ratio: f64) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::InvalidInput(format!("grid needs at least 2 points, got {k}")));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidInput(format!("grid ratio must lie in (0, 1), got {ratio}")));
    }
    if !(lambda_max > 0.0 && lambda_max.is_finite()) {
        return Err(Error::DegenerateLambdaMax);
    }
    let last = (k - 1) as f64;
    Ok((0..k)
        .map(|i| lambda_max * ratio.powf(i as f64 / last))
        .collect())
}

pub fn lambda_grid(data: &StandardizedDataset, k: usize, ratio: f64) -> Result<Vec<f64>> {
    grid_from_max(lambda_max(data.x(), data.y()), k, ratio)
}

/// Coefficients along a decreasing penalty grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoPath {
    pub lambdas: Vec<f64>,
    pub betas: Vec<DVector<f64>>,
    pub active_sets: Vec<Vec<usize>>,
    /// Coordinate sweeps spent at each grid point.
    pub n_iters: Vec<usize>,
    /// `false` where the sweep budget ran out before convergence.
    pub converged: Vec<bool>,
}

impl LassoPath {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// Grid points at which the solver hit its iteration budget.
    pub fn unconverged_lambdas(&self) -> Vec<f64> {
        self.lambdas
            .iter()
            .zip(&self.converged)
            .filter(|(_, ok)| !**ok)
            .map(|(l, _)| *l)
            .collect()
    }
}

pub fn cd_solve(
    data: &StandardizedDataset,
    lambdas: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<LassoPath> {
    solve_path(data.x(), data.y(), lambdas, tol, max_iter)
}

/// Warm-started path over an arbitrary design. Columns need not be
/// standardized; each update divides by `||x_j||^2 / n`.
pub fn solve_path(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    lambdas: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<LassoPath> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "outcome has {} entries, design has {n} rows",
            y.len()
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    if lambdas.iter().any(|l| l.is_nan() || *l < 0.0) {
        return Err(Error::InvalidInput("penalties must be non-negative".into()));
    }
    let nf = n as f64;
    let col_sq: Vec<f64> = x.column_iter().map(|c| c.norm_squared() / nf).collect();

    let mut solver = CoordinateDescent {
        x,
        col_sq,
        beta: DVector::zeros(p),
        resid: y.clone(),
        y,
    };
    let mut path = LassoPath {
        lambdas: lambdas.to_vec(),
        betas: Vec::with_capacity(lambdas.len()),
        active_sets: Vec::with_capacity(lambdas.len()),
        n_iters: Vec::with_capacity(lambdas.len()),
        converged: Vec::with_capacity(lambdas.len()),
    };
    for &lambda in lambdas {
        let (iters, ok) = solver.solve(lambda, tol, max_iter);
        path.active_sets.push(support(&solver.beta));
        path.betas.push(solver.beta.clone());
        path.n_iters.push(iters);
        path.converged.push(ok);
    }
    Ok(path)
}

pub(crate) fn support(beta: &DVector<f64>) -> Vec<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(j, _)| j)
        .collect()
}

struct CoordinateDescent<'a> {
    x: &'a DMatrix<f64>,
    y: &'a DVector<f64>,
    col_sq: Vec<f64>,
    beta: DVector<f64>,
    resid: DVector<f64>,
}

impl CoordinateDescent<'_> {
    fn update(&mut self, j: usize, lambda: f64, nf: f64) -> f64 {
        let cs = self.col_sq[j];
        if cs == 0.0 {
            return 0.0;
        }
        let xj = self.x.column(j);
        let old = self.beta[j];
        let z = xj.dot(&self.resid) / nf + cs * old;
        let new = soft_threshold(z, lambda) / cs;
        if new != old {
            self.resid.axpy(old - new, &xj, 1.0);
            self.beta[j] = new;
        }
        (new - old).abs()
    }

    fn sweep(&mut self, coords: impl Iterator<Item = usize>, lambda: f64) -> f64 {
        let nf = self.x.nrows() as f64;
        let mut dmax = 0.0_f64;
        for j in coords {
            dmax = dmax.max(self.update(j, lambda, nf));
        }
        dmax
    }

    /// Full sweeps to settle the active set, then sweeps over the active set
    /// only; converged once a full sweep moves nothing by more than `tol` and
    /// the KKT conditions hold to `tol`.
    fn solve(&mut self, lambda: f64, tol: f64, max_iter: usize) -> (usize, bool) {
        let p = self.x.ncols();
        self.resid = self.y - self.x * &self.beta;
        let mut sweeps = 0;
        while sweeps < max_iter {
            let dmax = self.sweep(0..p, lambda);
            sweeps += 1;
            if dmax < tol {
                if kkt_from_residual(self.x, &self.beta, &self.resid, lambda) <= tol {
                    return (sweeps, true);
                }
                continue;
            }
            let active = support(&self.beta);
            while sweeps < max_iter {
                let d = self.sweep(active.iter().copied(), lambda);
                sweeps += 1;
                if d < tol {
                    break;
                }
            }
        }
        (sweeps, false)
    }
}

fn kkt_from_residual(x: &DMatrix<f64>, beta: &DVector<f64>, resid: &DVector<f64>, lambda: f64) -> f64 {
    let nf = x.nrows() as f64;
    x.column_iter()
        .zip(beta.iter())
        .map(|(c, &b)| {
            let g = c.dot(resid) / nf;
            if b != 0.0 {
                (g - lambda * b.signum()).abs()
            } else {
                (g.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Largest violation of the lasso stationarity conditions at `beta`.
pub fn kkt_violation(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, lambda: f64) -> f64 {
    let resid = y - x * beta;
    kkt_from_residual(x, beta, &resid, lambda)
}

/// `(1/(2n)) ||y - X b||^2 + lambda ||b||_1`
pub fn objective(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>, lambda: f64) -> f64 {
    let n = x.nrows() as f64;
    (y - x * beta).norm_squared() / (2.0 * n) + lambda * beta.lp_norm(1)
}

/// Outcome of information-criterion tuning along a path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GicSelection {
    pub lambda_gic: f64,
    pub gic_values: Vec<f64>,
    pub chosen_index: usize,
    /// Active set at `lambda_gic`.
    pub candidate_set: Vec<usize>,
}

/// `n log(RSS/n) + df log(log n) log(p)`
pub fn gic(n: usize, p: usize, rss: f64, df: usize) -> f64 {
    let nf = n as f64;
    let mse = (rss / nf).max(f64::MIN_POSITIVE);
    nf * mse.ln() + df as f64 * nf.ln().ln() * (p as f64).ln()
}

pub fn gic_select(path: &LassoPath, data: &StandardizedDataset) -> Result<GicSelection> {
    gic_select_with(path, data.x(), data.y(), data.p())
}

/// `p` is the dimension used in the penalty, which may exceed `x.ncols()`
/// when the path was fit on a column subset.
pub fn gic_select_with(
    path: &LassoPath,
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    p: usize,
) -> Result<GicSelection> {
    let n = x.nrows();
    if n < 3 {
        return Err(Error::DegenerateGic(n));
    }
    if path.is_empty() {
        return Err(Error::InvalidInput("empty lasso path".into()));
    }
    let gic_values: Vec<f64> = path
        .betas
        .iter()
        .zip(&path.active_sets)
        .map(|(b, a)| gic(n, p, (y - x * b).norm_squared(), a.len()))
        .collect();
    // strict `<` keeps the first (largest-penalty) minimizer
    let mut chosen_index = 0;
    for (k, v) in gic_values.iter().enumerate() {
        if *v < gic_values[chosen_index] {
            chosen_index = k;
        }
    }
    Ok(GicSelection {
        lambda_gic: path.lambdas[chosen_index],
        candidate_set: path.active_sets[chosen_index].clone(),
        chosen_index,
        gic_values,
    })
}
