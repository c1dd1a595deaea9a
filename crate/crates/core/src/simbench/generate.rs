//! Synthetic regression problems with AR(1)-correlated Gaussian features and
//! a noise level calibrated to a target signal-to-noise ratio.

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Dataset;

/// How the held-out test rows are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestSplit {
    /// Draw extra rows on top of the `n` training rows so that the test rows
    /// make up `test_fraction` of the total.
    #[default]
    Inflate,
    /// Draw `n` rows and hold out `test_fraction` of them.
    Split,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioSpec {
    pub label: Option<String>,
    pub n: usize,
    pub p: usize,
    /// Number of nonzero coefficients.
    pub s: usize,
    /// Feature autocorrelation: `Sigma_ij = rho^|i-j|`.
    pub rho: f64,
    /// Signal-to-noise ratio `beta' Sigma beta / sigma^2`.
    pub snr: f64,
    pub reps: usize,
    pub master_seed: u64,
    /// When set, every replication shares one coefficient vector drawn from this seed.
    pub beta_seed: Option<u64>,
    /// When set, noise streams derive from this seed instead of `master_seed`.
    pub noise_seed: Option<u64>,
    pub test_fraction: f64,
    pub test_split: TestSplit,
    /// Fixed coefficient vector; overrides the equally spaced construction.
    pub beta: Option<Vec<f64>>,
    /// Fixed noise variance; overrides `snr`.
    pub sigma2: Option<f64>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            label: None,
            n: 100,
            p: 20,
            s: 4,
            rho: 0.0,
            snr: 2.0,
            reps: 100,
            master_seed: 1,
            beta_seed: None,
            noise_seed: None,
            test_fraction: 0.4,
            test_split: TestSplit::Inflate,
            beta: None,
            sigma2: None,
        }
    }
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.n < 3 || self.p < 1 {
            return bad(format!("need n >= 3 and p >= 1, got n={} p={}", self.n, self.p));
        }
        if self.reps < 1 {
            return bad("reps must be >= 1".into());
        }
        if !(0.0..1.0).contains(&self.rho) {
            return bad(format!("rho must lie in [0, 1), got {}", self.rho));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad(format!("test_fraction must lie in (0, 1), got {}", self.test_fraction));
        }
        match (&self.beta, self.sigma2) {
            (Some(b), _) if b.len() != self.p => {
                return bad(format!("fixed beta has {} entries for p = {}", b.len(), self.p))
            }
            (_, Some(s2)) if !(s2 >= 0.0 && s2.is_finite()) => {
                return bad(format!("sigma2 must be finite and >= 0, got {s2}"))
            }
            (None, _) if self.s > self.p => return bad(format!("s = {} exceeds p = {}", self.s, self.p)),
            _ => {}
        }
        if self.sigma2.is_none() {
            if !(self.snr > 0.0 && self.snr.is_finite()) {
                return bad(format!("snr must be positive, got {}", self.snr));
            }
            if self.signal_count() == 0 {
                return bad("a pure-noise scenario needs a fixed sigma2".into());
            }
        }
        if self.n_train() < 3 || self.n_test() < 1 {
            return bad("too few rows for the train/test split".into());
        }
        Ok(())
    }

    fn signal_count(&self) -> usize {
        match &self.beta {
            Some(b) => b.iter().filter(|v| **v != 0.0).count(),
            None => self.s,
        }
    }

    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| {
            format!("n{}_p{}_s{}_rho{}_snr{}", self.n, self.p, self.signal_count(), self.rho, self.snr)
        })
    }

    pub fn n_train(&self) -> usize {
        match self.test_split {
            TestSplit::Inflate => self.n,
            TestSplit::Split => self.n - self.held_out(self.n),
        }
    }

    pub fn n_test(&self) -> usize {
        match self.test_split {
            TestSplit::Inflate => {
                (self.n as f64 * self.test_fraction / (1.0 - self.test_fraction)).round() as usize
            }
            TestSplit::Split => self.held_out(self.n),
        }
    }

    fn held_out(&self, total: usize) -> usize {
        (total as f64 * self.test_fraction).round() as usize
    }
}

/// Data-generating coefficients and noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrueModel {
    pub beta0: DVector<f64>,
    /// Sorted indices of the nonzero coefficients.
    pub support: Vec<usize>,
    pub sigma2: f64,
}

/// `n` rows i.i.d. from `N_p(0, Sigma)` with `Sigma_ij = rho^|i-j|`, via the
/// stationary AR(1) recursion across columns.
pub fn gen_design<R: Rng + ?Sized>(n: usize, p: usize, rho: f64, rng: &mut R) -> DMatrix<f64> {
    let innov = (1.0 - rho * rho).sqrt();
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        let mut prev = 0.0;
        for j in 0..p {
            let z: f64 = rng.sample(StandardNormal);
            let v = if j == 0 { z } else { rho * prev + innov * z };
            x[(i, j)] = v;
            prev = v;
        }
    }
    x
}

/// `s` magnitudes equally spaced on [1, 5], ascending; a single signal gets 1.
pub fn signal_magnitudes(s: usize) -> Vec<f64> {
    match s {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => (0..s)
            .map(|i| 1.0 + 4.0 * i as f64 / (s - 1) as f64)
            .collect(),
    }
}

/// Alternating signs in ascending-magnitude order, largest positive, so odd
/// `s` has one more positive than negative.
pub fn signal_signs(s: usize) -> Vec<f64> {
    (0..s)
        .map(|i| if (s - 1 - i).is_multiple_of(2) { 1.0 } else { -1.0 })
        .collect()
}

/// `beta' Sigma beta` for the AR(1) correlation matrix.
pub fn ar1_quadratic_form(beta: &DVector<f64>, rho: f64) -> f64 {
    let nz: Vec<(usize, f64)> = beta
        .iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(j, b)| (j, *b))
        .collect();
    let mut q = 0.0;
    for &(i, bi) in &nz {
        for &(j, bj) in &nz {
            q += bi * bj * rho.powi(i.abs_diff(j) as i32);
        }
    }
    q
}

pub fn make_beta<R: Rng + ?Sized>(spec: &ScenarioSpec, rng: &mut R) -> Result<TrueModel> {
    let beta0 = match &spec.beta {
        Some(b) => DVector::from_column_slice(b),
        None => {
            let mut beta = DVector::zeros(spec.p);
            let positions = index::sample(rng, spec.p, spec.s);
            let mags = signal_magnitudes(spec.s);
            let signs = signal_signs(spec.s);
            for (k, j) in positions.iter().enumerate() {
                beta[j] = signs[k] * mags[k];
            }
            beta
        }
    };
    let support = crate::lasso::support(&beta0);
    let sigma2 = match spec.sigma2 {
        Some(s2) => s2,
        None => ar1_quadratic_form(&beta0, spec.rho) / spec.snr,
    };
    if !(sigma2.is_finite() && sigma2 >= 0.0) {
        return Err(Error::InvalidInput(format!("noise variance {sigma2} is invalid")));
    }
    Ok(TrueModel {
        beta0,
        support,
        sigma2,
    })
}

/// `y = X beta0 + eps`, `eps ~ N(0, sigma2 I)`.
pub fn gen_response<R: Rng + ?Sized>(x: &DMatrix<f64>, model: &TrueModel, rng: &mut R) -> DVector<f64> {
    let sd = model.sigma2.sqrt();
    let mut y = x * &model.beta0;
    for v in y.iter_mut() {
        let e: f64 = rng.sample(StandardNormal);
        *v += sd * e;
    }
    y
}

const DESIGN_STREAM: u64 = 0;
const BETA_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

/// Independent generator for `(seed, stream)`; ChaCha's stream id makes the
/// derivation counter-based, so replication `r` never depends on `r - 1`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn replication_stream(rep: usize, kind: u64) -> u64 {
    ((rep as u64) << 2) | kind
}

/// One simulated train/test draw.
#[derive(Debug, Clone)]
pub struct Replication {
    pub train: Dataset,
    pub test: Dataset,
    pub truth: TrueModel,
}

pub fn draw_replication(spec: &ScenarioSpec, rep: usize) -> Result<Replication> {
    spec.validate()?;
    let mut beta_rng = match spec.beta_seed {
        Some(seed) => stream_rng(seed, BETA_STREAM),
        None => stream_rng(spec.master_seed, replication_stream(rep, BETA_STREAM)),
    };
    let truth = make_beta(spec, &mut beta_rng)?;

    let (n_train, n_test) = (spec.n_train(), spec.n_test());
    let total = n_train + n_test;
    let mut design_rng = stream_rng(spec.master_seed, replication_stream(rep, DESIGN_STREAM));
    let x = gen_design(total, spec.p, spec.rho, &mut design_rng);
    let mut noise_rng = stream_rng(
        spec.noise_seed.unwrap_or(spec.master_seed),
        replication_stream(rep, NOISE_STREAM),
    );
    let y = gen_response(&x, &truth, &mut noise_rng);

    let all = Dataset::with_default_names(x, y)?;
    let train: Vec<usize> = (0..n_train).collect();
    let test: Vec<usize> = (n_train..total).collect();
    Ok(Replication {
        train: all.select_rows(&train)?,
        test: all.select_rows(&test)?,
        truth,
    })
}
