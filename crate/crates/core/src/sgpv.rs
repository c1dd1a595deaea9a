//! Second-generation p-values and the interval-null screening rule.
//!
//! For an interval estimate `I` and an interval null `H0`,
//!
//! ```text
//!     p_delta = |I ∩ H0| / |I| * max(|I| / (2|H0|), 1)
//! ```
//!
//! `p_delta = 0` means the estimate is incompatible with every null effect;
//! the screen keeps exactly those variables.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::linalg::OlsFit;

/// Two-sided 95% normal quantile used for the Wald intervals.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo > hi {
            return Err(Error::InvalidInput(format!("bad interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn symmetric(center: f64, half_width: f64) -> Self {
        Self {
            lo: center - half_width,
            hi: center + half_width,
        }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn intersection_length(&self, other: &Interval) -> f64 {
        (self.hi.min(other.hi) - self.lo.max(other.lo)).max(0.0)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.4}, {:.4}]", self.lo, self.hi)
    }
}

/// Second-generation p-value of `estimate` against `null`, clamped to [0, 1].
pub fn sgpv_value(estimate: &Interval, null: &Interval) -> Result<f64> {
    let len_i = estimate.length();
    let len_h = null.length();
    if !(len_i > 0.0 && len_h > 0.0) {
        return Err(Error::ZeroLengthInterval);
    }
    let overlap = estimate.intersection_length(null);
    // overlap/|I| * |I|/(2|H0|) simplifies when the correction is active
    let p = if len_i > 2.0 * len_h {
        overlap / (2.0 * len_h)
    } else {
        overlap / len_i
    };
    Ok(p.clamp(0.0, 1.0))
}

/// How the interval-null half-width is derived from the candidate fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullBound {
    /// Mean coefficient standard error.
    #[default]
    Sebar,
    /// Mean SE times `sqrt(log(n/p))`.
    SebarLoginfl,
    /// Mean SE divided by `sqrt(log(n/p))`.
    SebarLogdefl,
    /// Residual standard deviation over 12.
    Const,
    /// Point null; screening reduces to the classical 5% Wald test.
    Zero,
}

impl NullBound {
    pub const ALL: [NullBound; 5] = [
        NullBound::Sebar,
        NullBound::SebarLoginfl,
        NullBound::SebarLogdefl,
        NullBound::Const,
        NullBound::Zero,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            NullBound::Sebar => "sebar",
            NullBound::SebarLoginfl => "sebar-loginfl",
            NullBound::SebarLogdefl => "sebar-logdefl",
            NullBound::Const => "const",
            NullBound::Zero => "zero",
        }
    }
}

impl fmt::Display for NullBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NullBound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NullBound::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown null bound `{s}`")))
    }
}

/// Null-bound half-width from the standardized-scale candidate fit. `n` and
/// `p` are the sample size and total feature count.
pub fn null_bound(fit: &OlsFit, variant: NullBound, n: usize, p: usize) -> Result<f64> {
    let k = fit.se.len();
    if k == 0 {
        return Err(Error::EmptyCandidateSet);
    }
    let sebar = fit.se.sum() / k as f64;
    let log_ratio = || {
        let l = (n as f64 / p as f64).ln();
        if l > 0.0 {
            Ok(l.sqrt())
        } else {
            Err(Error::NullBoundUndefined(variant.name()))
        }
    };
    Ok(match variant {
        NullBound::Sebar => sebar,
        NullBound::SebarLoginfl => sebar * log_ratio()?,
        NullBound::SebarLogdefl => sebar / log_ratio()?,
        NullBound::Const => fit.sigma2_hat.sqrt() / 12.0,
        NullBound::Zero => 0.0,
    })
}

/// Quantile used to build the per-coefficient intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalKind {
    /// Fixed 1.96.
    #[default]
    Normal,
    /// 97.5% quantile of Student t with the residual degrees of freedom.
    StudentT,
}

impl IntervalKind {
    pub fn multiplier(&self, df_resid: usize) -> f64 {
        match self {
            IntervalKind::Normal => Z_95,
            IntervalKind::StudentT if df_resid > 0 => StudentsT::new(0.0, 1.0, df_resid as f64)
                .map(|t| t.inverse_cdf(0.975))
                .unwrap_or(Z_95),
            IntervalKind::StudentT => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgpvEntry {
    /// Column index in the full design.
    pub index: usize,
    pub estimate: f64,
    pub se: f64,
    pub interval: Interval,
    pub p_delta: f64,
    pub keep: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SgpvReport {
    /// Half-width of the interval null `[-bound, bound]`.
    pub bound: f64,
    pub multiplier: f64,
    pub entries: Vec<SgpvEntry>,
}

impl SgpvReport {
    pub fn null(&self) -> Interval {
        Interval::symmetric(0.0, self.bound)
    }

    pub fn kept(&self) -> Vec<usize> {
        self.entries
            .iter()
            .filter(|e| e.keep)
            .map(|e| e.index)
            .collect()
    }
}

/// Closed-form hard threshold equivalent to a zero SGPV.
pub fn exceeds_threshold(estimate: f64, se: f64, bound: f64, multiplier: f64) -> bool {
    estimate.abs() > multiplier * se + bound
}

/// Screen each coefficient of `fit`; `columns[k]` names the design column of
/// coefficient `k`.
pub fn screen(fit: &OlsFit, columns: &[usize], bound: f64, multiplier: f64) -> Result<SgpvReport> {
    if columns.len() != fit.beta_hat.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} column labels for {} coefficients",
            columns.len(),
            fit.beta_hat.len()
        )));
    }
    if !(bound >= 0.0 && bound.is_finite()) {
        return Err(Error::InvalidInput(format!("null bound must be finite and >= 0, got {bound}")));
    }
    let null = Interval::symmetric(0.0, bound);
    let entries = columns
        .iter()
        .enumerate()
        .map(|(k, &index)| {
            let estimate = fit.beta_hat[k];
            let se = fit.se[k];
            let interval = Interval::symmetric(estimate, multiplier * se);
            let p_delta = if interval.length() == 0.0 {
                // a point estimate either sits inside the null or outside it
                if estimate.abs() > bound {
                    0.0
                } else {
                    1.0
                }
            } else if bound > 0.0 {
                sgpv_value(&interval, &null)?
            } else if exceeds_threshold(estimate, se, 0.0, multiplier) {
                0.0
            } else {
                // limit of p_delta as the null shrinks onto an interior point
                0.5
            };
            Ok(SgpvEntry {
                index,
                estimate,
                se,
                interval,
                p_delta,
                keep: p_delta == 0.0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SgpvReport {
        bound,
        multiplier,
        entries,
    })
}
