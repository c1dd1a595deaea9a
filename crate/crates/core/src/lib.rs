//! Two-stage variable selection for linear models: a lasso candidate set
//! tuned by GIC, screened with second-generation p-values, and refit by
//! least squares. Also includes the comparison methods and a Monte Carlo
//! benchmark harness.

pub mod baselines;
pub mod data;
pub mod error;
pub mod lasso;
pub mod linalg;
pub mod prosgpv;
pub mod sgpv;
pub mod simbench;

pub use error::{Error, Result};
pub use linalg::{Dataset, LinearModel, OlsFit};
pub use prosgpv::{fit_one_stage, fit_two_stage, ProSgpvConfig, SelectionResult};
pub use sgpv::{NullBound, SgpvReport};
