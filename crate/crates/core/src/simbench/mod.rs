//! Monte Carlo benchmark: data generation, metrics, replication runner and
//! CSV/JSON output.

pub mod generate;
pub mod metrics;
pub mod report;
pub mod runner;

pub use generate::{draw_replication, Replication, ScenarioSpec, TestSplit, TrueModel};
pub use metrics::{eval_metrics, MetricsRecord};
pub use runner::{run_experiment, Aggregate, ExperimentResult, Method, MethodSettings, Quartiles};
