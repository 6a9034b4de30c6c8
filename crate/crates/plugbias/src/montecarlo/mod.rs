//! Simulation harness for bias experiments, resampling baselines and the
//! simulation-size planner.

mod baselines;
mod distribution;
mod experiment;
mod planner;
mod report;

pub use baselines::{bootstrap_baseline, jackknife_baseline, BaselineEstimate};
pub use distribution::Distribution;
pub use experiment::{
    plug_in_value, run_bias_experiment, true_value, BaselineKind, EstimatorFamily, Experiment, ExperimentConfig,
    ExperimentReport, Gate,
};
pub use planner::{plan_simulations, SimulationPlan};
pub use report::{markdown_table, read_csv, write_csv};
