//! Experiment running, statistics and analysis.

pub mod analysis;
pub mod faultenum;
pub mod pseudothreshold;
pub mod runner;
pub mod shot;
pub mod stats;
pub mod stratified;

pub use analysis::{check_improvement, exact_binomial_ratio, improvement_ratio, threshold_lower_bound, RatioCheck};
pub use faultenum::{sample_fault_pairs, single_fault_scenarios, sweep_single_faults, FaultSweepReport, ScenarioCheck};
pub use pseudothreshold::{estimate_pseudothreshold, DirectCurve, FnCurve, Pseudothreshold, RateCurve, RateEstimate};
pub use runner::{run_point, shot_rng, Experiment, ExperimentConfig, Mechanisms, OutputFormat};
pub use shot::{ShotResult, ShotRunner, ShotTrace};
pub use stats::{loglog_slope, wilson, ExperimentStats, Tally, Z95};
pub use stratified::{estimate_strata, StratifiedEstimate, StratifiedPlan, Stratum};
