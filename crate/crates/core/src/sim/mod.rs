//! Simulation harness: scenarios, truth and measurement generation,
//! distributed and centralised runs, and Monte Carlo reporting.

pub mod config;
pub mod measurements;
pub mod report;
pub mod run;
pub mod truth;

pub use config::{FusionRule, Projection, ScenarioConfig, TruthMode, Variant};
pub use measurements::generate_measurements;
pub use report::{Summary, SummaryRow};
pub use run::{
    generate_inputs, generate_truth, monte_carlo, run_centralized, run_distributed, run_variant, Models,
    RunInputs, RunResult, VariantResult,
};
pub use truth::{scripted_truth, GroundTruth, TruthObject};
