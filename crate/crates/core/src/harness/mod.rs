//! Experiment harness: configuration, studies, oracles, output and CLI.

pub mod cli;
pub mod config;
pub mod oracle;
pub mod output;
pub mod studies;

pub use cli::run_cli;
pub use config::{ExperimentConfig, Settings};
pub use oracle::{exact_ld, sho_exact_ld, sho_flow};
pub use studies::{
    convergence, energy_study, fit_slope, ld_order, work_precision, Component, ConvergenceReport, EnergyReport,
    LdOrderReport, SlopeFit,
};
