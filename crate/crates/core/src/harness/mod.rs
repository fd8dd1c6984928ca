//! Configuration-driven experiment runs and their CSV artifacts.

pub mod config;
pub mod experiments;
pub mod output;

pub use config::{MinEigSetting, RhoPolicy, ScenarioConfig};
pub use experiments::{
    betas_for, planned_evaluations, run_eig_bias, run_rho_sweep, run_snr_sweep, EigBiasRow, MIResult, RunOptions,
    SweepOutput, TrialRecord, MIN_EIG_BIAS_TRIALS,
};
pub use output::{CsvTable, Manifest};
