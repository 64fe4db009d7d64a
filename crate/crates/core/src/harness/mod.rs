//! Config-driven Monte Carlo experiment harness.
//!
//! Four experiments cover the simulator's headline plots and checks:
//! spectral efficiency vs SNR, energy efficiency vs RF-chain count, beam
//! patterns of quantized steering vectors, and compressed-sensing channel
//! estimation quality. Runs are reproducible: identical (config, seed)
//! pairs emit byte-identical CSV.

mod config;
mod run;
mod table;

pub use config::{
    BeampatternSection, ChannelSection, Dims, EstimationSection, ExperimentConfig,
    ExperimentKind, MethodName, OutputFormat, PowerSection, Resolution, TrainingKindName,
};
pub use run::{run, run_beampattern, run_ee_sweep, run_estimation, run_se_sweep};
pub use table::{Cell, ResultTable};
