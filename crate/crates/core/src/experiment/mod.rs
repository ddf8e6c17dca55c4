//! Experiment configuration, data preparation and the subcommand runners.

mod commands;
mod config;
mod pipeline;

pub use commands::{
    amplitude_rows, fidelity_features, fidelity_table, run_command, Command, FidelityRow,
    SCHEMA_VERSION,
};
pub use config::{
    apply_override, load_config, DataSource, DatasetConfig, ExperimentConfig, ModelConfig,
    ModelKind,
};
pub use pipeline::{
    load_records, prepare, run_training, PreparedData, RowTransform, RunResult, SeedCheckpoint,
    SeedResult,
};
