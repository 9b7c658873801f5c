//! Persistence and experiment orchestration: snapshot CSV, decomposition
//! archives, TOML experiment configs and oracle comparisons.

mod archive;
mod config;
mod csv;
mod experiment;

pub use archive::{Complex2, Counts, DecompositionArchive, Provenance, SCHEMA_VERSION};
pub use config::{
    bundled_config, DictionaryConfig, EdmdConfig, ExperimentConfig, OutputConfig, SystemConfig, ENV_OUTPUT_DIR,
    ENV_WORKERS,
};
pub use csv::{fmt_f64, parse_snapshots, read_snapshots, snapshots_to_csv, write_snapshots};
pub use experiment::{
    build_dictionary, compare_to_oracle, comparison_csv, eval_grid, load_system, report_csv, run_experiment,
    ComparisonRow, ExperimentOutput, GridSpec, OracleSpec,
};
