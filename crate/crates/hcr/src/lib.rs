//! File formats, dataset ingestion and the experiment harness behind the
//! `hcr` command line tool. The algorithms live in `hcr_core`.

pub mod config;
pub mod error;
pub mod harness;
pub mod io;
pub mod report;

pub use config::{ClassifierKind, DatasetSource, ExperimentConfig, MlpSettings, Split, SyntheticSource};
pub use error::{HcrError, Result};
pub use harness::{compare_extractors, compare_networks, per_character_report, run_experiment, EvalReport};
