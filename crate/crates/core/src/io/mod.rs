//! File-format codecs and run provenance for the command-line tools.

pub mod catalog_io;
pub mod config;
pub mod counts;
pub mod covariates;
pub mod manifest;
pub mod scenario_io;
pub mod tables;

pub use catalog_io::load_catalog;
pub use config::Settings;
pub use counts::{load_counts, write_counts, CountsTable};
pub use covariates::{build_study, load_covariate_table, CovariateTable, IngestedStudy};
pub use manifest::{digest_file, sha256_hex, RunManifest};
pub use scenario_io::load_scenario;
pub use tables::{fmt_sig12, read_labeled_matrix, write_labeled_matrix, LabeledMatrix};
