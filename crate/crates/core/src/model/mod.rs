//! Model containers: observed data, hyperparameters, the variational state,
//! reference catalogs, invariant validation, and the checkpoint format.

pub mod catalog;
pub mod checkpoint;
pub mod data;
pub mod hyper;
pub mod state;
pub mod validate;

pub use catalog::SignatureCatalog;
pub use checkpoint::{Checkpoint, CHECKPOINT_HEADER};
pub use data::{check_motif_alignment, StudyData};
pub use hyper::Hyperparameters;
pub use state::{prior_state, PointEstimates, StudyVariational, VariationalState};
pub use validate::{validate_state, ValidationReport, Violation};
