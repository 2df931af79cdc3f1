//! Synthetic-data generation and the evaluation harness.

pub mod generate;
pub mod metrics;
pub mod scenario;

pub use generate::{replicate_seed, simulate, GroundTruth};
pub use metrics::{
    beta_credible_intervals, cosine_match, detection_rate, inclusion_prevalence, signature_filter,
    CredibleInterval, MatchReport, TruthMatch, DEFAULT_CAPTURE_THRESHOLD,
};
pub use scenario::{CovariateSpec, InclusionDesign, ScenarioSpec};
