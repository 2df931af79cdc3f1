//! Initial variational states: frequentist NMF, cosine deduplication, and
//! the discovery / recovery-discovery procedures.

pub mod nmf;
pub mod strategies;

pub use nmf::{frequentist_nmf, frequentist_nmf_fixed_basis, kl_divergence, NmfSolution};
pub use strategies::{cosine, cosine_dedup, init_discovery, init_recovery_discovery, InitOptions};
