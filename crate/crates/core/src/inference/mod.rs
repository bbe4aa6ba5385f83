//! Block-input filtering, information densities and their oracles.

pub mod density;
pub mod exact;
pub mod filter;
pub mod verify;

pub use density::{info_density, log_rn_derivative, DensityKind, InfoDensitySample};
pub use exact::{exact_block_mi, BlockMiKind};
pub use filter::{anticausal_posterior, causal_posterior, two_sided_posterior, Condition, PosteriorPath, PosteriorValue};
pub use verify::{verify_csiszar_identity, verify_lln, verify_mc_inequality, LlnReport, VerificationReport};
