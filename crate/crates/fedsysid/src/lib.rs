//! Federated identification of linear time-invariant systems.
//!
//! A deterministic simulator and library for learning a common `[A B]` model
//! across many clients that each observe a similar but not identical linear
//! system. The crate covers rollout simulation and batch data assembly,
//! least-squares estimation (per client, pooled, and averaged), a federated
//! optimization loop with plain and gradient-corrected client updates,
//! finite-sample error bounds with empirical coverage diagnostics, and a
//! config-driven experiment harness with CSV/plot-script output.

pub mod bounds;
pub mod error;
pub mod estimation;
pub mod experiments;
pub mod federation;
pub mod linalg;
pub mod lti;
pub mod rng;

pub use error::{Error, Result};
