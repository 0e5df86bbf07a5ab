//! Soft-landing control of electromechanical relays.
//!
//! The crate bundles a hybrid relay simulator, a flatness-based flux
//! feedforward with an inner PI flux loop, a noisy Nelder-Mead run-to-run
//! tuner driven by an acoustic cost, and a campaign harness that runs many
//! operations over perturbed relay units.

pub mod campaign;
pub mod error;
pub mod export;
pub mod feedforward;
pub mod flux;
pub mod operation;
pub mod plant;
pub mod r2r;
pub mod relay;
pub mod trajectory;

pub use error::{Error, Result};
