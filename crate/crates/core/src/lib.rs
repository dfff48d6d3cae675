//! Joint MAP semidefinite-relaxation turbo receiver for LDPC-coded MIMO.

pub mod detector;
pub mod error;
pub mod exit;
pub mod ldpc;
pub mod mimo_model;
pub mod rng;
pub mod sdp;
pub mod sim;
pub mod turbo;

pub use error::{Error, Result};
