//! Teleportation between single-rail photonic qubits and coherent-state
//! qubits over a lossy hybrid entangled channel.
//!
//! Two independent backends are provided: closed-form analytic expressions
//! in the non-orthogonal coherent basis, and dense truncated Fock-space
//! simulation used as an oracle.

pub mod averaging;
pub mod bell;
pub mod error;
pub mod fock;
pub mod harness;
pub mod hybrid;
pub mod loss;
pub mod teleport;

pub use error::{Error, Result};
