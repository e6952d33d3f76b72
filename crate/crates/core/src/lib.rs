//! Quantum-annealer dynamics as a classical feature map.
//!
//! Inputs are compressed with PCA, written into the couplings (and fields) of
//! a transverse-field Ising Hamiltonian, annealed from the uniform
//! superposition, and read out as computational-basis distributions that feed
//! a softmax classifier. Participation ratios summarise how spread those
//! distributions are.

pub mod config;
pub mod data;
pub mod diagnostics;
pub mod encoding;
pub mod error;
pub mod ising;
pub mod learning;
pub mod pipeline;
pub mod sampling;

pub use error::{Error, ErrorClass, Result};
