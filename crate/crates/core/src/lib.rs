//! Resonance approximation for two qubits coupled to local and collective
//! thermal bosonic reservoirs.

pub mod cli;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod quadrature;
pub mod resonance;
pub mod spectral;

pub use error::{Error, Result};
