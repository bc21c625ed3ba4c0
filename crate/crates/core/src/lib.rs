pub mod achievable;
pub mod chain_sim;
pub mod error;
pub mod kernel1d;
pub mod kernel_nd;
pub mod kinetic;
pub mod lattice_nd;
pub mod scalar;

pub use error::{Error, Result};
