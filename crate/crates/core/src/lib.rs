//! Multipartite entanglement of the open transverse-field Ising chain,
//! characterized by the distribution of the participation number (inverse
//! purity) over all balanced bipartitions of the ground state.

pub mod analysis;
pub mod error;
pub mod io;
pub mod ising;
pub mod measures;
pub mod partition;
pub mod solver;
pub mod state;

pub use error::{Error, Result};
