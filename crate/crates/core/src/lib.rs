//! Exact simulation of Rydberg-atom chains in the blockade regime.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod gaussianity;
pub mod hamiltonians;
pub mod hilbert;
pub mod operator;
pub mod optimize;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use hamiltonians::{ModelSpec, Variant};
pub use hilbert::{Boundary, Space};
pub use operator::{SparseOperator, StateVector};
