//! Maximally entangled bases of `H_d ⊗ H_d` built from character tables of
//! finite abelian groups, verification of their defining properties, and
//! decision procedures for their equivalence under bilocal unitaries.
//!
//! The exact layer ([`exact`], [`chargroup`]) carries generators as grids of
//! root-of-unity exponents. The complex layer is only used for verification.

pub mod chargroup;
pub mod cli;
pub mod equivalence;
pub mod error;
pub mod exact;
pub mod io;
pub mod meb;
pub mod par;

pub use error::{Error, Result};
pub use exact::Tolerance;
pub use par::Exec;
