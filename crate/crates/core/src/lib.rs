//! Finite-stage computations for product type group actions on UHF algebras.
//!
//! Every object lives at a finite matrix stage `M_{N_1} ⊗ ... ⊗ M_{N_L}`;
//! infinite tensor products are represented by lazily generated factor data.

pub mod actions;
pub mod algebra;
pub mod crossed;
pub mod groups;
pub mod rokhlin;
pub mod transforms;
pub mod witness;
mod error;

pub use error::{Error, Result};
