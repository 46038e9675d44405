//! Algebraisation of dot diagrams into low-width hypergraph terms, semiring
//! evaluation via arithmetic circuits, and certified inference for discrete
//! probabilistic programs.

pub mod algebraise;
pub mod apps;
pub mod decomposition;
pub mod diagram;
pub mod error;
pub mod frontend;
pub mod inference;
pub mod semiring;
pub mod term;
pub mod testkit;

pub use error::{Error, Result};
