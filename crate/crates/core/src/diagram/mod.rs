//! Dot diagrams: the program intermediate representation.

mod dot;
mod equivalence;
mod hierarchy;
mod signature;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use dot::{compose, compose_all, substitute, tensor, Assignment, DotDiagram, Var};
pub use equivalence::{equivalent, isomorphic};
pub use hierarchy::{CallNode, HierarchicalDotDiagram, NodeId, DEFAULT_UNFOLD_CAP};
pub use signature::{MonoidalSignature, Sort, Symbol, SymbolType};

/// A single structural problem found by a validator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    /// Call-graph node (or bag/tree vertex for decompositions) the problem refers to.
    pub node: Option<usize>,
    /// Number of the violated defining condition.
    pub condition: u8,
    pub message: String,
}

impl Diagnostic {
    pub fn new(node: Option<usize>, condition: u8, message: impl Into<String>) -> Self {
        Diagnostic {
            node,
            condition,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Some(n) => write!(
                f,
                "node {n}, condition {}: {}",
                self.condition, self.message
            ),
            None => write!(f, "condition {}: {}", self.condition, self.message),
        }
    }
}
