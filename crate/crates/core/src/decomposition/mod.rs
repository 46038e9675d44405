//! Primal graphs, dependency hypergraphs, tree decompositions and branch
//! decompositions of dot diagrams.

mod branch;
mod graph;
mod treedec;

pub use branch::{edge_order, tree_to_branch, validate_branch_decomposition, BranchDecomposition};
pub use graph::{dependency_hypergraph, primal_graph, HyperEdge, Hypergraph, SimpleGraph};
pub use treedec::{
    exact_order, from_elimination_order, min_fill_order, normalize, tree_decomposition,
    validate_tree_decomposition, TdMode, TreeDecomposition, EXACT_LIMIT,
};

use serde::Serialize;

use crate::diagram::DotDiagram;
use crate::error::Result;

/// Every decomposition artifact computed for one diagram.
#[derive(Clone, Debug, Serialize)]
pub struct Decomposition {
    pub primal: SimpleGraph,
    pub hypergraph: Hypergraph,
    pub tree: TreeDecomposition,
    pub branch: BranchDecomposition,
    pub tree_width: usize,
    pub branch_width: usize,
}

/// Primal graph, tree decomposition and the derived branch decomposition of `f`.
pub fn decompose(f: &DotDiagram, mode: TdMode) -> Result<Decomposition> {
    let primal = primal_graph(f);
    let hypergraph = dependency_hypergraph(f);
    let tree = tree_decomposition(&primal, mode)?;
    let branch = tree_to_branch(&tree, &hypergraph)?;
    let branch_width = branch.width(&hypergraph);
    Ok(Decomposition {
        tree_width: tree.width(),
        branch_width,
        primal,
        hypergraph,
        tree,
        branch,
    })
}
