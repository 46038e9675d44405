//! Turning dot diagrams into hypergraph terms.
//!
//! Pure wirings become layers of swaps, equates, copies, deletes and news.
//! A diagram with assignments is first split along a branch decomposition into
//! blocks of at most two assignments, each block is algebraised through its
//! Frobenius decomposition, and the block terms are substituted back together.

mod frobenius;
mod refactor;
mod sweep;
mod wiring;

use std::collections::BTreeMap;

use serde::Serialize;

pub use frobenius::{
    algebrise_frobenius, algebrise_small, frobenius_decompose, FrobeniusDecomposition,
};
pub use refactor::refactor_by_branch_decomposition;
pub use sweep::algebrise_sweep;
pub use wiring::{
    algebrise_permutation, algebrise_pure_wiring, decompose_pure_wiring, permutation_term,
    PureWiringFactors,
};

use crate::decomposition::{decompose, BranchDecomposition, Hypergraph, TdMode};
use crate::diagram::{CallNode, DotDiagram, HierarchicalDotDiagram, NodeId};
use crate::error::{Error, Result};
use crate::term::{TermId, TermStore};

#[derive(Clone, Copy, Debug, Default)]
pub struct AlgebraiseOptions {
    pub mode: TdMode,
}

/// Measurements taken while algebraising one diagram.
#[derive(Clone, Debug, Serialize)]
pub struct AlgebraisationReport {
    pub assignments: usize,
    pub diagram_width: usize,
    pub tree_width: usize,
    /// Width of the branch decomposition returned by the tree conversion.
    pub initial_branch_width: usize,
    /// Width of the branch decomposition actually used (interface leaves adjacent).
    pub branch_width: usize,
    pub blocks: usize,
    pub term_width: usize,
    pub dag_size: usize,
}

pub fn algebrise(store: &mut TermStore, f: &DotDiagram, opts: AlgebraiseOptions) -> Result<TermId> {
    algebrise_with_report(store, f, opts).map(|(t, _)| t)
}

/// Branch decomposition of `f` with the `in` and `out` leaves made siblings,
/// picking whichever of the two moves gives the smaller width.
fn paired_branch(b: &BranchDecomposition, h: &Hypergraph, n: usize) -> BranchDecomposition {
    let a = b.moved_next_to(n + 1, n);
    let c = b.moved_next_to(n, n + 1);
    if c.width(h) < a.width(h) {
        c
    } else {
        a
    }
}

pub fn algebrise_with_report(
    store: &mut TermStore,
    f: &DotDiagram,
    opts: AlgebraiseOptions,
) -> Result<(TermId, AlgebraisationReport)> {
    let n = f.assignments().len();
    let dec = decompose(f, opts.mode)?;
    let branch = paired_branch(&dec.branch, &dec.hypergraph, n);
    let branch_width = branch.width(&dec.hypergraph);
    let (t, blocks) = if n <= 2 {
        (algebrise_small(store, f)?, 1)
    } else {
        let prefix = store.fresh_symbol("block");
        let h = refactor_by_branch_decomposition(f, &branch, prefix.name())?;
        let t = combine(store, &h, |store, _, node| {
            algebrise_small(store, &node.body)
        })?;
        (t, h.nodes.len())
    };
    let report = AlgebraisationReport {
        assignments: n,
        diagram_width: f.width(),
        tree_width: dec.tree_width,
        initial_branch_width: dec.branch_width,
        branch_width,
        blocks,
        term_width: store.width(t),
        dag_size: store.dag_size(t),
    };
    Ok((t, report))
}

/// Algebraises every node bottom-up and substitutes child terms for the local
/// symbols, so a node called from many places is algebraised once.
fn combine(
    store: &mut TermStore,
    h: &HierarchicalDotDiagram,
    mut body_term: impl FnMut(&mut TermStore, NodeId, &CallNode) -> Result<TermId>,
) -> Result<TermId> {
    let mut terms: Vec<Option<TermId>> = vec![None; h.nodes.len()];
    for v in h.bottom_up_order()? {
        let node = &h.nodes[v];
        let t = body_term(store, v, node)?;
        let bindings: BTreeMap<_, _> = node
            .defn
            .iter()
            .map(|(s, &c)| (s.clone(), terms[c].expect("children come first")))
            .collect();
        terms[v] = Some(if bindings.is_empty() {
            t
        } else {
            store.substitute(t, &bindings)?
        });
    }
    Ok(terms[h.root].expect("root is reachable"))
}

pub fn algebrise_hierarchical(
    store: &mut TermStore,
    h: &HierarchicalDotDiagram,
    opts: AlgebraiseOptions,
) -> Result<TermId> {
    algebrise_hierarchical_with_report(store, h, opts).map(|(t, _)| t)
}

/// Like [`algebrise_hierarchical`], also returning one report per reachable node.
pub fn algebrise_hierarchical_with_report(
    store: &mut TermStore,
    h: &HierarchicalDotDiagram,
    opts: AlgebraiseOptions,
) -> Result<(TermId, Vec<(NodeId, AlgebraisationReport)>)> {
    let diags = h.validate();
    if !diags.is_empty() {
        return Err(Error::Validation(diags));
    }
    let mut reports = Vec::new();
    let t = combine(store, h, |store, v, node| {
        let (t, r) = algebrise_with_report(store, &node.body, opts)?;
        reports.push((v, r));
        Ok(t)
    })?;
    Ok((t, reports))
}

/// Per-node shape parameters of a hierarchy.
#[derive(Clone, Debug, Serialize)]
pub struct NodeStats {
    pub name: String,
    pub assignments: usize,
    pub width: usize,
    pub tree_width: usize,
    pub branch_width: usize,
}

/// The parameters `k`, `L`, `M`, `N` bounding the cost of the pipeline: the
/// largest tree width, one plus the most children, the node count and one plus
/// the most assignments in a body.
#[derive(Clone, Debug, Serialize)]
pub struct DiagramStats {
    pub k: usize,
    pub l: usize,
    pub m: usize,
    pub n: usize,
    pub nodes: Vec<NodeStats>,
}

pub fn pipeline_stats(h: &HierarchicalDotDiagram, mode: TdMode) -> Result<DiagramStats> {
    let order = h.bottom_up_order()?;
    let mut nodes = Vec::with_capacity(order.len());
    for &v in &order {
        let node = &h.nodes[v];
        let dec = decompose(&node.body, mode)?;
        nodes.push(NodeStats {
            name: node.name.clone(),
            assignments: node.body.assignments().len(),
            width: node.body.width(),
            tree_width: dec.tree_width,
            branch_width: dec.branch_width,
        });
    }
    Ok(DiagramStats {
        k: nodes.iter().map(|s| s.tree_width).max().unwrap_or(0),
        l: 1 + order
            .iter()
            .map(|&v| h.nodes[v].children.len())
            .max()
            .unwrap_or(0),
        m: order.len(),
        n: 1 + nodes.iter().map(|s| s.assignments).max().unwrap_or(0),
        nodes,
    })
}
