use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::graph::Hypergraph;
use super::treedec::{connected, TreeDecomposition};
use crate::diagram::Diagnostic;
use crate::error::{Error, Result};

/// An unrooted tree whose leaves are in bijection with the hyperedges of a hypergraph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchDecomposition {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
    /// `leaf_of[e]` is the tree node carrying hyperedge `e`.
    pub leaf_of: Vec<usize>,
}

impl BranchDecomposition {
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Hyperedge carried by each tree node, if it is a leaf.
    pub fn hyperedge_at(&self) -> Vec<Option<usize>> {
        let mut at = vec![None; self.nodes];
        for (e, &n) in self.leaf_of.iter().enumerate() {
            at[n] = Some(e);
        }
        at
    }

    /// Hyperedges on the `b` side of the tree edge `(a, b)`.
    pub fn side(&self, a: usize, b: usize) -> Vec<usize> {
        let adj = self.adjacency();
        let at = self.hyperedge_at();
        let mut out = Vec::new();
        let mut stack = vec![(b, a)];
        while let Some((x, from)) = stack.pop() {
            if let Some(e) = at[x] {
                out.push(e);
            }
            for &y in &adj[x] {
                if y != from {
                    stack.push((y, x));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Detaches the leaf of hyperedge `moved` and re-attaches it as a sibling of
    /// the leaf of `anchor`. Assumes a valid decomposition (inner degree 3).
    pub fn moved_next_to(&self, moved: usize, anchor: usize) -> BranchDecomposition {
        let (lm, la) = (self.leaf_of[moved], self.leaf_of[anchor]);
        let adj = self.adjacency();
        if self.nodes <= 3 || adj[lm][0] == adj[la][0] {
            return self.clone();
        }
        let u = adj[lm][0];
        let v = adj[la][0];
        let rest: Vec<usize> = adj[u].iter().copied().filter(|&y| y != lm).collect();
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .copied()
            .filter(|&(a, b)| a != u && b != u && (a, b) != (la, v) && (a, b) != (v, la))
            .collect();
        edges.push((rest[0], rest[1]));
        edges.extend([(u, la), (u, v), (u, lm)]);
        BranchDecomposition {
            nodes: self.nodes,
            edges,
            leaf_of: self.leaf_of.clone(),
        }
    }

    /// Order of every tree edge, in the order of `self.edges`.
    pub fn edge_orders(&self, h: &Hypergraph) -> Vec<usize> {
        if self.nodes == 0 {
            return Vec::new();
        }
        let adj = self.adjacency();
        let at = self.hyperedge_at();
        let mut total = vec![0usize; h.vertices];
        for e in &h.edges {
            for &v in &e.vertices {
                total[v] += 1;
            }
        }
        // Root at node 0; count incidences per vertex inside every subtree.
        let mut parent = vec![usize::MAX; self.nodes];
        let mut order = Vec::with_capacity(self.nodes);
        let mut stack = vec![0];
        parent[0] = 0;
        while let Some(x) = stack.pop() {
            order.push(x);
            for &y in &adj[x] {
                if parent[y] == usize::MAX {
                    parent[y] = x;
                    stack.push(y);
                }
            }
        }
        let mut counts: Vec<Vec<usize>> = vec![Vec::new(); self.nodes];
        let mut order_below = vec![0usize; self.nodes];
        for &x in order.iter().rev() {
            let mut c = vec![0usize; h.vertices];
            if let Some(e) = at[x] {
                for &v in &h.edges[e].vertices {
                    c[v] += 1;
                }
            }
            for &y in adj[x].iter().filter(|&&y| y != 0 && parent[y] == x) {
                for (cv, yv) in c.iter_mut().zip(&counts[y]) {
                    *cv += yv;
                }
                counts[y] = Vec::new();
            }
            order_below[x] = c
                .iter()
                .zip(&total)
                .filter(|(&c, &t)| c > 0 && c < t)
                .count();
            counts[x] = c;
        }
        self.edges
            .iter()
            .map(|&(a, b)| {
                if parent[b] == a {
                    order_below[b]
                } else {
                    order_below[a]
                }
            })
            .collect()
    }

    /// Maximum edge order; zero for a tree without edges.
    pub fn width(&self, h: &Hypergraph) -> usize {
        self.edge_orders(h).into_iter().max().unwrap_or(0)
    }

    pub fn to_dot(&self, h: &Hypergraph) -> String {
        let at = self.hyperedge_at();
        let orders = self.edge_orders(h);
        let mut s = String::from("graph branch_decomposition {\n");
        for (n, e) in at.iter().enumerate() {
            match e {
                Some(e) => writeln!(
                    s,
                    "  n{n} [shape=box,label=\"{}\"];",
                    super::graph::escape(&h.edges[*e].label)
                ),
                None => writeln!(s, "  n{n} [shape=point];"),
            }
            .expect("string write");
        }
        for (&(a, b), o) in self.edges.iter().zip(orders) {
            writeln!(s, "  n{a} -- n{b} [label=\"{o}\"];").expect("string write");
        }
        s.push_str("}\n");
        s
    }
}

/// Order of the tree edge `(a, b)`: vertices incident to hyperedges on both sides.
pub fn edge_order(b: &BranchDecomposition, h: &Hypergraph, edge: (usize, usize)) -> usize {
    let right = b.side(edge.0, edge.1);
    let mut in_right = vec![false; h.edges.len()];
    for &e in &right {
        in_right[e] = true;
    }
    let (mut l, mut r) = (vec![false; h.vertices], vec![false; h.vertices]);
    for (i, e) in h.edges.iter().enumerate() {
        let side = if in_right[i] { &mut r } else { &mut l };
        for &v in &e.vertices {
            side[v] = true;
        }
    }
    l.iter().zip(&r).filter(|(a, b)| **a && **b).count()
}

/// Builds a branch decomposition of `h` from a tree decomposition covering it.
///
/// Each hyperedge hangs below the first bag containing its vertices, bags without
/// hyperedges below them are pruned, high-degree bags become caterpillars and
/// degree-2 nodes are suppressed. The width is at most the largest bag size.
pub fn tree_to_branch(td: &TreeDecomposition, h: &Hypergraph) -> Result<BranchDecomposition> {
    let m = h.edges.len();
    if m < 2 {
        return Err(Error::InvalidInput(format!(
            "a branch decomposition needs at least two hyperedges, got {m}"
        )));
    }
    if td.bags.is_empty() {
        return Err(Error::InvalidInput("tree decomposition has no bags".into()));
    }
    let k = td.bags.len();
    let mut attached: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, e) in h.edges.iter().enumerate() {
        let bag = td
            .bags
            .iter()
            .position(|b| e.vertices.iter().all(|v| b.contains(v)))
            .ok_or_else(|| {
                Error::InvalidInput(format!("hyperedge `{}` is not covered by any bag", e.label))
            })?;
        attached[bag].push(i);
    }

    // Root the bag tree at 0 and collect children in bag-id order.
    let adj = td.adjacency();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut order = Vec::with_capacity(k);
    let mut seen = vec![false; k];
    seen[0] = true;
    let mut stack = vec![0];
    while let Some(x) = stack.pop() {
        order.push(x);
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                children[x].push(y);
                stack.push(y);
            }
        }
    }
    if order.len() != k {
        return Err(Error::InvalidInput(
            "tree decomposition is not connected".into(),
        ));
    }

    // Rooted tree over fresh ids; leaves are hyperedges. `None` marks a pruned bag.
    enum Rooted {
        Leaf(usize),
        Inner(Vec<Rooted>),
    }
    let mut built: Vec<Option<Rooted>> = (0..k).map(|_| None).collect();
    for &x in order.iter().rev() {
        let mut kids: Vec<Rooted> = attached[x].iter().map(|&e| Rooted::Leaf(e)).collect();
        for &c in &children[x] {
            if let Some(t) = built[c].take() {
                kids.push(t);
            }
        }
        built[x] = match kids.len() {
            0 => None,
            1 => kids.pop(),
            _ => Some(Rooted::Inner(kids)),
        };
    }
    let root = built[0]
        .take()
        .expect("at least two hyperedges below the root");

    let mut out = BranchDecomposition {
        nodes: 0,
        edges: Vec::new(),
        leaf_of: vec![usize::MAX; m],
    };
    // Emits the binary rooted tree, returning the id of its top node.
    fn emit(t: &Rooted, out: &mut BranchDecomposition) -> usize {
        match t {
            Rooted::Leaf(e) => {
                let id = out.nodes;
                out.nodes += 1;
                out.leaf_of[*e] = id;
                id
            }
            Rooted::Inner(kids) => {
                let mut acc = emit(&kids[0], out);
                for kid in &kids[1..] {
                    let right = emit(kid, out);
                    let id = out.nodes;
                    out.nodes += 1;
                    out.edges.push((id, acc));
                    out.edges.push((id, right));
                    acc = id;
                }
                acc
            }
        }
    }
    let top = emit(&root, &mut out);
    // The top node has degree 2: splice it out.
    let ends: Vec<usize> = out
        .edges
        .iter()
        .filter(|&&(a, _)| a == top)
        .map(|&(_, b)| b)
        .collect();
    debug_assert_eq!(ends.len(), 2);
    out.edges.retain(|&(a, _)| a != top);
    out.edges.push((ends[0], ends[1]));
    // `top` is the last id allocated, so removing it keeps ids dense.
    debug_assert_eq!(top, out.nodes - 1);
    out.nodes -= 1;
    Ok(out)
}

/// Checks degrees, tree shape and the leaf bijection.
///
/// Condition 0 is the tree shape, 1 the node degrees and 2 the leaf map.
pub fn validate_branch_decomposition(b: &BranchDecomposition, h: &Hypergraph) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    if b.edges
        .iter()
        .any(|&(x, y)| x >= b.nodes || y >= b.nodes || x == y)
    {
        diags.push(Diagnostic::new(None, 0, "tree edge out of range"));
        return diags;
    }
    if b.nodes == 0 || b.edges.len() != b.nodes - 1 || !connected(b.nodes, &b.edges, |_| true) {
        diags.push(Diagnostic::new(None, 0, "not a tree"));
        return diags;
    }
    let adj = b.adjacency();
    if b.leaf_of.len() != h.edges.len() {
        diags.push(Diagnostic::new(
            None,
            2,
            "leaf map does not cover every hyperedge",
        ));
    }
    let mut hits = vec![0usize; b.nodes];
    for &n in &b.leaf_of {
        if n >= b.nodes {
            diags.push(Diagnostic::new(
                None,
                2,
                format!("leaf map points at missing node {n}"),
            ));
            return diags;
        }
        hits[n] += 1;
    }
    for (n, ns) in adj.iter().enumerate() {
        let is_leaf = ns.len() == 1 || b.nodes == 1;
        match (is_leaf, hits[n]) {
            (true, 1) | (false, 0) => {}
            (true, _) => diags.push(Diagnostic::new(
                Some(n),
                2,
                "leaf must carry exactly one hyperedge",
            )),
            (false, _) => diags.push(Diagnostic::new(
                Some(n),
                2,
                "inner node carries a hyperedge",
            )),
        }
        if !is_leaf && ns.len() != 3 {
            diags.push(Diagnostic::new(
                Some(n),
                1,
                format!("inner node has degree {}", ns.len()),
            ));
        }
    }
    diags
}
