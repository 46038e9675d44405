use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::dot::{substitute, DotDiagram};
use super::signature::{MonoidalSignature, Symbol};
use super::Diagnostic;
use crate::error::{Error, Result};

pub type NodeId = usize;

/// Default bound on the number of assignments `unfold` may produce.
pub const DEFAULT_UNFOLD_CAP: usize = 1_000_000;

/// One vertex of a call graph: a function body plus the local symbols it calls.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallNode {
    pub name: String,
    /// Local function symbols, each defined by a child node.
    pub signature: MonoidalSignature,
    pub body: DotDiagram,
    pub defn: BTreeMap<Symbol, NodeId>,
    pub children: Vec<NodeId>,
    /// Optional source names of the body's variables, indexed by variable id.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub var_names: Vec<String>,
}

impl CallNode {
    /// A node without local symbols.
    pub fn leaf(name: impl Into<String>, body: DotDiagram) -> Self {
        CallNode {
            name: name.into(),
            signature: MonoidalSignature::new(),
            body,
            defn: BTreeMap::new(),
            children: Vec::new(),
            var_names: Vec::new(),
        }
    }

    pub fn var_name(&self, v: super::Var) -> String {
        self.var_names
            .get(v.index())
            .cloned()
            .unwrap_or_else(|| format!("v{}", v.0))
    }
}

/// A rooted call DAG of dot diagrams.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchicalDotDiagram {
    /// The base signature shared by every node.
    pub base: MonoidalSignature,
    pub nodes: Vec<CallNode>,
    pub root: NodeId,
}

impl HierarchicalDotDiagram {
    /// A hierarchy with a single node.
    pub fn single(base: MonoidalSignature, name: impl Into<String>, body: DotDiagram) -> Self {
        HierarchicalDotDiagram {
            base,
            nodes: vec![CallNode::leaf(name, body)],
            root: 0,
        }
    }

    pub fn root_node(&self) -> &CallNode {
        &self.nodes[self.root]
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name)
    }

    /// Nodes reachable from the root, children before parents.
    pub fn bottom_up_order(&self) -> Result<Vec<NodeId>> {
        self.check_graph()?;
        Ok(self.postorder())
    }

    fn postorder(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        // Iterative DFS: (node, next child index).
        let mut stack = vec![(self.root, 0usize)];
        seen[self.root] = true;
        while let Some((v, i)) = stack.pop() {
            if let Some(&c) = self.nodes[v].children.get(i) {
                stack.push((v, i + 1));
                if c < self.nodes.len() && !seen[c] {
                    seen[c] = true;
                    stack.push((c, 0));
                }
            } else {
                out.push(v);
            }
        }
        out
    }

    /// Node ids in range and no cycles; reachability is not required.
    fn check_graph(&self) -> Result<()> {
        let n = self.nodes.len();
        let mut diags = Vec::new();
        if self.root >= n {
            diags.push(Diagnostic::new(
                None,
                1,
                format!("root {} is not a node", self.root),
            ));
        }
        for (v, node) in self.nodes.iter().enumerate() {
            if let Some(c) = node.children.iter().find(|c| **c >= n) {
                diags.push(Diagnostic::new(
                    Some(v),
                    1,
                    format!("child {c} is not a node"),
                ));
            }
        }
        if diags.is_empty() {
            if let Some(v) = self.find_cycle() {
                diags.push(Diagnostic::new(Some(v), 1, "call graph contains a cycle"));
            }
        }
        if diags.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(diags))
        }
    }

    /// Re-roots the hierarchy at `node`, keeping only the nodes it can reach.
    pub fn rooted_at(&self, node: NodeId) -> Result<HierarchicalDotDiagram> {
        if node >= self.nodes.len() {
            return Err(Error::InvalidInput(format!("no call node {node}")));
        }
        let sub = HierarchicalDotDiagram {
            base: self.base.clone(),
            nodes: self.nodes.clone(),
            root: node,
        };
        sub.check_graph()?;
        let keep = sub.postorder();
        let mut map = vec![usize::MAX; self.nodes.len()];
        let mut kept: Vec<NodeId> = keep.clone();
        kept.sort_unstable();
        for (new, &old) in kept.iter().enumerate() {
            map[old] = new;
        }
        let nodes = kept
            .iter()
            .map(|&old| {
                let mut n = self.nodes[old].clone();
                n.children = n.children.iter().map(|c| map[*c]).collect();
                n.defn = n.defn.into_iter().map(|(s, c)| (s, map[c])).collect();
                n
            })
            .collect();
        Ok(HierarchicalDotDiagram {
            base: self.base.clone(),
            nodes,
            root: map[node],
        })
    }

    /// Checks the four defining conditions; an empty result means well-formed.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        let n = self.nodes.len();
        if self.root >= n {
            diags.push(Diagnostic::new(
                None,
                1,
                format!("root {} is not a node", self.root),
            ));
            return diags;
        }
        for (v, node) in self.nodes.iter().enumerate() {
            for &c in &node.children {
                if c >= n {
                    diags.push(Diagnostic::new(
                        Some(v),
                        1,
                        format!("child {c} is not a node"),
                    ));
                }
            }
        }
        if !diags.is_empty() {
            return diags;
        }
        if let Some(v) = self.find_cycle() {
            diags.push(Diagnostic::new(Some(v), 1, "call graph contains a cycle"));
            return diags;
        }
        let reach = self.postorder();
        let mut reachable = vec![false; n];
        for v in reach {
            reachable[v] = true;
        }
        for (v, r) in reachable.iter().enumerate() {
            if !r {
                diags.push(Diagnostic::new(
                    Some(v),
                    1,
                    "node is not reachable from the root",
                ));
            }
        }

        for (v, node) in self.nodes.iter().enumerate() {
            self.check_node_typing(v, node, &mut diags);
            self.check_defn(v, node, &mut diags);
            let na = node.body.assignments().len();
            if node.children.len() > na {
                diags.push(Diagnostic::new(
                    Some(v),
                    4,
                    format!("{} children but only {na} assignments", node.children.len()),
                ));
            }
        }
        diags
    }

    fn find_cycle(&self) -> Option<NodeId> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.nodes.len()];
        for start in 0..self.nodes.len() {
            if state[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            state[start] = 1;
            while let Some((v, i)) = stack.pop() {
                if let Some(&c) = self.nodes[v].children.get(i) {
                    stack.push((v, i + 1));
                    match state[c] {
                        0 => {
                            state[c] = 1;
                            stack.push((c, 0));
                        }
                        1 => return Some(c),
                        _ => {}
                    }
                } else {
                    state[v] = 2;
                }
            }
        }
        None
    }

    fn check_node_typing(&self, v: NodeId, node: &CallNode, diags: &mut Vec<Diagnostic>) {
        for s in node.signature.symbols.keys() {
            if self.base.contains(s) {
                diags.push(Diagnostic::new(
                    Some(v),
                    2,
                    format!("local symbol `{s}` clashes with a base symbol"),
                ));
            }
        }
        for (sym, sort) in node.signature.undeclared_sorts() {
            if !self.base.sorts.contains(&sort) {
                diags.push(Diagnostic::new(
                    Some(v),
                    2,
                    format!("local symbol `{sym}` uses unknown sort `{sort}`"),
                ));
            }
        }
        for (i, a) in node.body.assignments().iter().enumerate() {
            let ty = self
                .base
                .get(&a.symbol)
                .or_else(|| node.signature.get(&a.symbol));
            match ty {
                None => diags.push(Diagnostic::new(
                    Some(v),
                    2,
                    format!("assignment {i} calls unknown symbol `{}`", a.symbol),
                )),
                Some(ty) => {
                    let used = node.body.assignment_type(a);
                    if used != *ty {
                        diags.push(Diagnostic::new(
                            Some(v),
                            2,
                            format!(
                                "assignment {i}: `{}` has type {:?} -> {:?} but is used at {:?} -> {:?}",
                                a.symbol, ty.dom, ty.cod, used.dom, used.cod
                            ),
                        ));
                    }
                }
            }
        }
        for s in node.body.sorts() {
            if !self.base.sorts.contains(s) {
                diags.push(Diagnostic::new(
                    Some(v),
                    2,
                    format!("sort `{s}` is not declared"),
                ));
                break;
            }
        }
    }

    fn check_defn(&self, v: NodeId, node: &CallNode, diags: &mut Vec<Diagnostic>) {
        let local: BTreeSet<&Symbol> = node.signature.symbols.keys().collect();
        let mapped: BTreeSet<&Symbol> = node.defn.keys().collect();
        for s in local.difference(&mapped) {
            diags.push(Diagnostic::new(
                Some(v),
                3,
                format!("local symbol `{s}` has no definition"),
            ));
        }
        for s in mapped.difference(&local) {
            diags.push(Diagnostic::new(
                Some(v),
                3,
                format!("definition given for `{s}`, which is not a local symbol"),
            ));
        }
        let mut targets: BTreeMap<NodeId, &Symbol> = BTreeMap::new();
        for (s, &c) in &node.defn {
            if let Some(prev) = targets.insert(c, s) {
                diags.push(Diagnostic::new(
                    Some(v),
                    3,
                    format!("symbols `{prev}` and `{s}` are both defined by node {c}"),
                ));
            }
        }
        let children: BTreeSet<NodeId> = node.children.iter().copied().collect();
        if children.len() != node.children.len() {
            diags.push(Diagnostic::new(
                Some(v),
                3,
                "child list contains duplicates",
            ));
        }
        let images: BTreeSet<NodeId> = targets.keys().copied().collect();
        if images != children {
            diags.push(Diagnostic::new(
                Some(v),
                3,
                format!("definition targets {images:?} differ from children {children:?}"),
            ));
        }
        for (s, &c) in &node.defn {
            let (Some(ty), Some(child)) = (node.signature.get(s), self.nodes.get(c)) else {
                continue;
            };
            let body_ty = child.body.interface_type();
            if *ty != body_ty {
                diags.push(Diagnostic::new(
                    Some(v),
                    3,
                    format!(
                        "`{s}` has type {:?} -> {:?} but node {c} has interface {:?} -> {:?}",
                        ty.dom, ty.cod, body_ty.dom, body_ty.cod
                    ),
                ));
            }
        }
    }

    /// Number of assignments `unfold` would produce, saturating.
    pub fn unfolded_size(&self) -> Result<u128> {
        let order = self.bottom_up_order()?;
        let mut size = vec![0u128; self.nodes.len()];
        for v in order {
            let node = &self.nodes[v];
            let mut total = 0u128;
            for a in node.body.assignments() {
                let s = match node.defn.get(&a.symbol) {
                    Some(&c) => size[c],
                    None => 1,
                };
                total = total.saturating_add(s);
            }
            size[v] = total;
        }
        Ok(size[self.root])
    }

    /// Flattens the hierarchy by recursive substitution along the call DAG.
    pub fn unfold(&self, cap: usize) -> Result<DotDiagram> {
        let diags = self.validate();
        if !diags.is_empty() {
            return Err(Error::Validation(diags));
        }
        let total = self.unfolded_size()?;
        if total > cap as u128 {
            return Err(Error::ResourceLimit(format!(
                "unfolding produces {total} assignments, above the cap of {cap}"
            )));
        }
        let order = self.postorder();
        let mut done: Vec<Option<DotDiagram>> = vec![None; self.nodes.len()];
        for v in order {
            let node = &self.nodes[v];
            let bindings: BTreeMap<Symbol, DotDiagram> = node
                .defn
                .iter()
                .map(|(s, &c)| (s.clone(), done[c].clone().expect("children first")))
                .collect();
            done[v] = Some(substitute(&node.body, &bindings)?);
        }
        Ok(done[self.root].take().expect("root visited"))
    }

    /// Node count, maximum child count, maximum assignment count.
    pub fn shape(&self) -> (usize, usize, usize) {
        let m = self.nodes.len();
        let l = self
            .nodes
            .iter()
            .map(|n| n.children.len())
            .max()
            .unwrap_or(0);
        let n = self
            .nodes
            .iter()
            .map(|n| n.body.assignments().len())
            .max()
            .unwrap_or(0);
        (m, l, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{Assignment, Sort, SymbolType, Var};

    fn bool_sig() -> MonoidalSignature {
        let b = Sort::new("Bool");
        let mut sig = MonoidalSignature::new();
        sig.add_sort(b.clone());
        sig.add_symbol(Symbol::new("flip"), vec![], vec![b.clone()]);
        sig.add_symbol(Symbol::new("and"), vec![b.clone(), b.clone()], vec![b]);
        sig
    }

    /// g() := flip;  f() := and(g(), g())
    fn two_level() -> HierarchicalDotDiagram {
        let b = Sort::new("Bool");
        let g_body = DotDiagram::symbol(
            Symbol::new("flip"),
            &SymbolType::new(vec![], vec![b.clone()]),
        );
        let f_body = DotDiagram::new(
            vec![b.clone(), b.clone(), b],
            vec![
                Assignment::new(vec![Var(0)], Symbol::new("g"), vec![]),
                Assignment::new(vec![Var(1)], Symbol::new("g"), vec![]),
                Assignment::new(vec![Var(2)], Symbol::new("and"), vec![Var(0), Var(1)]),
            ],
            vec![],
            vec![Var(2)],
        )
        .unwrap();
        let mut local = MonoidalSignature::new();
        local.add_symbol(Symbol::new("g"), vec![], vec![Sort::new("Bool")]);
        let root = CallNode {
            name: "f".into(),
            signature: local,
            body: f_body,
            defn: [(Symbol::new("g"), 1)].into_iter().collect(),
            children: vec![1],
            var_names: vec![],
        };
        HierarchicalDotDiagram {
            base: bool_sig(),
            nodes: vec![root, CallNode::leaf("g", g_body)],
            root: 0,
        }
    }

    #[test]
    fn well_formed_has_no_diagnostics() {
        assert!(two_level().validate().is_empty());
    }

    #[test]
    fn unfold_substitutes_children() {
        let h = two_level();
        let u = h.unfold(DEFAULT_UNFOLD_CAP).unwrap();
        let flips = u
            .assignments()
            .iter()
            .filter(|a| a.symbol.name() == "flip")
            .count();
        assert_eq!(flips, 2);
        assert_eq!(u.assignments().len(), 3);
        assert_eq!(h.unfolded_size().unwrap(), 3);
    }

    #[test]
    fn unfold_respects_cap() {
        assert!(matches!(
            two_level().unfold(2),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn single_node_unfold_is_body() {
        let h = two_level().rooted_at(1).unwrap();
        assert_eq!(h.nodes.len(), 1);
        assert_eq!(h.unfold(10).unwrap(), h.nodes[0].body);
    }

    #[test]
    fn too_many_children_is_condition_four() {
        let mut h = two_level();
        let b = Sort::new("Bool");
        for name in ["p", "q", "r"] {
            h.nodes[0]
                .signature
                .add_symbol(Symbol::new(name), vec![], vec![b.clone()]);
        }
        for (i, name) in ["p", "q", "r"].iter().enumerate() {
            let body = DotDiagram::symbol(
                Symbol::new("flip"),
                &SymbolType::new(vec![], vec![b.clone()]),
            );
            h.nodes.push(CallNode::leaf(*name, body));
            h.nodes[0].defn.insert(Symbol::new(name), 2 + i);
            h.nodes[0].children.push(2 + i);
        }
        let diags = h.validate();
        assert!(
            diags.iter().any(|d| d.condition == 4 && d.node == Some(0)),
            "{diags:?}"
        );
    }

    #[test]
    fn non_injective_defn_is_condition_three() {
        let mut h = two_level();
        let b = Sort::new("Bool");
        h.nodes[0]
            .signature
            .add_symbol(Symbol::new("g2"), vec![], vec![b]);
        h.nodes[0].defn.insert(Symbol::new("g2"), 1);
        let diags = h.validate();
        assert!(diags
            .iter()
            .any(|d| d.condition == 3 && d.message.contains("both defined")));
    }

    #[test]
    fn cycle_is_condition_one() {
        let mut h = two_level();
        h.nodes[1].children.push(0);
        let diags = h.validate();
        assert_eq!(diags[0].condition, 1);
    }
}
