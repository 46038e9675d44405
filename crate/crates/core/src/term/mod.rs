//! Hypergraph terms stored as maximally shared DAGs.

mod json;
mod printer;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::diagram::{compose, tensor, DotDiagram, Sort, Symbol, SymbolType, Var};
use crate::error::{Error, Result};

pub use json::{TermDag, TermDagNode};

/// An interned sort list.
pub type SortList = Arc<[Sort]>;

/// Handle to a node of a [`TermStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TermKind {
    Symbol(Symbol),
    Id(SortList),
    Swap(SortList, SortList),
    Copy(SortList),
    Del(SortList),
    Equate(SortList),
    New(SortList),
    /// `Seq(s, t)` is `s ∘ t`: run `t`, then `s`.
    Seq(TermId, TermId),
    /// `Par(s, t)` is `s ⊗ t`.
    Par(TermId, TermId),
}

impl TermKind {
    pub fn children(&self) -> Option<(TermId, TermId)> {
        match self {
            TermKind::Seq(a, b) | TermKind::Par(a, b) => Some((*a, *b)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TermNode {
    pub kind: TermKind,
    pub dom: SortList,
    pub cod: SortList,
}

/// Interning store for hypergraph terms. Structurally equal terms share one id.
#[derive(Default)]
pub struct TermStore {
    nodes: Vec<TermNode>,
    index: HashMap<TermKind, TermId>,
    sort_lists: HashMap<Vec<Sort>, SortList>,
    fresh: usize,
}

impl TermStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of interned nodes (across all terms built in this store).
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// A symbol name that no earlier call returned, for placeholders that are
    /// substituted away again.
    pub fn fresh_symbol(&mut self, hint: &str) -> Symbol {
        self.fresh += 1;
        Symbol::new(&format!("{hint}~{}", self.fresh))
    }

    pub fn node(&self, t: TermId) -> &TermNode {
        &self.nodes[t.index()]
    }

    pub fn kind(&self, t: TermId) -> &TermKind {
        &self.node(t).kind
    }

    pub fn dom(&self, t: TermId) -> &[Sort] {
        &self.node(t).dom
    }

    pub fn cod(&self, t: TermId) -> &[Sort] {
        &self.node(t).cod
    }

    pub fn sort_list(&mut self, sorts: &[Sort]) -> SortList {
        if let Some(s) = self.sort_lists.get(sorts) {
            return s.clone();
        }
        let list: SortList = Arc::from(sorts);
        self.sort_lists.insert(sorts.to_vec(), list.clone());
        list
    }

    fn intern(&mut self, kind: TermKind, dom: SortList, cod: SortList) -> TermId {
        if let Some(&id) = self.index.get(&kind) {
            return id;
        }
        let id = TermId(u32::try_from(self.nodes.len()).expect("term store overflow"));
        self.nodes.push(TermNode {
            kind: kind.clone(),
            dom,
            cod,
        });
        self.index.insert(kind, id);
        id
    }

    /// A function symbol of the given type.
    ///
    /// Symbols are identified by name; reusing a name at another type is an error.
    pub fn symbol(&mut self, sym: Symbol, ty: &SymbolType) -> Result<TermId> {
        let kind = TermKind::Symbol(sym.clone());
        if let Some(&id) = self.index.get(&kind) {
            let n = self.node(id);
            if *n.dom != ty.dom[..] || *n.cod != ty.cod[..] {
                return Err(Error::InterfaceMismatch(format!(
                    "symbol `{sym}` already interned with a different type"
                )));
            }
            return Ok(id);
        }
        let dom = self.sort_list(&ty.dom);
        let cod = self.sort_list(&ty.cod);
        Ok(self.intern(kind, dom, cod))
    }

    pub fn id(&mut self, sorts: &[Sort]) -> TermId {
        let s = self.sort_list(sorts);
        self.intern(TermKind::Id(s.clone()), s.clone(), s)
    }

    pub fn swap(&mut self, a: &[Sort], b: &[Sort]) -> TermId {
        let (sa, sb) = (self.sort_list(a), self.sort_list(b));
        let dom = self.sort_list(&[a, b].concat());
        let cod = self.sort_list(&[b, a].concat());
        self.intern(TermKind::Swap(sa, sb), dom, cod)
    }

    pub fn copy(&mut self, sorts: &[Sort]) -> TermId {
        let s = self.sort_list(sorts);
        let cod = self.sort_list(&[sorts, sorts].concat());
        self.intern(TermKind::Copy(s.clone()), s, cod)
    }

    pub fn del(&mut self, sorts: &[Sort]) -> TermId {
        let s = self.sort_list(sorts);
        let unit = self.sort_list(&[]);
        self.intern(TermKind::Del(s.clone()), s, unit)
    }

    pub fn equate(&mut self, sorts: &[Sort]) -> TermId {
        let s = self.sort_list(sorts);
        let dom = self.sort_list(&[sorts, sorts].concat());
        self.intern(TermKind::Equate(s.clone()), dom, s)
    }

    pub fn new_(&mut self, sorts: &[Sort]) -> TermId {
        let s = self.sort_list(sorts);
        let unit = self.sort_list(&[]);
        self.intern(TermKind::New(s.clone()), unit, s)
    }

    /// `s ∘ t`.
    pub fn seq(&mut self, s: TermId, t: TermId) -> Result<TermId> {
        if self.dom(s) != self.cod(t) {
            return Err(Error::InterfaceMismatch(format!(
                "cannot compose: {:?} after {:?}",
                self.dom(s),
                self.cod(t)
            )));
        }
        let dom = self.node(t).dom.clone();
        let cod = self.node(s).cod.clone();
        Ok(self.intern(TermKind::Seq(s, t), dom, cod))
    }

    /// `s ⊗ t`.
    pub fn par(&mut self, s: TermId, t: TermId) -> TermId {
        let dom = self.sort_list(&[self.dom(s), self.dom(t)].concat());
        let cod = self.sort_list(&[self.cod(s), self.cod(t)].concat());
        self.intern(TermKind::Par(s, t), dom, cod)
    }

    /// Composes terms given in execution order: `chain[0]` runs first.
    pub fn seq_chain(&mut self, chain: &[TermId]) -> Result<TermId> {
        let (&first, rest) = chain
            .split_first()
            .ok_or_else(|| Error::InvalidInput("empty composition".into()))?;
        let mut acc = first;
        for &t in rest {
            acc = self.seq(t, acc)?;
        }
        Ok(acc)
    }

    /// Left-nested tensor of the given terms; `id_()` when empty.
    pub fn par_all(&mut self, items: &[TermId]) -> TermId {
        match items.split_first() {
            None => self.id(&[]),
            Some((&first, rest)) => rest.iter().fold(first, |acc, &t| self.par(acc, t)),
        }
    }

    /// Nodes reachable from `t`, children before parents.
    pub fn topo_order(&self, t: TermId) -> Vec<TermId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut out = Vec::new();
        let mut stack = vec![(t, false)];
        while let Some((x, expanded)) = stack.pop() {
            if expanded {
                out.push(x);
                continue;
            }
            if seen[x.index()] {
                continue;
            }
            seen[x.index()] = true;
            stack.push((x, true));
            if let Some((a, b)) = self.kind(x).children() {
                if !seen[b.index()] {
                    stack.push((b, false));
                }
                if !seen[a.index()] {
                    stack.push((a, false));
                }
            }
        }
        out
    }

    /// Number of distinct sub-terms.
    pub fn dag_size(&self, t: TermId) -> usize {
        self.topo_order(t).len()
    }

    /// Maximum of `|dom| + |cod|` over all sub-terms.
    pub fn width(&self, t: TermId) -> usize {
        self.topo_order(t)
            .into_iter()
            .map(|x| self.dom(x).len() + self.cod(x).len())
            .max()
            .unwrap_or(0)
    }

    /// Symbols occurring in `t` with their types.
    pub fn symbols(&self, t: TermId) -> BTreeMap<Symbol, SymbolType> {
        let mut out = BTreeMap::new();
        for x in self.topo_order(t) {
            if let TermKind::Symbol(s) = self.kind(x) {
                out.insert(
                    s.clone(),
                    SymbolType::new(self.dom(x).to_vec(), self.cod(x).to_vec()),
                );
            }
        }
        out
    }

    /// Replaces every occurrence of a bound symbol; shared sub-terms stay shared.
    pub fn substitute(&mut self, t: TermId, bindings: &BTreeMap<Symbol, TermId>) -> Result<TermId> {
        if bindings.is_empty() {
            return Ok(t);
        }
        let order = self.topo_order(t);
        let mut image: HashMap<TermId, TermId> = HashMap::with_capacity(order.len());
        for x in order {
            let new = match self.kind(x).clone() {
                TermKind::Symbol(s) => match bindings.get(&s) {
                    Some(&r) => {
                        if self.dom(r) != self.dom(x) || self.cod(r) != self.cod(x) {
                            return Err(Error::InterfaceMismatch(format!(
                                "replacement for `{s}` has type {:?} -> {:?}, expected {:?} -> {:?}",
                                self.dom(r),
                                self.cod(r),
                                self.dom(x),
                                self.cod(x)
                            )));
                        }
                        r
                    }
                    None => x,
                },
                TermKind::Seq(a, b) => {
                    let (na, nb) = (image[&a], image[&b]);
                    if (na, nb) == (a, b) {
                        x
                    } else {
                        self.seq(na, nb)?
                    }
                }
                TermKind::Par(a, b) => {
                    let (na, nb) = (image[&a], image[&b]);
                    if (na, nb) == (a, b) {
                        x
                    } else {
                        self.par(na, nb)
                    }
                }
                _ => x,
            };
            image.insert(x, new);
        }
        Ok(image[&t])
    }

    /// The associated dot diagram.
    pub fn to_dot(&self, t: TermId) -> Result<DotDiagram> {
        let mut memo: HashMap<TermId, DotDiagram> = HashMap::new();
        for x in self.topo_order(t) {
            let d = match self.kind(x) {
                TermKind::Symbol(s) => DotDiagram::symbol(
                    s.clone(),
                    &SymbolType::new(self.dom(x).to_vec(), self.cod(x).to_vec()),
                ),
                TermKind::Id(s) => DotDiagram::identity(s),
                TermKind::Swap(a, b) => {
                    let sorts = [&a[..], &b[..]].concat();
                    let va = var_range(0, a.len());
                    let vb = var_range(a.len(), a.len() + b.len());
                    let inputs = [&va[..], &vb[..]].concat();
                    let outputs = [&vb[..], &va[..]].concat();
                    DotDiagram::wiring(sorts, inputs, outputs)?
                }
                TermKind::Copy(s) => {
                    let v = var_range(0, s.len());
                    DotDiagram::wiring(s.to_vec(), v.clone(), [&v[..], &v[..]].concat())?
                }
                TermKind::Del(s) => DotDiagram::wiring(s.to_vec(), var_range(0, s.len()), vec![])?,
                TermKind::Equate(s) => {
                    let v = var_range(0, s.len());
                    DotDiagram::wiring(s.to_vec(), [&v[..], &v[..]].concat(), v)?
                }
                TermKind::New(s) => DotDiagram::wiring(s.to_vec(), vec![], var_range(0, s.len()))?,
                TermKind::Seq(a, b) => compose(&memo[a], &memo[b])?,
                TermKind::Par(a, b) => tensor(&memo[a], &memo[b]),
            };
            memo.insert(x, d);
        }
        Ok(memo.remove(&t).expect("root visited"))
    }
}

fn var_range(lo: usize, hi: usize) -> Vec<Var> {
    (lo..hi).map(Var::from_index).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::isomorphic;

    fn b() -> Sort {
        Sort::new("B")
    }

    #[test]
    fn single_symbol_sizes() {
        let mut st = TermStore::new();
        let f = st
            .symbol("f".into(), &SymbolType::new(vec![b(), b()], vec![b()]))
            .unwrap();
        assert_eq!(st.dag_size(f), 1);
        assert_eq!(st.width(f), 3);
    }

    #[test]
    fn id_and_par_widths() {
        let mut st = TermStore::new();
        let id = st.id(&[b()]);
        assert_eq!(st.width(id), 2);
        let p = st.par(id, id);
        assert_eq!(st.width(p), 4);
        assert_eq!(st.dag_size(p), 2);
    }

    #[test]
    fn hash_consing_shares() {
        let mut st = TermStore::new();
        let c1 = st.copy(&[b()]);
        let c2 = st.copy(&[b()]);
        assert_eq!(c1, c2);
        let before = st.len();
        let _ = st.par(c1, c2);
        let _ = st.par(c1, c1);
        assert_eq!(st.len(), before + 1);
    }

    #[test]
    fn seq_checks_interfaces() {
        let mut st = TermStore::new();
        let c = st.copy(&[b()]);
        assert!(st.seq(c, c).is_err());
        let e = st.equate(&[b()]);
        assert!(st.seq(e, c).is_ok());
    }

    #[test]
    fn copy_to_dot() {
        let mut st = TermStore::new();
        let c = st.copy(&[b()]);
        let d = st.to_dot(c).unwrap();
        assert_eq!(d.inputs().len(), 1);
        assert_eq!(d.outputs(), &[Var(0), Var(0)]);
        assert!(d.assignments().is_empty());
    }

    #[test]
    fn empty_substitution_is_same_handle() {
        let mut st = TermStore::new();
        let f = st
            .symbol("f".into(), &SymbolType::new(vec![b()], vec![b()]))
            .unwrap();
        let t = st.seq(f, f).unwrap();
        assert_eq!(st.substitute(t, &BTreeMap::new()).unwrap(), t);
    }

    /// Substituting `f ↦ f ∘ swap` into a term that uses `f` twice.
    #[test]
    fn substitution_replaces_every_occurrence() {
        let mut st = TermStore::new();
        let ty2 = SymbolType::new(vec![b(), b()], vec![b()]);
        let f = st.symbol("f".into(), &ty2).unwrap();
        let g = st.symbol("g".into(), &ty2).unwrap();
        let id = st.id(&[b()]);
        let cp = st.copy(&[b()]);
        let l1 = st.par_all(&[id, cp, id]);
        let l2 = st.par(f, g);
        let t = st.seq_chain(&[l1, l2, f]).unwrap();
        let sw = st.swap(&[b()], &[b()]);
        let s = st.seq(f, sw).unwrap();
        let size_t = st.dag_size(t);
        let size_s = st.dag_size(s);

        let r = st
            .substitute(t, &[(Symbol::new("f"), s)].into_iter().collect())
            .unwrap();
        let l2x = st.par(s, g);
        let expected = st.seq_chain(&[l1, l2x, s]).unwrap();
        assert_eq!(r, expected);
        assert!(st.dag_size(r) <= size_t + size_s);

        let dr = st.to_dot(r).unwrap();
        let de = st.to_dot(expected).unwrap();
        assert!(isomorphic(&dr, &de));
    }
}
