use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::signature::{MonoidalSignature, Sort, Symbol, SymbolType};
use crate::error::{Error, Result};

/// A variable ("dot"), scoped to one diagram.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Var(pub u32);

impl Var {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Self {
        Var(i as u32)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// `let outputs = symbol(inputs)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment {
    #[serde(rename = "outs")]
    pub outputs: Vec<Var>,
    #[serde(rename = "sym")]
    pub symbol: Symbol,
    #[serde(rename = "ins")]
    pub inputs: Vec<Var>,
}

impl Assignment {
    pub fn new(outputs: Vec<Var>, symbol: Symbol, inputs: Vec<Var>) -> Self {
        Assignment {
            outputs,
            symbol,
            inputs,
        }
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.inputs.iter().chain(&self.outputs).copied()
    }
}

/// A straight-line program over a monoidal signature: variables with sorts, an
/// ordered assignment list, and ordered input/output lists (duplicates allowed).
///
/// Variables are the dense range `0..num_vars()`. Every variable occurs in the
/// interface or in some assignment.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DotDiagramRepr", into = "DotDiagramRepr")]
pub struct DotDiagram {
    sorts: Vec<Sort>,
    assignments: Vec<Assignment>,
    inputs: Vec<Var>,
    outputs: Vec<Var>,
}

#[derive(Serialize, Deserialize)]
struct DotDiagramRepr {
    vars: Vec<Sort>,
    assignments: Vec<Assignment>,
    inputs: Vec<Var>,
    outputs: Vec<Var>,
}

impl TryFrom<DotDiagramRepr> for DotDiagram {
    type Error = Error;

    fn try_from(r: DotDiagramRepr) -> Result<Self> {
        DotDiagram::new(r.vars, r.assignments, r.inputs, r.outputs)
    }
}

impl From<DotDiagram> for DotDiagramRepr {
    fn from(d: DotDiagram) -> Self {
        DotDiagramRepr {
            vars: d.sorts,
            assignments: d.assignments,
            inputs: d.inputs,
            outputs: d.outputs,
        }
    }
}

impl DotDiagram {
    /// Builds a diagram, checking that every id is in range and every variable is used.
    pub fn new(
        sorts: Vec<Sort>,
        assignments: Vec<Assignment>,
        inputs: Vec<Var>,
        outputs: Vec<Var>,
    ) -> Result<Self> {
        let d = DotDiagram {
            sorts,
            assignments,
            inputs,
            outputs,
        };
        d.check_structure()?;
        Ok(d)
    }

    /// Like [`DotDiagram::new`], but variables of `sorts` that are never mentioned
    /// are dropped and the rest renumbered in order of first use (inputs,
    /// assignments, outputs).
    pub fn from_used(
        sorts: &[Sort],
        assignments: Vec<Assignment>,
        inputs: &[Var],
        outputs: &[Var],
    ) -> Result<Self> {
        if let Some(v) = inputs
            .iter()
            .chain(outputs)
            .chain(
                assignments
                    .iter()
                    .flat_map(|a| a.inputs.iter().chain(&a.outputs)),
            )
            .find(|v| v.index() >= sorts.len())
        {
            return Err(Error::InvalidInput(format!(
                "variable {} out of range for {} sorts",
                v.0,
                sorts.len()
            )));
        }
        let mut map: HashMap<Var, Var> = HashMap::new();
        let mut local_sorts = Vec::new();
        let mut local = |v: Var| {
            *map.entry(v).or_insert_with(|| {
                local_sorts.push(sorts[v.index()].clone());
                Var::from_index(local_sorts.len() - 1)
            })
        };
        let ins: Vec<Var> = inputs.iter().map(|&v| local(v)).collect();
        let assignments: Vec<Assignment> = assignments
            .into_iter()
            .map(|a| {
                let i = a.inputs.iter().map(|&v| local(v)).collect();
                let o = a.outputs.iter().map(|&v| local(v)).collect();
                Assignment::new(o, a.symbol, i)
            })
            .collect();
        let outs: Vec<Var> = outputs.iter().map(|&v| local(v)).collect();
        DotDiagram::new(local_sorts, assignments, ins, outs)
    }

    /// The empty diagram `() -> ()`, unit of the tensor product.
    pub fn empty() -> Self {
        DotDiagram {
            sorts: Vec::new(),
            assignments: Vec::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// `⟨f⟩`: a single assignment with fresh distinct variables.
    pub fn symbol(symbol: Symbol, ty: &SymbolType) -> Self {
        let n_in = ty.dom.len();
        let mut sorts = ty.dom.clone();
        sorts.extend(ty.cod.iter().cloned());
        let inputs: Vec<Var> = (0..n_in).map(Var::from_index).collect();
        let outputs: Vec<Var> = (n_in..sorts.len()).map(Var::from_index).collect();
        DotDiagram {
            sorts,
            assignments: vec![Assignment::new(outputs.clone(), symbol, inputs.clone())],
            inputs,
            outputs,
        }
    }

    /// Identity wiring on a sort list.
    pub fn identity(sorts: &[Sort]) -> Self {
        let vars: Vec<Var> = (0..sorts.len()).map(Var::from_index).collect();
        DotDiagram {
            sorts: sorts.to_vec(),
            assignments: Vec::new(),
            inputs: vars.clone(),
            outputs: vars,
        }
    }

    /// Pure wiring given by explicit interface lists over the given variables.
    pub fn wiring(sorts: Vec<Sort>, inputs: Vec<Var>, outputs: Vec<Var>) -> Result<Self> {
        DotDiagram::new(sorts, Vec::new(), inputs, outputs)
    }

    pub fn num_vars(&self) -> usize {
        self.sorts.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> {
        (0..self.sorts.len()).map(Var::from_index)
    }

    pub fn sort_of(&self, v: Var) -> &Sort {
        &self.sorts[v.index()]
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    pub fn inputs(&self) -> &[Var] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Var] {
        &self.outputs
    }

    pub fn is_pure_wiring(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn sorts_of(&self, vars: &[Var]) -> Vec<Sort> {
        vars.iter().map(|v| self.sort_of(*v).clone()).collect()
    }

    pub fn input_sorts(&self) -> Vec<Sort> {
        self.sorts_of(&self.inputs)
    }

    pub fn output_sorts(&self) -> Vec<Sort> {
        self.sorts_of(&self.outputs)
    }

    /// The type `in-sorts -> out-sorts` of this diagram viewed as a morphism.
    pub fn interface_type(&self) -> SymbolType {
        SymbolType::new(self.input_sorts(), self.output_sorts())
    }

    /// Domain/codomain of the symbol as used by an assignment of this diagram.
    pub fn assignment_type(&self, a: &Assignment) -> SymbolType {
        SymbolType::new(self.sorts_of(&a.inputs), self.sorts_of(&a.outputs))
    }

    /// Symbol types as used by the assignments; conflicting uses are an error.
    pub fn used_symbols(&self) -> Result<BTreeMap<Symbol, SymbolType>> {
        let mut out: BTreeMap<Symbol, SymbolType> = BTreeMap::new();
        for a in &self.assignments {
            let ty = self.assignment_type(a);
            match out.get(&a.symbol) {
                Some(prev) if *prev != ty => {
                    return Err(Error::InterfaceMismatch(format!(
                        "symbol `{}` used with types {:?} and {:?}",
                        a.symbol, prev, ty
                    )))
                }
                Some(_) => {}
                None => {
                    out.insert(a.symbol.clone(), ty);
                }
            }
        }
        Ok(out)
    }

    /// The smallest signature this diagram is well typed over.
    pub fn signature(&self) -> Result<MonoidalSignature> {
        let mut sig = MonoidalSignature::new();
        for s in &self.sorts {
            sig.add_sort(s.clone());
        }
        for (sym, ty) in self.used_symbols()? {
            sig.add_symbol(sym, ty.dom, ty.cod);
        }
        Ok(sig)
    }

    /// The width: maximum number of inputs or outputs over the diagram and its assignments.
    pub fn width(&self) -> usize {
        self.assignments
            .iter()
            .map(|a| a.inputs.len().max(a.outputs.len()))
            .chain([self.inputs.len(), self.outputs.len()])
            .max()
            .unwrap_or(0)
    }

    fn check_structure(&self) -> Result<()> {
        let n = self.sorts.len();
        let mut used = vec![false; n];
        let mut mark = |v: &Var, what: &str| -> Result<()> {
            if v.index() >= n {
                return Err(Error::InvalidInput(format!(
                    "{what} refers to variable {} but the diagram has {n} variables",
                    v.0
                )));
            }
            used[v.index()] = true;
            Ok(())
        };
        for v in &self.inputs {
            mark(v, "input list")?;
        }
        for v in &self.outputs {
            mark(v, "output list")?;
        }
        for (i, a) in self.assignments.iter().enumerate() {
            for v in a.vars() {
                mark(&v, &format!("assignment {i}"))?;
            }
        }
        if let Some(i) = used.iter().position(|u| !u) {
            return Err(Error::InvalidInput(format!(
                "variable {i} is neither an interface variable nor used by an assignment"
            )));
        }
        Ok(())
    }

    /// Checks every assignment against a signature (symbol present, sorts match).
    pub fn check_against(&self, sig: &MonoidalSignature) -> Vec<String> {
        let mut problems = Vec::new();
        for (i, a) in self.assignments.iter().enumerate() {
            match sig.get(&a.symbol) {
                None => problems.push(format!("assignment {i}: unknown symbol `{}`", a.symbol)),
                Some(ty) => {
                    let used = self.assignment_type(a);
                    if used != *ty {
                        problems.push(format!(
                            "assignment {i}: `{}` expects {:?} -> {:?}, used as {:?} -> {:?}",
                            a.symbol, ty.dom, ty.cod, used.dom, used.cod
                        ));
                    }
                }
            }
        }
        for s in &self.sorts {
            if !sig.sorts.contains(s) {
                problems.push(format!("sort `{s}` is not declared"));
                break;
            }
        }
        problems
    }

    /// Renumbers variables by first occurrence (inputs, then assignments, then outputs).
    pub fn canonicalize(&self) -> DotDiagram {
        let n = self.sorts.len();
        let mut map: Vec<Option<Var>> = vec![None; n];
        let mut next = 0u32;
        let mut sorts = Vec::with_capacity(n);
        let order = self
            .inputs
            .iter()
            .copied()
            .chain(self.assignments.iter().flat_map(|a| a.vars()))
            .chain(self.outputs.iter().copied());
        for v in order {
            if map[v.index()].is_none() {
                map[v.index()] = Some(Var(next));
                sorts.push(self.sorts[v.index()].clone());
                next += 1;
            }
        }
        let f = |v: &Var| map[v.index()].expect("every variable is used");
        DotDiagram {
            sorts,
            assignments: self
                .assignments
                .iter()
                .map(|a| {
                    Assignment::new(
                        a.outputs.iter().map(f).collect(),
                        a.symbol.clone(),
                        a.inputs.iter().map(f).collect(),
                    )
                })
                .collect(),
            inputs: self.inputs.iter().map(f).collect(),
            outputs: self.outputs.iter().map(f).collect(),
        }
    }

    /// Applies an arbitrary variable renaming (must be a bijection onto `0..n`).
    pub fn rename(&self, perm: &[Var]) -> Result<DotDiagram> {
        if perm.len() != self.sorts.len() {
            return Err(Error::InvalidInput("renaming has wrong length".into()));
        }
        let mut sorts = vec![None; perm.len()];
        for (old, new) in perm.iter().enumerate() {
            let slot = sorts
                .get_mut(new.index())
                .ok_or_else(|| Error::InvalidInput("renaming out of range".into()))?;
            if slot.is_some() {
                return Err(Error::InvalidInput("renaming is not injective".into()));
            }
            *slot = Some(self.sorts[old].clone());
        }
        let f = |v: &Var| perm[v.index()];
        Ok(DotDiagram {
            sorts: sorts.into_iter().map(|s| s.expect("bijective")).collect(),
            assignments: self
                .assignments
                .iter()
                .map(|a| {
                    Assignment::new(
                        a.outputs.iter().map(f).collect(),
                        a.symbol.clone(),
                        a.inputs.iter().map(f).collect(),
                    )
                })
                .collect(),
            inputs: self.inputs.iter().map(f).collect(),
            outputs: self.outputs.iter().map(f).collect(),
        })
    }
}

impl fmt::Debug for DotDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        write_vars(f, &self.inputs)?;
        writeln!(f, ") :=")?;
        for a in &self.assignments {
            write!(f, "  let ")?;
            write_vars(f, &a.outputs)?;
            write!(f, " = {}(", a.symbol)?;
            write_vars(f, &a.inputs)?;
            writeln!(f, ");")?;
        }
        write!(f, "  return ")?;
        write_vars(f, &self.outputs)?;
        write!(f, "  [sorts:")?;
        for (i, s) in self.sorts.iter().enumerate() {
            write!(f, " v{i}:{s}")?;
        }
        write!(f, "]")
    }
}

fn write_vars(f: &mut fmt::Formatter<'_>, vars: &[Var]) -> fmt::Result {
    for (i, v) in vars.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{v:?}")?;
    }
    Ok(())
}

/// Union-find over `0..n`.
pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn push(&mut self) -> usize {
        let id = self.parent.len();
        self.parent.push(id);
        id
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[rb.max(ra)] = ra.min(rb);
        }
    }
}

/// Builds a diagram over a disjoint union of variable pools, quotients by the
/// recorded identifications, then renumbers canonically.
pub(crate) struct GluingBuilder {
    sorts: Vec<Sort>,
    uf: UnionFind,
    assignments: Vec<Assignment>,
}

impl GluingBuilder {
    pub(crate) fn new() -> Self {
        GluingBuilder {
            sorts: Vec::new(),
            uf: UnionFind::new(0),
            assignments: Vec::new(),
        }
    }

    /// Adds a copy of `d`'s variables; returns the offset to add to its var ids.
    pub(crate) fn add_vars(&mut self, d: &DotDiagram) -> u32 {
        let offset = self.sorts.len() as u32;
        for s in &d.sorts {
            self.sorts.push(s.clone());
            self.uf.push();
        }
        offset
    }

    pub(crate) fn add_assignments(&mut self, d: &DotDiagram, offset: u32) {
        for a in &d.assignments {
            self.push_assignment(a, offset);
        }
    }

    pub(crate) fn push_assignment(&mut self, a: &Assignment, offset: u32) {
        let shift = |v: &Var| Var(v.0 + offset);
        self.assignments.push(Assignment::new(
            a.outputs.iter().map(shift).collect(),
            a.symbol.clone(),
            a.inputs.iter().map(shift).collect(),
        ));
    }

    pub(crate) fn identify(&mut self, a: Var, b: Var) {
        self.uf.union(a.index(), b.index());
    }

    pub(crate) fn finish(mut self, inputs: Vec<Var>, outputs: Vec<Var>) -> DotDiagram {
        let n = self.sorts.len();
        let reps: Vec<usize> = (0..n).map(|i| self.uf.find(i)).collect();
        let f = |v: &Var| Var::from_index(reps[v.index()]);
        // Representatives keep their original sort; non-representatives vanish
        // during canonicalisation since nothing refers to them.
        let raw = DotDiagram {
            sorts: self.sorts,
            assignments: self
                .assignments
                .iter()
                .map(|a| {
                    Assignment::new(
                        a.outputs.iter().map(f).collect(),
                        a.symbol.clone(),
                        a.inputs.iter().map(f).collect(),
                    )
                })
                .collect(),
            inputs: inputs.iter().map(f).collect(),
            outputs: outputs.iter().map(f).collect(),
        };
        raw.canonicalize()
    }
}

/// Sequential composite `g ∘ f`: glues the i-th output of `f` to the i-th input of `g`.
pub fn compose(g: &DotDiagram, f: &DotDiagram) -> Result<DotDiagram> {
    if f.output_sorts() != g.input_sorts() {
        return Err(Error::InterfaceMismatch(format!(
            "cannot compose: outputs {:?} do not match inputs {:?}",
            f.output_sorts(),
            g.input_sorts()
        )));
    }
    let mut b = GluingBuilder::new();
    let of = b.add_vars(f);
    let og = b.add_vars(g);
    b.add_assignments(f, of);
    b.add_assignments(g, og);
    for (x, y) in f.outputs.iter().zip(&g.inputs) {
        b.identify(Var(x.0 + of), Var(y.0 + og));
    }
    let inputs = f.inputs.iter().map(|v| Var(v.0 + of)).collect();
    let outputs = g.outputs.iter().map(|v| Var(v.0 + og)).collect();
    Ok(b.finish(inputs, outputs))
}

/// Composes a chain given in application order: `chain[0]` runs first.
pub fn compose_all(chain: &[&DotDiagram]) -> Result<DotDiagram> {
    let (first, rest) = chain
        .split_first()
        .ok_or_else(|| Error::InvalidInput("empty composition chain".into()))?;
    let mut acc = (*first).clone();
    for d in rest {
        acc = compose(d, &acc)?;
    }
    Ok(acc)
}

/// Tensor product `f ⊗ g`: disjoint union, interfaces concatenated f-then-g.
pub fn tensor(f: &DotDiagram, g: &DotDiagram) -> DotDiagram {
    let mut b = GluingBuilder::new();
    let of = b.add_vars(f);
    let og = b.add_vars(g);
    b.add_assignments(f, of);
    b.add_assignments(g, og);
    let shift = |o: u32| move |v: &Var| Var(v.0 + o);
    let inputs = f
        .inputs
        .iter()
        .map(shift(of))
        .chain(g.inputs.iter().map(shift(og)))
        .collect();
    let outputs = f
        .outputs
        .iter()
        .map(shift(of))
        .chain(g.outputs.iter().map(shift(og)))
        .collect();
    b.finish(inputs, outputs)
}

/// Replaces every assignment calling a bound symbol by a fresh copy of its
/// replacement, glued along the call site's interface.
pub fn substitute(f: &DotDiagram, bindings: &BTreeMap<Symbol, DotDiagram>) -> Result<DotDiagram> {
    if !f
        .assignments
        .iter()
        .any(|a| bindings.contains_key(&a.symbol))
    {
        return Ok(f.clone());
    }
    for a in &f.assignments {
        if let Some(r) = bindings.get(&a.symbol) {
            let used = f.assignment_type(a);
            if used.dom != r.input_sorts() || used.cod != r.output_sorts() {
                return Err(Error::InterfaceMismatch(format!(
                    "replacement for `{}` has type {:?} -> {:?}, call site expects {:?} -> {:?}",
                    a.symbol,
                    r.input_sorts(),
                    r.output_sorts(),
                    used.dom,
                    used.cod
                )));
            }
        }
    }
    let mut b = GluingBuilder::new();
    let of = b.add_vars(f);
    debug_assert_eq!(of, 0);
    for a in &f.assignments {
        match bindings.get(&a.symbol) {
            None => b.push_assignment(a, 0),
            Some(r) => {
                let or = b.add_vars(r);
                b.add_assignments(r, or);
                for (x, y) in a.inputs.iter().zip(&r.inputs) {
                    b.identify(*x, Var(y.0 + or));
                }
                for (x, y) in a.outputs.iter().zip(&r.outputs) {
                    b.identify(*x, Var(y.0 + or));
                }
            }
        }
    }
    Ok(b.finish(f.inputs.clone(), f.outputs.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b() -> Sort {
        Sort::new("B")
    }

    fn unary(name: &str) -> DotDiagram {
        DotDiagram::symbol(Symbol::new(name), &SymbolType::new(vec![b()], vec![b()]))
    }

    #[test]
    fn compose_with_identity_is_canonical_f() {
        let f = unary("not");
        let id = DotDiagram::identity(&[b()]);
        assert_eq!(compose(&id, &f).unwrap(), f.canonicalize());
        assert_eq!(compose(&f, &id).unwrap(), f.canonicalize());
    }

    #[test]
    fn compose_glues_variables() {
        let n = unary("not");
        let nn = compose(&n, &n).unwrap();
        assert_eq!(nn.num_vars(), 3);
        assert_eq!(nn.assignments().len(), 2);
        assert_eq!(nn.assignments()[0].outputs, nn.assignments()[1].inputs);
    }

    #[test]
    fn compose_rejects_mismatch() {
        let flip = DotDiagram::symbol(Symbol::new("flip"), &SymbolType::new(vec![], vec![b()]));
        assert!(matches!(
            compose(&flip, &flip),
            Err(Error::InterfaceMismatch(_))
        ));
    }

    #[test]
    fn tensor_counts() {
        let t = |p: &str| DotDiagram::symbol(Symbol::new(p), &SymbolType::new(vec![], vec![b()]));
        let d = tensor(&t("flip(1/10)"), &t("flip(3/10)"));
        assert_eq!(d.assignments().len(), 2);
        assert_eq!(d.inputs().len(), 0);
        assert_eq!(d.outputs().len(), 2);
        assert_eq!(
            tensor(&DotDiagram::empty(), &unary("not")),
            unary("not").canonicalize()
        );
    }

    #[test]
    fn substitute_empty_is_identity() {
        let f = unary("not");
        assert_eq!(substitute(&f, &BTreeMap::new()).unwrap(), f);
    }

    #[test]
    fn substitute_rejects_bad_interface() {
        let f = unary("g");
        let mut bind = BTreeMap::new();
        bind.insert(Symbol::new("g"), DotDiagram::identity(&[b(), b()]));
        assert!(matches!(
            substitute(&f, &bind),
            Err(Error::InterfaceMismatch(_))
        ));
    }

    #[test]
    fn unused_variable_rejected() {
        let r = DotDiagram::new(vec![b(), b()], vec![], vec![Var(0)], vec![Var(0)]);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    #[test]
    fn json_shape() {
        let f = unary("not");
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(
            s,
            r#"{"vars":["B","B"],"assignments":[{"outs":[1],"sym":"not","ins":[0]}],"inputs":[0],"outputs":[1]}"#
        );
        let back: DotDiagram = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<DotDiagram>(
            r#"{"vars":["B"],"assignments":[],"inputs":[3],"outputs":[]}"#
        )
        .is_err());
    }
}
