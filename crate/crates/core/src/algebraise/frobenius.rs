use std::collections::HashSet;

use super::sweep::algebrise_sweep;
use super::wiring::{algebrise_pure_wiring, tensor_merging_ids};
use crate::diagram::{tensor, Assignment, DotDiagram, Sort, Var};
use crate::error::Result;
use crate::term::{TermId, TermStore};

/// `f ≡ w_out ∘ middle ∘ w_in` where the middle tensors, for every assignment
/// `ys = g(xs)`, the block `g ⊗ id(sorts xs) ⊗ id(sorts ys)`, followed by an
/// identity on the bypass variables.
///
/// `w_in` maps `in_f` to `xs xs ys` per assignment (then the bypass variables);
/// `w_out` maps `ys xs ys` per assignment (then the bypass variables) to `out_f`.
#[derive(Clone, Debug)]
pub struct FrobeniusDecomposition {
    pub w_in: DotDiagram,
    pub middle: Vec<Assignment>,
    /// Variables of `f` that occur in both interfaces but in no assignment.
    pub bypass: Vec<Var>,
    pub w_out: DotDiagram,
    sorts: Vec<Sort>,
}

impl FrobeniusDecomposition {
    /// The middle layer as a diagram of its own.
    pub fn middle_diagram(&self) -> DotDiagram {
        let sorts_of = |vs: &[Var]| {
            vs.iter()
                .map(|v| self.sorts[v.index()].clone())
                .collect::<Vec<_>>()
        };
        let mut acc = DotDiagram::empty();
        for a in &self.middle {
            let (s, t) = (sorts_of(&a.inputs), sorts_of(&a.outputs));
            let ty = crate::diagram::SymbolType::new(s.clone(), t.clone());
            let block = tensor(
                &tensor(
                    &DotDiagram::symbol(a.symbol.clone(), &ty),
                    &DotDiagram::identity(&s),
                ),
                &DotDiagram::identity(&t),
            );
            acc = tensor(&acc, &block);
        }
        tensor(&acc, &DotDiagram::identity(&sorts_of(&self.bypass)))
    }
}

pub fn frobenius_decompose(f: &DotDiagram) -> Result<FrobeniusDecomposition> {
    let in_assignment: HashSet<Var> = f.assignments().iter().flat_map(|a| a.vars()).collect();
    let outs: HashSet<Var> = f.outputs().iter().copied().collect();
    let mut bypass: Vec<Var> = Vec::new();
    for &v in f.inputs() {
        if outs.contains(&v) && !in_assignment.contains(&v) && !bypass.contains(&v) {
            bypass.push(v);
        }
    }
    let mut mid_in = Vec::new();
    let mut mid_out = Vec::new();
    for a in f.assignments() {
        mid_in.extend(a.inputs.iter().chain(&a.inputs).chain(&a.outputs));
        mid_out.extend(a.outputs.iter().chain(&a.inputs).chain(&a.outputs));
    }
    mid_in.extend(&bypass);
    mid_out.extend(&bypass);
    Ok(FrobeniusDecomposition {
        w_in: DotDiagram::from_used(f.sorts(), Vec::new(), f.inputs(), &mid_in)?,
        middle: f.assignments().to_vec(),
        w_out: DotDiagram::from_used(f.sorts(), Vec::new(), &mid_out, f.outputs())?,
        bypass,
        sorts: f.sorts().to_vec(),
    })
}

/// Algebraises a diagram without decomposing it: builds the Frobenius term and
/// the sweep term and keeps the narrower one (the smaller on a tie).
///
/// The Frobenius term alone has width at most `6·n·w` for `n` assignments and
/// diagram width `w`, so this is meant for small diagrams.
pub fn algebrise_small(store: &mut TermStore, f: &DotDiagram) -> Result<TermId> {
    let a = algebrise_frobenius(store, f)?;
    let b = algebrise_sweep(store, f)?;
    let key = |t: TermId| (store.width(t), store.dag_size(t));
    Ok(if key(b) < key(a) { b } else { a })
}

/// The term `w_out ∘ middle ∘ w_in` of the Frobenius decomposition, with the
/// two wirings algebraised layer by layer.
pub fn algebrise_frobenius(store: &mut TermStore, f: &DotDiagram) -> Result<TermId> {
    if f.is_pure_wiring() {
        return algebrise_pure_wiring(store, f);
    }
    let fd = frobenius_decompose(f)?;
    let mut items = Vec::new();
    for a in &fd.middle {
        let ty = f.assignment_type(a);
        items.push(store.symbol(a.symbol.clone(), &ty)?);
        items.push(store.id(&ty.dom));
        items.push(store.id(&ty.cod));
    }
    items.push(store.id(&f.sorts_of(&fd.bypass)));
    let middle = tensor_merging_ids(store, &items);
    let w_in = algebrise_pure_wiring(store, &fd.w_in)?;
    let w_out = algebrise_pure_wiring(store, &fd.w_out)?;
    store.seq_chain(&[w_in, middle, w_out])
}
