use super::wiring::{algebrise_pure_wiring, then};
use crate::diagram::{DotDiagram, Var};
use crate::error::Result;
use crate::term::{TermId, TermStore};

/// Algebraises `f` by applying its assignments one after another, carrying
/// along only the variables that a later assignment or the output still needs.
///
/// Between two assignments sits a pure wiring from the current wire list to
/// `inputs ++ carried`; the assignment itself is tensored with an identity on
/// the carried wires.
pub fn algebrise_sweep(store: &mut TermStore, f: &DotDiagram) -> Result<TermId> {
    if f.is_pure_wiring() {
        return algebrise_pure_wiring(store, f);
    }
    let n = f.assignments().len();
    // later[i][v]: v occurs in an assignment after i or in the output list
    let mut later = vec![vec![false; f.num_vars()]; n];
    let mut acc = vec![false; f.num_vars()];
    for v in f.outputs() {
        acc[v.index()] = true;
    }
    for i in (0..n).rev() {
        later[i] = acc.clone();
        for v in f.assignments()[i].vars() {
            acc[v.index()] = true;
        }
    }

    let mut live: Vec<Var> = f.inputs().to_vec();
    let mut term: Option<TermId> = None;
    for (i, a) in f.assignments().iter().enumerate() {
        let mut carry: Vec<Var> = Vec::new();
        for &v in live.iter().chain(&a.inputs) {
            let needed = later[i][v.index()] || a.outputs.contains(&v);
            if needed && !carry.contains(&v) {
                carry.push(v);
            }
        }
        let targets: Vec<Var> = a.inputs.iter().chain(&carry).copied().collect();
        let wiring = DotDiagram::from_used(f.sorts(), Vec::new(), &live, &targets)?;
        let w = algebrise_pure_wiring(store, &wiring)?;
        let g = store.symbol(a.symbol.clone(), &f.assignment_type(a))?;
        let id = store.id(&f.sorts_of(&carry));
        let step = if carry.is_empty() {
            g
        } else {
            store.par(g, id)
        };
        let t = then(store, term, w)?;
        term = Some(then(store, Some(t), step)?);
        live = a.outputs.iter().chain(&carry).copied().collect();
    }
    let wiring = DotDiagram::from_used(f.sorts(), Vec::new(), &live, f.outputs())?;
    let w = algebrise_pure_wiring(store, &wiring)?;
    then(store, term, w)
}
