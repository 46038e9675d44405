use std::collections::HashMap;

use crate::diagram::{DotDiagram, Sort, Var};
use crate::error::{Error, Result};
use crate::term::{TermId, TermKind, TermStore};

/// Term for the positional permutation whose output `j` is input `perm[j]`.
///
/// Uses odd-even transposition sort: at most `k` layers of adjacent swaps on `k` wires.
pub fn permutation_term(store: &mut TermStore, sorts: &[Sort], perm: &[usize]) -> Result<TermId> {
    let k = sorts.len();
    if perm.len() != k {
        return Err(Error::InvalidInput(format!(
            "permutation of length {} on {k} wires",
            perm.len()
        )));
    }
    // target[i]: output position that input wire i must reach
    let mut target = vec![usize::MAX; k];
    for (j, &i) in perm.iter().enumerate() {
        if i >= k || target[i] != usize::MAX {
            return Err(Error::InvalidInput(format!(
                "{perm:?} is not a permutation"
            )));
        }
        target[i] = j;
    }
    let mut cur: Vec<Sort> = sorts.to_vec();
    let mut layers = Vec::new();
    let mut round = 0;
    while target.windows(2).any(|w| w[0] > w[1]) {
        let mut items = Vec::new();
        let mut run: Vec<Sort> = Vec::new();
        let mut swapped = false;
        let mut pos = 0;
        while pos < k {
            if pos % 2 == round % 2 && pos + 1 < k && target[pos] > target[pos + 1] {
                if !run.is_empty() {
                    items.push(store.id(&run));
                    run.clear();
                }
                items.push(store.swap(&cur[pos..pos + 1], &cur[pos + 1..pos + 2]));
                target.swap(pos, pos + 1);
                cur.swap(pos, pos + 1);
                swapped = true;
                pos += 2;
            } else {
                run.push(cur[pos].clone());
                pos += 1;
            }
        }
        if !run.is_empty() {
            items.push(store.id(&run));
        }
        if swapped {
            layers.push(store.par_all(&items));
        }
        round += 1;
    }
    if layers.is_empty() {
        return Ok(store.id(sorts));
    }
    store.seq_chain(&layers)
}

/// Algebraises a permutation-type diagram: no assignments, duplicate-free
/// interfaces over the same variables.
pub fn algebrise_permutation(store: &mut TermStore, sigma: &DotDiagram) -> Result<TermId> {
    let perm = permutation_of(sigma)?;
    permutation_term(store, &sigma.input_sorts(), &perm)
}

fn permutation_of(sigma: &DotDiagram) -> Result<Vec<usize>> {
    let not_perm = || Error::Precondition("diagram is not of permutation type".into());
    if !sigma.is_pure_wiring() || sigma.inputs().len() != sigma.outputs().len() {
        return Err(not_perm());
    }
    let pos: HashMap<Var, usize> = sigma
        .inputs()
        .iter()
        .enumerate()
        .map(|(i, v)| (*v, i))
        .collect();
    if pos.len() != sigma.inputs().len() {
        return Err(not_perm());
    }
    let perm: Vec<usize> = sigma
        .outputs()
        .iter()
        .map(|v| pos.get(v).copied().ok_or_else(not_perm))
        .collect::<Result<_>>()?;
    let mut seen = vec![false; perm.len()];
    for &i in &perm {
        if std::mem::replace(&mut seen[i], true) {
            return Err(not_perm());
        }
    }
    Ok(perm)
}

/// The five factors of a pure wiring, listed in execution order.
///
/// `equate` merges repeated inputs and deletes variables that never reach the
/// output; `copy` duplicates to the required multiplicities and creates the
/// output-only variables. `sigma2` is always an identity.
#[derive(Clone, Debug)]
pub struct PureWiringFactors {
    pub sigma1: DotDiagram,
    pub equate: DotDiagram,
    pub sigma2: DotDiagram,
    pub copy: DotDiagram,
    pub sigma3: DotDiagram,
}

impl PureWiringFactors {
    pub fn in_order(&self) -> [&DotDiagram; 5] {
        [
            &self.sigma1,
            &self.equate,
            &self.sigma2,
            &self.copy,
            &self.sigma3,
        ]
    }
}

struct WiringPlan {
    /// Sorted position `j` holds input position `sort_in[j]`.
    sort_in: Vec<usize>,
    /// Output position `j` takes sorted position `unsort_out[j]`.
    unsort_out: Vec<usize>,
    sorted_in: Vec<Var>,
    sorted_out: Vec<Var>,
    kept: Vec<Var>,
    /// Distinct input variables with their multiplicities, ascending.
    in_mult: Vec<(Var, usize)>,
    out_mult: Vec<(Var, usize)>,
}

fn multiplicities(sorted: &[Var]) -> Vec<(Var, usize)> {
    let mut out: Vec<(Var, usize)> = Vec::new();
    for &v in sorted {
        match out.last_mut() {
            Some((w, n)) if *w == v => *n += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

impl WiringPlan {
    fn new(w: &DotDiagram) -> Result<Self> {
        if !w.is_pure_wiring() {
            return Err(Error::Precondition("diagram has assignments".into()));
        }
        let (ins, outs) = (w.inputs(), w.outputs());
        let mut sort_in: Vec<usize> = (0..ins.len()).collect();
        sort_in.sort_by_key(|&i| ins[i]);
        let mut sort_out: Vec<usize> = (0..outs.len()).collect();
        sort_out.sort_by_key(|&i| outs[i]);
        let mut unsort_out = vec![0; outs.len()];
        for (j, &i) in sort_out.iter().enumerate() {
            unsort_out[i] = j;
        }
        let sorted_in: Vec<Var> = sort_in.iter().map(|&i| ins[i]).collect();
        let sorted_out: Vec<Var> = sort_out.iter().map(|&i| outs[i]).collect();
        let in_mult = multiplicities(&sorted_in);
        let out_mult = multiplicities(&sorted_out);
        let kept = in_mult
            .iter()
            .map(|p| p.0)
            .filter(|v| out_mult.binary_search_by_key(v, |p| p.0).is_ok())
            .collect();
        Ok(WiringPlan {
            sort_in,
            unsort_out,
            sorted_in,
            sorted_out,
            kept,
            in_mult,
            out_mult,
        })
    }
}

/// Splits a pure wiring `w` into `sigma3 ∘ copy ∘ sigma2 ∘ equate ∘ sigma1`.
pub fn decompose_pure_wiring(w: &DotDiagram) -> Result<PureWiringFactors> {
    let plan = WiringPlan::new(w)?;
    let positional = |sorts: Vec<Sort>, perm: &[usize]| {
        let outs = perm.iter().map(|&i| Var::from_index(i)).collect();
        DotDiagram::wiring(sorts, (0..perm.len()).map(Var::from_index).collect(), outs)
    };
    let sigma1 = positional(w.input_sorts(), &plan.sort_in)?;
    let sigma3 = positional(w.sorts_of(&plan.sorted_out), &plan.unsort_out)?;
    let equate = DotDiagram::from_used(w.sorts(), Vec::new(), &plan.sorted_in, &plan.kept)?;
    let copy = DotDiagram::from_used(w.sorts(), Vec::new(), &plan.kept, &plan.sorted_out)?;
    let sigma2 = DotDiagram::identity(&w.sorts_of(&plan.kept));
    Ok(PureWiringFactors {
        sigma1,
        equate,
        sigma2,
        copy,
        sigma3,
    })
}

/// `S^r -> S`, merging `r >= 1` wires.
fn equate_chain(store: &mut TermStore, s: &Sort, r: usize) -> Result<TermId> {
    let one = std::slice::from_ref(s);
    let mut acc = store.id(one);
    for i in 1..r {
        let eq = store.equate(one);
        acc = if i == 1 {
            eq
        } else {
            let id = store.id(one);
            let p = store.par(acc, id);
            store.seq(eq, p)?
        };
    }
    Ok(acc)
}

/// `S -> S^m`, duplicating one wire `m >= 1` times.
fn copy_chain(store: &mut TermStore, s: &Sort, m: usize) -> Result<TermId> {
    let one = std::slice::from_ref(s);
    let mut acc = store.id(one);
    for i in 1..m {
        let cp = store.copy(one);
        acc = if i == 1 {
            cp
        } else {
            let id = store.id(one);
            let p = store.par(acc, id);
            store.seq(p, cp)?
        };
    }
    Ok(acc)
}

/// Algebraises a pure wiring; every layer has width at most `2·max(|in|, |out|)`.
pub fn algebrise_pure_wiring(store: &mut TermStore, w: &DotDiagram) -> Result<TermId> {
    let plan = WiringPlan::new(w)?;
    let mut items = Vec::new();
    for &(v, r) in &plan.in_mult {
        let s = w.sort_of(v);
        let mut t = equate_chain(store, s, r)?;
        if !plan.kept.contains(&v) {
            let d = store.del(std::slice::from_ref(s));
            t = then(store, Some(t), d)?;
        }
        items.push(t);
    }
    let equate = tensor_merging_ids(store, &items);
    items.clear();
    for &(v, m) in &plan.out_mult {
        let s = w.sort_of(v);
        let mut t = copy_chain(store, s, m)?;
        if !plan.kept.contains(&v) {
            let n = store.new_(std::slice::from_ref(s));
            t = then(store, Some(n), t)?;
        }
        items.push(t);
    }
    let copy = tensor_merging_ids(store, &items);
    let sigma1 = permutation_term(store, &w.input_sorts(), &plan.sort_in)?;
    let sigma3 = permutation_term(store, &w.sorts_of(&plan.sorted_out), &plan.unsort_out)?;
    let chain: Vec<TermId> = [sigma1, equate, copy, sigma3]
        .into_iter()
        .filter(|&t| !matches!(store.kind(t), TermKind::Id(_)))
        .collect();
    if chain.is_empty() {
        return Ok(store.id(&w.input_sorts()));
    }
    store.seq_chain(&chain)
}

/// `second ∘ first`, dropping identities; `None` stands for nothing yet.
pub(crate) fn then(store: &mut TermStore, first: Option<TermId>, second: TermId) -> Result<TermId> {
    let Some(first) = first else {
        return Ok(second);
    };
    if matches!(store.kind(second), TermKind::Id(_)) {
        return Ok(first);
    }
    if matches!(store.kind(first), TermKind::Id(_)) {
        return Ok(second);
    }
    store.seq(second, first)
}

/// Tensor of `items` where adjacent identities are fused into one.
pub(crate) fn tensor_merging_ids(store: &mut TermStore, items: &[TermId]) -> TermId {
    let mut out = Vec::new();
    let mut run: Vec<Sort> = Vec::new();
    for &t in items {
        if let TermKind::Id(s) = store.kind(t) {
            run.extend(s.iter().cloned());
            continue;
        }
        if !run.is_empty() {
            out.push(store.id(&run));
            run.clear();
        }
        out.push(t);
    }
    if !run.is_empty() || out.is_empty() {
        out.push(store.id(&run));
    }
    store.par_all(&out)
}
