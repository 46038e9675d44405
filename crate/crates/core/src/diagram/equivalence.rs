use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dot::{DotDiagram, Var};
use super::signature::{MonoidalSignature, Sort};
use crate::error::{Error, Result};
use crate::semiring::{random_interpretation, PrimeField};
use crate::testkit::oracle_semantics;

/// Randomized semantic equivalence test.
///
/// Each round interprets every sort as a 2-dimensional space and every symbol as a
/// uniformly random matrix over GF(2^61 − 1), then compares brute-force semantics.
/// `false` is definitive; `true` holds up to the identity-testing error.
pub fn equivalent(f: &DotDiagram, g: &DotDiagram, trials: usize) -> Result<bool> {
    equivalent_with(f, g, trials, 2, 0x5eed)
}

pub fn equivalent_with(
    f: &DotDiagram,
    g: &DotDiagram,
    trials: usize,
    dim: usize,
    seed: u64,
) -> Result<bool> {
    if f.input_sorts() != g.input_sorts() || f.output_sorts() != g.output_sorts() {
        return Ok(false);
    }
    let mut sig = MonoidalSignature::new();
    for d in [f, g] {
        for (s, ty) in d.used_symbols()? {
            if let Some(prev) = sig.get(&s) {
                if *prev != ty {
                    return Err(Error::InterfaceMismatch(format!(
                        "symbol `{s}` has different types in the two diagrams"
                    )));
                }
            }
            sig.symbols.insert(s, ty);
        }
        sig.sorts.extend(d.sorts().iter().cloned());
    }
    let dims: BTreeMap<Sort, usize> = sig.sorts.iter().map(|s| (s.clone(), dim)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let interp = random_interpretation::<PrimeField, _>(&sig, &dims, &mut rng)?;
        if oracle_semantics(f, &interp)? != oracle_semantics(g, &interp)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact check for a sort-preserving variable bijection that maps interfaces onto
/// interfaces and the assignment multiset onto the assignment multiset.
pub fn isomorphic(f: &DotDiagram, g: &DotDiagram) -> bool {
    if f.num_vars() != g.num_vars()
        || f.assignments().len() != g.assignments().len()
        || f.inputs().len() != g.inputs().len()
        || f.outputs().len() != g.outputs().len()
    {
        return false;
    }
    let mut m = Matching::new(f.num_vars());
    for (x, y) in f
        .inputs()
        .iter()
        .zip(g.inputs())
        .chain(f.outputs().iter().zip(g.outputs()))
    {
        if f.sort_of(*x) != g.sort_of(*y) || !m.bind(*x, *y) {
            return false;
        }
    }
    let mut used = vec![false; g.assignments().len()];
    if !match_assignments(f, g, 0, &mut used, &mut m) {
        return false;
    }
    // Any variable left unbound must still be paired up; unbound ones exist only
    // if they never occur, which the diagram invariant rules out.
    let bound: BTreeSet<Var> = m.fwd.iter().flatten().copied().collect();
    bound.len() == f.num_vars()
}

struct Matching {
    fwd: Vec<Option<Var>>,
    back: BTreeMap<Var, Var>,
    trail: Vec<Var>,
}

impl Matching {
    fn new(n: usize) -> Self {
        Matching {
            fwd: vec![None; n],
            back: BTreeMap::new(),
            trail: Vec::new(),
        }
    }

    fn bind(&mut self, x: Var, y: Var) -> bool {
        match (self.fwd[x.index()], self.back.get(&y)) {
            (Some(y0), _) => y0 == y,
            (None, Some(_)) => false,
            (None, None) => {
                self.fwd[x.index()] = Some(y);
                self.back.insert(y, x);
                self.trail.push(x);
                true
            }
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let x = self.trail.pop().expect("non-empty");
            if let Some(y) = self.fwd[x.index()].take() {
                self.back.remove(&y);
            }
        }
    }
}

fn match_assignments(
    f: &DotDiagram,
    g: &DotDiagram,
    i: usize,
    used: &mut [bool],
    m: &mut Matching,
) -> bool {
    let Some(a) = f.assignments().get(i) else {
        return true;
    };
    for (j, b) in g.assignments().iter().enumerate() {
        if used[j]
            || a.symbol != b.symbol
            || a.inputs.len() != b.inputs.len()
            || a.outputs.len() != b.outputs.len()
        {
            continue;
        }
        let mark = m.trail.len();
        let ok = a
            .inputs
            .iter()
            .zip(&b.inputs)
            .chain(a.outputs.iter().zip(&b.outputs))
            .all(|(x, y)| f.sort_of(*x) == g.sort_of(*y) && m.bind(*x, *y));
        if ok {
            used[j] = true;
            if match_assignments(f, g, i + 1, used, m) {
                return true;
            }
            used[j] = false;
        }
        m.undo_to(mark);
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{compose, Assignment, Symbol, SymbolType};

    fn b() -> Sort {
        Sort::new("B")
    }

    fn binary(name: &str) -> DotDiagram {
        DotDiagram::symbol(
            Symbol::new(name),
            &SymbolType::new(vec![b(), b()], vec![b()]),
        )
    }

    #[test]
    fn renaming_is_equivalent_and_isomorphic() {
        let f = binary("and");
        let g = f.rename(&[Var(2), Var(0), Var(1)]).unwrap();
        assert!(isomorphic(&f, &g));
        assert!(equivalent(&f, &g, 3).unwrap());
    }

    #[test]
    fn and_differs_from_or() {
        assert!(!equivalent(&binary("and"), &binary("or"), 3).unwrap());
        assert!(!isomorphic(&binary("and"), &binary("or")));
    }

    #[test]
    fn unit_law() {
        let f = binary("and");
        let id = DotDiagram::identity(&[b()]);
        let g = compose(&id, &f).unwrap();
        assert!(equivalent(&g, &f, 3).unwrap());
    }

    #[test]
    fn argument_order_matters() {
        let f = binary("g");
        let swapped = DotDiagram::new(
            vec![b(), b(), b()],
            vec![Assignment::new(
                vec![Var(2)],
                Symbol::new("g"),
                vec![Var(1), Var(0)],
            )],
            vec![Var(0), Var(1)],
            vec![Var(2)],
        )
        .unwrap();
        assert!(!isomorphic(&f, &swapped));
        assert!(!equivalent(&f, &swapped, 3).unwrap());
    }

    #[test]
    fn multiplicity_is_preserved() {
        let one = DotDiagram::new(
            vec![b()],
            vec![Assignment::new(vec![], Symbol::new("obs"), vec![Var(0)])],
            vec![Var(0)],
            vec![],
        )
        .unwrap();
        let two = DotDiagram::new(
            vec![b()],
            vec![
                Assignment::new(vec![], Symbol::new("obs"), vec![Var(0)]),
                Assignment::new(vec![], Symbol::new("obs"), vec![Var(0)]),
            ],
            vec![Var(0)],
            vec![],
        )
        .unwrap();
        assert!(!isomorphic(&one, &two));
        assert!(!equivalent(&one, &two, 3).unwrap());
    }
}
