#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use dotalg::diagram::{DotDiagram, MonoidalSignature, Sort};
use dotalg::semiring::{interpret_term, random_interpretation, EvalOptions, PrimeField};
use dotalg::term::{TermId, TermStore};
use dotalg::testkit::oracle_semantics;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

pub fn read_data(name: &str) -> String {
    std::fs::read_to_string(data_path(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
}

pub fn signature_of(f: &DotDiagram) -> MonoidalSignature {
    let mut sig = MonoidalSignature::new();
    for s in f.sorts() {
        sig.add_sort(s.clone());
    }
    for (sym, ty) in f.used_symbols().unwrap() {
        sig.add_symbol(sym, ty.dom, ty.cod);
    }
    sig
}

/// Sort `B` gets dimension 3, every other sort dimension 2.
pub fn dims_for(sig: &MonoidalSignature) -> BTreeMap<Sort, usize> {
    sig.sorts
        .iter()
        .map(|s| (s.clone(), if s.name() == "B" { 3 } else { 2 }))
        .collect()
}

/// Evaluation limits for tests, a little above the defaults.
pub fn wide_eval() -> EvalOptions {
    EvalOptions {
        max_entries: 1 << 24,
        ..EvalOptions::default()
    }
}

/// Compares the term's semantics with the brute-force oracle of `f` under
/// `trials` random prime-field interpretations.
pub fn term_matches_oracle(
    store: &TermStore,
    t: TermId,
    f: &DotDiagram,
    trials: usize,
    seed: u64,
) -> bool {
    let sig = signature_of(f);
    let dims = dims_for(&sig);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let interp = random_interpretation::<PrimeField, _>(&sig, &dims, &mut rng).unwrap();
        let want = oracle_semantics(f, &interp).unwrap();
        let got = interpret_term(store, t, &interp, &wide_eval()).unwrap();
        if want != got {
            return false;
        }
    }
    true
}

/// Same comparison between two diagrams.
pub fn diagrams_agree(f: &DotDiagram, g: &DotDiagram, trials: usize, seed: u64) -> bool {
    let mut sig = signature_of(f);
    for (s, ty) in signature_of(g).symbols {
        sig.symbols.insert(s, ty);
    }
    sig.sorts.extend(g.sorts().iter().cloned());
    let dims = dims_for(&sig);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).all(|_| {
        let interp = random_interpretation::<PrimeField, _>(&sig, &dims, &mut rng).unwrap();
        oracle_semantics(f, &interp).unwrap() == oracle_semantics(g, &interp).unwrap()
    })
}
