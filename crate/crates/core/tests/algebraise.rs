mod common;

use common::{diagrams_agree, read_data, term_matches_oracle};
use dotalg::algebraise::{
    algebrise, algebrise_frobenius, algebrise_hierarchical, algebrise_hierarchical_with_report,
    algebrise_permutation, algebrise_pure_wiring, algebrise_small, algebrise_sweep,
    algebrise_with_report, decompose_pure_wiring, frobenius_decompose, permutation_term,
    pipeline_stats, refactor_by_branch_decomposition, AlgebraiseOptions,
};
use dotalg::decomposition::{decompose, TdMode};
use dotalg::diagram::{compose_all, isomorphic, DotDiagram, Sort, Var};
use dotalg::frontend::compile_source;
use dotalg::semiring::{interpret_term, substochastic, EvalOptions, Matrix};
use dotalg::term::{TermKind, TermStore};
use dotalg::testkit::{random_diagram, DiagramParams};
use num_rational::BigRational;
use proptest::prelude::*;

fn vars(ix: &[usize]) -> Vec<Var> {
    ix.iter().map(|&i| Var::from_index(i)).collect()
}

fn all_permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in all_permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

fn count_layers(store: &TermStore, t: dotalg::term::TermId) -> usize {
    match store.kind(t) {
        TermKind::Seq(s, u) => count_layers(store, *s) + count_layers(store, *u),
        _ => 1,
    }
}

#[test]
fn every_permutation_of_four_mixed_wires() {
    let sorts = vec![
        Sort::new("A"),
        Sort::new("B"),
        Sort::new("A"),
        Sort::new("B"),
    ];
    for perm in all_permutations(4) {
        let sigma = DotDiagram::wiring(sorts.clone(), vars(&[0, 1, 2, 3]), vars(&perm)).unwrap();
        let mut store = TermStore::new();
        let t = algebrise_permutation(&mut store, &sigma).unwrap();
        assert!(term_matches_oracle(&store, t, &sigma, 1, 1), "{perm:?}");
        assert!(store.width(t) <= 8);
        assert!(count_layers(&store, t) <= 4, "{perm:?}");
    }
}

#[test]
fn reversal_uses_at_most_k_layers() {
    let a = Sort::new("A");
    for k in 1..=9 {
        let perm: Vec<usize> = (0..k).rev().collect();
        let mut store = TermStore::new();
        let t = permutation_term(&mut store, &vec![a.clone(); k], &perm).unwrap();
        assert!(count_layers(&store, t) <= k);
        assert!(store.width(t) <= 2 * k);
    }
}

#[test]
fn swap_only_permutation_is_single_generator() {
    let a = Sort::new("A");
    let b = Sort::new("B");
    let sigma =
        DotDiagram::wiring(vec![a.clone(), b.clone()], vars(&[0, 1]), vars(&[1, 0])).unwrap();
    let mut store = TermStore::new();
    let t = algebrise_permutation(&mut store, &sigma).unwrap();
    assert!(matches!(store.kind(t), TermKind::Swap(_, _)));
    assert_eq!(store.dag_size(t), 1);
}

#[test]
fn non_permutation_rejected() {
    let a = Sort::new("A");
    let w = DotDiagram::wiring(vec![a.clone()], vars(&[0]), vars(&[0, 0])).unwrap();
    let mut store = TermStore::new();
    assert!(algebrise_permutation(&mut store, &w).is_err());
}

#[test]
fn copy_and_equate_generators() {
    let a = Sort::new("A");
    let copy = DotDiagram::wiring(vec![a.clone()], vars(&[0]), vars(&[0, 0])).unwrap();
    let mut store = TermStore::new();
    let t = algebrise_pure_wiring(&mut store, &copy).unwrap();
    assert!(matches!(store.kind(t), TermKind::Copy(_)));
    let eq = DotDiagram::wiring(vec![a.clone()], vars(&[0, 0]), vars(&[0])).unwrap();
    let t = algebrise_pure_wiring(&mut store, &eq).unwrap();
    assert!(matches!(store.kind(t), TermKind::Equate(_)));
    let del = DotDiagram::wiring(vec![a.clone()], vars(&[0]), vec![]).unwrap();
    let t = algebrise_pure_wiring(&mut store, &del).unwrap();
    assert!(matches!(store.kind(t), TermKind::Del(_)));
    let id = DotDiagram::identity(&[a.clone(), a]);
    let t = algebrise_pure_wiring(&mut store, &id).unwrap();
    assert!(matches!(store.kind(t), TermKind::Id(_)));
}

fn wiring_strategy() -> impl Strategy<Value = DotDiagram> {
    (
        1usize..=4,
        proptest::collection::vec(0usize..4, 0..=5),
        proptest::collection::vec(0usize..4, 0..=5),
        0u8..16,
    )
        .prop_map(|(n, ins, outs, sortbits)| {
            let sorts: Vec<Sort> = (0..4)
                .map(|i| Sort::new(if sortbits >> i & 1 == 1 { "B" } else { "A" }))
                .collect();
            let ins: Vec<Var> = ins.into_iter().map(|i| Var::from_index(i % n)).collect();
            let outs: Vec<Var> = outs.into_iter().map(|i| Var::from_index(i % n)).collect();
            DotDiagram::from_used(&sorts, vec![], &ins, &outs).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pure_wiring_factors_compose_back(w in wiring_strategy()) {
        let fac = decompose_pure_wiring(&w).unwrap();
        // the sorted interfaces of the middle factors
        let sorted = |vs: &[Var]| vs.windows(2).all(|p| p[0] <= p[1]);
        prop_assert!(sorted(fac.equate.inputs()) && sorted(fac.copy.outputs()));
        let mut distinct = fac.equate.outputs().to_vec();
        distinct.dedup();
        prop_assert_eq!(distinct.len(), fac.equate.outputs().len());
        prop_assert!(fac.sigma2.inputs() == fac.sigma2.outputs());
        let composed = compose_all(&fac.in_order()).unwrap();
        prop_assert!(diagrams_agree(&composed, &w, 2, 9));
    }

    #[test]
    fn pure_wiring_term_is_sound_and_narrow(w in wiring_strategy()) {
        let mut store = TermStore::new();
        let t = algebrise_pure_wiring(&mut store, &w).unwrap();
        prop_assert_eq!(store.dom(t), &w.input_sorts()[..]);
        prop_assert_eq!(store.cod(t), &w.output_sorts()[..]);
        prop_assert!(term_matches_oracle(&store, t, &w, 2, 3));
        let k = w.inputs().len().max(w.outputs().len());
        prop_assert!(store.width(t) <= 2 * k, "width {} for k = {}", store.width(t), k);
    }
}

fn small_params() -> DiagramParams {
    DiagramParams {
        max_vars: 6,
        min_assignments: 1,
        max_assignments: 3,
        ..DiagramParams::default()
    }
}

#[test]
fn frobenius_layers_compose_back() {
    for seed in 0..60 {
        let f = random_diagram(seed, &small_params());
        let fd = frobenius_decompose(&f).unwrap();
        let middle = fd.middle_diagram();
        let g = compose_all(&[&fd.w_in, &middle, &fd.w_out]).unwrap();
        assert!(diagrams_agree(&f, &g, 2, seed), "seed {seed}");
    }
}

#[test]
fn frobenius_and_sweep_terms_are_each_sound() {
    let mut checked = 0;
    for seed in 0..40 {
        let f = random_diagram(seed, &small_params());
        let mut store = TermStore::new();
        let a = algebrise_frobenius(&mut store, &f).unwrap();
        let b = algebrise_sweep(&mut store, &f).unwrap();
        // the Frobenius term is often too wide for dense evaluation
        if store.width(a) <= 14 {
            assert!(
                term_matches_oracle(&store, a, &f, 1, seed),
                "frobenius, seed {seed}"
            );
            checked += 1;
        }
        assert!(
            term_matches_oracle(&store, b, &f, 1, seed),
            "sweep, seed {seed}"
        );
    }
    assert!(
        checked >= 10,
        "only {checked} Frobenius terms were narrow enough"
    );
}

#[test]
fn small_algebraisation_is_sound() {
    for seed in 0..60 {
        let f = random_diagram(seed, &small_params());
        let mut store = TermStore::new();
        let t = algebrise_small(&mut store, &f).unwrap();
        assert!(term_matches_oracle(&store, t, &f, 2, seed), "seed {seed}");
        let n = f.assignments().len().max(1);
        assert!(store.width(t) <= 6 * n * f.width().max(1), "seed {seed}");
    }
}

fn larger_params() -> DiagramParams {
    DiagramParams {
        max_vars: 8,
        min_assignments: 3,
        max_assignments: 8,
        max_interface: 3,
        ..DiagramParams::default()
    }
}

#[test]
fn refactoring_unfolds_to_an_isomorphic_diagram() {
    for seed in 0..80 {
        let f = random_diagram(seed, &larger_params());
        let d = decompose(&f, TdMode::Heuristic).unwrap();
        let h = refactor_by_branch_decomposition(&f, &d.branch, "f").unwrap();
        assert!(h.validate().is_empty(), "seed {seed}: {:?}", h.validate());
        for node in &h.nodes {
            assert!(node.body.assignments().len() <= 2);
        }
        assert!(h.nodes.len() < f.assignments().len().max(2));
        let u = h.unfold(10_000).unwrap();
        assert!(isomorphic(&u, &f), "seed {seed}");
    }
}

#[test]
fn two_assignments_refactor_to_themselves() {
    let f = random_diagram(
        5,
        &DiagramParams {
            min_assignments: 2,
            max_assignments: 2,
            ..DiagramParams::default()
        },
    );
    let d = decompose(&f, TdMode::Heuristic).unwrap();
    let h = refactor_by_branch_decomposition(&f, &d.branch, "f").unwrap();
    assert_eq!(h.nodes.len(), 1);
    assert_eq!(h.root_node().body, f);
}

#[test]
fn full_algebraisation_is_sound_and_within_width_bound() {
    for seed in 0..120 {
        let f = random_diagram(seed, &larger_params());
        let mut store = TermStore::new();
        let (t, r) = algebrise_with_report(&mut store, &f, AlgebraiseOptions::default()).unwrap();
        assert!(term_matches_oracle(&store, t, &f, 2, seed), "seed {seed}");
        assert!(
            r.term_width <= 12 * r.branch_width.max(1),
            "seed {seed}: {r:?}"
        );
        assert!(
            store.symbols(t).keys().all(|s| !s.name().contains('~')),
            "placeholders left"
        );
    }
}

#[test]
fn exact_mode_is_sound_too() {
    let opts = AlgebraiseOptions {
        mode: TdMode::Exact,
    };
    for seed in 200..230 {
        let f = random_diagram(seed, &larger_params());
        let mut store = TermStore::new();
        let t = algebrise(&mut store, &f, opts).unwrap();
        assert!(term_matches_oracle(&store, t, &f, 1, seed), "seed {seed}");
    }
}

fn probability_column(m: &Matrix<BigRational>) -> (BigRational, BigRational) {
    assert_eq!((m.rows(), m.cols()), (2, 1));
    (m.get(1, 0).clone(), m.get(0, 0).clone())
}

#[test]
fn has_disease_exact_probabilities() {
    let h = compile_source(&read_data("has_disease.dpp"), Some("hasDisease")).unwrap();
    let mut store = TermStore::new();
    let t = algebrise_hierarchical(&mut store, &h, AlgebraiseOptions::default()).unwrap();
    let interp = substochastic(&h.base).unwrap();
    let m = interpret_term(&store, t, &interp, &EvalOptions::default()).unwrap();
    let (p, q) = probability_column(&m);
    let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    assert_eq!(p, r(99, 100_000_000));
    assert_eq!(q, r(1_959_804, 100_000_000));
}

#[test]
fn f_family_probabilities_and_linear_size() {
    let src = read_data("f_family.dpp");
    let mut sizes = Vec::new();
    for n in 0..=8u32 {
        let h = compile_source(&src, Some(&format!("f_{n}"))).unwrap();
        let mut store = TermStore::new();
        let t = algebrise_hierarchical(&mut store, &h, AlgebraiseOptions::default()).unwrap();
        sizes.push(store.dag_size(t));
        if n <= 4 {
            let m = interpret_term(
                &store,
                t,
                &substochastic(&h.base).unwrap(),
                &EvalOptions::default(),
            )
            .unwrap();
            let (p, _) = probability_column(&m);
            let want = BigRational::new(1.into(), num_bigint::BigInt::from(4).pow(2u32.pow(n)));
            assert_eq!(p, want, "n = {n}");
        }
    }
    let diffs: Vec<i64> = sizes
        .windows(2)
        .skip(1)
        .map(|w| w[1] as i64 - w[0] as i64)
        .collect();
    assert!(
        diffs.windows(2).all(|d| (d[0] - d[1]).abs() <= 1),
        "sizes {sizes:?}"
    );
}

#[test]
fn has_disease_shape_parameters() {
    let h = compile_source(&read_data("has_disease.dpp"), Some("hasDisease")).unwrap();
    let s = pipeline_stats(&h, TdMode::Exact).unwrap();
    assert_eq!(s.m, 2);
    assert_eq!(s.n, 7);
    let mut store = TermStore::new();
    let (_, reports) =
        algebrise_hierarchical_with_report(&mut store, &h, AlgebraiseOptions::default()).unwrap();
    assert_eq!(reports.len(), 2);
}
