//! End-to-end acceptance checks. Prints one `PASS`/`FAIL` line per criterion
//! and exits nonzero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::{data_path, dims_for, read_data, signature_of};
use dotalg::algebraise::{algebrise_hierarchical_with_report, AlgebraiseOptions};
use dotalg::apps::{
    attack_brute_force, attack_min_cost, evaluate_query, naive_join, parse_query,
    random_attack_tree,
};
use dotalg::decomposition::{
    primal_graph, tree_decomposition, tree_to_branch, validate_branch_decomposition,
    validate_tree_decomposition, Hypergraph, SimpleGraph, TdMode,
};
use dotalg::diagram::{DotDiagram, HierarchicalDotDiagram, MonoidalSignature, Sort};
use dotalg::frontend::compile_source;
use dotalg::inference::{exact_inference, infer, truncated_eval, InferOptions, InferenceMethod};
use dotalg::semiring::{
    interpret_term, random_interpretation, substochastic, ArithmeticCircuit, CircuitNode,
    EvalOptions, PrimeField, Rational, Semiring, Tropical,
};
use dotalg::term::TermStore;
use dotalg::testkit::{
    oracle_semantics, parse_seed_corpus, random_diagram, random_instance, random_program,
    DiagramParams, ProgramParams, SeedCase,
};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

fn pow2(e: i64) -> Rational {
    if e >= 0 {
        Rational::from_integer(BigInt::one() << e as usize)
    } else {
        Rational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

// ---------------------------------------------------------------- criterion 1

fn corpus_diagram_params() -> DiagramParams {
    DiagramParams {
        max_vars: 9,
        min_assignments: 2,
        max_assignments: 8,
        max_interface: 3,
        ..DiagramParams::default()
    }
}

/// A corpus entry as a hierarchy plus the dimension of each sort.
fn corpus_instance(case: SeedCase) -> (HierarchicalDotDiagram, BTreeMap<Sort, usize>) {
    match case {
        SeedCase::Diagram(seed) => {
            let f = random_diagram(seed, &corpus_diagram_params());
            let sig = signature_of(&f);
            let dims = dims_for(&sig);
            (HierarchicalDotDiagram::single(sig, "main", f), dims)
        }
        SeedCase::Program(seed) => {
            let h = random_program(seed, &ProgramParams::default());
            let dims = h.base.sorts.iter().map(|s| (s.clone(), 2)).collect();
            (h, dims)
        }
    }
}

fn agrees<R: Semiring>(
    store: &TermStore,
    t: dotalg::term::TermId,
    f: &DotDiagram,
    sig: &MonoidalSignature,
    dims: &BTreeMap<Sort, usize>,
    rng: &mut ChaCha8Rng,
) -> Result<(), String> {
    let interp = random_interpretation::<R, _>(sig, dims, rng).map_err(|e| e.to_string())?;
    let want = oracle_semantics(f, &interp).map_err(|e| e.to_string())?;
    let got =
        interpret_term(store, t, &interp, &EvalOptions::default()).map_err(|e| e.to_string())?;
    ensure(want == got, || format!("{} semantics differ", R::NAME))
}

/// Width and size measurements gathered for criterion 4.
#[derive(Default)]
struct Widths {
    bound_violations: Vec<String>,
    worst_ratio: f64,
    nodes: usize,
}

fn criterion_1(widths: &mut Widths) -> Outcome {
    let start = Instant::now();
    let corpus = parse_seed_corpus(&read_data("seeds.txt")).map_err(|e| e.to_string())?;
    ensure(corpus.len() >= 500, || {
        format!("corpus has {} entries", corpus.len())
    })?;
    let mut max_vars = 0;
    for (i, &case) in corpus.iter().enumerate() {
        let (h, dims) = corpus_instance(case);
        let f = h.unfold(10_000).map_err(|e| e.to_string())?;
        max_vars = max_vars.max(f.num_vars());
        let mut store = TermStore::new();
        let (t, reports) =
            algebrise_hierarchical_with_report(&mut store, &h, AlgebraiseOptions::default())
                .map_err(|e| format!("{case:?}: {e}"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        let ctx = |e: String| format!("{case:?}: {e}");
        agrees::<Rational>(&store, t, &f, &h.base, &dims, &mut rng).map_err(ctx)?;
        agrees::<bool>(&store, t, &f, &h.base, &dims, &mut rng).map_err(ctx)?;
        agrees::<Tropical>(&store, t, &f, &h.base, &dims, &mut rng).map_err(ctx)?;
        agrees::<PrimeField>(&store, t, &f, &h.base, &dims, &mut rng).map_err(ctx)?;
        for (_, r) in reports {
            let bw = r.branch_width.max(1);
            if r.term_width > 12 * bw {
                widths
                    .bound_violations
                    .push(format!("{case:?}: width {} > 12·{bw}", r.term_width));
            }
            let ratio = r.dag_size as f64 / (r.assignments.max(1) * bw * bw) as f64;
            widths.worst_ratio = widths.worst_ratio.max(ratio);
            widths.nodes += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(max_vars <= 12, || {
        format!("an instance unfolds to {max_vars} variables")
    })?;
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{} instances, rational/bool/tropical/prime61 all exact, {:.1}s",
        corpus.len(),
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------- criterion 2

/// Output probability of the diagnostic-test program by summing over its five coins.
fn has_disease_by_enumeration() -> Rational {
    let (prior, tp, fp) = (q(1, 10_000), q(99, 100), q(2, 100));
    let weight = |b: bool, p: &Rational| {
        if b {
            p.clone()
        } else {
            <Rational as One>::one() - p
        }
    };
    let (mut p, mut acc) = (<Rational as Zero>::zero(), <Rational as Zero>::zero());
    for bits in 0u32..32 {
        let b = |i: u32| bits >> i & 1 == 1;
        let (x, tt1, tf1, tt2, tf2) = (b(0), b(1), b(2), b(3), b(4));
        let w = weight(x, &prior)
            * weight(tt1, &tp)
            * weight(tf1, &fp)
            * weight(tt2, &tp)
            * weight(tf2, &fp);
        let t1 = (x && tt1) || (!x && tf1);
        let t2 = (x && tt2) || (!x && tf2);
        if t1 && !t2 {
            acc += &w;
            if x {
                p += &w;
            }
        }
    }
    p / acc
}

fn criterion_2() -> Outcome {
    let exact = has_disease_by_enumeration();
    let closed_form = (q(1, 10_000) * q(99, 100) * q(1, 100))
        / (q(1, 10_000) * q(99, 100) * q(1, 100) + q(9_999, 10_000) * q(2, 100) * q(98, 100));
    ensure(exact == closed_form, || {
        "enumeration disagrees with the closed form".into()
    })?;
    let h = compile_source(&read_data("has_disease.dpp"), Some("hasDisease"))
        .map_err(|e| e.to_string())?;
    let mut shown = String::new();
    for method in [InferenceMethod::Exact, InferenceMethod::Truncated] {
        let opts = InferOptions {
            method,
            ..InferOptions::default()
        };
        let start = Instant::now();
        let r = infer(&h, 30, &opts).map_err(|e| e.to_string())?;
        let elapsed = start.elapsed();
        let err = (r.p_f_approx.to_rational() - &exact).abs();
        ensure(err <= pow2(-31), || {
            format!("{method:?}: error {err} above 2^-31")
        })?;
        ensure(elapsed < Duration::from_secs(1), || {
            format!("{method:?} took {elapsed:?}")
        })?;
        shown = format!(
            "p ≈ {} within 2^-31 of {exact} by exact and truncated evaluation, {:.0}ms",
            r.p_f_approx.to_decimal(12),
            elapsed.as_secs_f64() * 1e3
        );
    }
    Ok(shown)
}

// ---------------------------------------------------------------- criterion 3

fn criterion_3() -> Outcome {
    let src = read_data("f_family.dpp");
    let program = |n: u32| compile_source(&src, Some(&format!("f_{n}"))).map_err(|e| e.to_string());
    for n in 0..=4u32 {
        let h = program(n)?;
        let want = Rational::new(BigInt::one(), BigInt::from(4).pow(1 << n));
        let got = exact_inference(&h)
            .map_err(|e| e.to_string())?
            .output_probability();
        ensure(got == want, || format!("f_{n} gave {got}"))?;
        if n <= 2 {
            let f = h.unfold(10_000).map_err(|e| e.to_string())?;
            let m = oracle_semantics(&f, &substochastic(&h.base).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let brute = m.get(1, 0) / (m.get(0, 0) + m.get(1, 0));
            ensure(brute == want, || {
                format!("brute force on f_{n} gave {brute}")
            })?;
        }
    }
    let mut sizes = Vec::new();
    let mut last_time = Duration::ZERO;
    for n in 1..=8u32 {
        let h = program(n)?;
        let start = Instant::now();
        let mut store = TermStore::new();
        let (t, _) =
            algebrise_hierarchical_with_report(&mut store, &h, AlgebraiseOptions::default())
                .map_err(|e| e.to_string())?;
        let interp = substochastic(&h.base).map_err(|e| e.to_string())?;
        let c = ArithmeticCircuit::compile(&store, t, &interp, &EvalOptions::default())
            .map_err(|e| e.to_string())?
            .pruned();
        let want = Rational::new(BigInt::one(), BigInt::from(4).pow(1 << n));
        ensure(*c.eval().get(1, 0) == want, || {
            format!("f_{n} circuit value wrong")
        })?;
        last_time = start.elapsed();
        sizes.push(c.size() as i64);
    }
    let diffs: Vec<i64> = sizes.windows(2).map(|w| w[1] - w[0]).collect();
    ensure(diffs.windows(2).all(|d| (d[0] - d[1]).abs() <= 1), || {
        format!("circuit sizes {sizes:?} are not affine")
    })?;
    ensure(last_time < Duration::from_secs(5), || {
        format!("f_8 took {last_time:?}")
    })?;
    Ok(format!(
        "4^-2^n exact for n ≤ 4, circuit sizes {sizes:?} for n = 1..8, f_8 in {:.0}ms",
        last_time.as_secs_f64() * 1e3
    ))
}

// ---------------------------------------------------------------- criterion 4

fn criterion_4(widths: &Widths) -> Outcome {
    ensure(widths.bound_violations.is_empty(), || {
        format!("width bound fails: {}", widths.bound_violations.join("; "))
    })?;
    ensure(widths.nodes > 0, || "no nodes measured".into())?;
    Ok(format!(
        "width ≤ 12·bw on all {} call-graph nodes; dag_size ≤ c·|A|·bw² holds with c = {:.2}",
        widths.nodes, widths.worst_ratio
    ))
}

// ---------------------------------------------------------------- criterion 5

fn random_graph(rng: &mut ChaCha8Rng) -> (SimpleGraph, Hypergraph) {
    let n = rng.gen_range(3..=14);
    let density = rng.gen_range(0.15..0.6);
    let mut g = SimpleGraph::new(n);
    let mut h = Hypergraph::new(n);
    for v in 0..n {
        h.add_edge(format!("v{v}"), [v]);
    }
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                g.add_edge(u, v);
                h.add_edge(format!("{u}-{v}"), [u, v]);
            }
        }
    }
    (g, h)
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut tight = 0;
    for i in 0..100 {
        let (g, h) = random_graph(&mut rng);
        let td = tree_decomposition(&g, TdMode::Heuristic).map_err(|e| e.to_string())?;
        let diags = validate_tree_decomposition(&td, &g);
        ensure(diags.is_empty(), || {
            format!("graph {i}: tree decomposition {diags:?}")
        })?;
        let b = tree_to_branch(&td, &h).map_err(|e| format!("graph {i}: {e}"))?;
        let diags = validate_branch_decomposition(&b, &h);
        ensure(diags.is_empty(), || {
            format!("graph {i}: branch decomposition {diags:?}")
        })?;
        let (tw, bw) = (td.width(), b.width(&h));
        ensure(bw <= tw + 1, || format!("graph {i}: bw {bw} > tw {tw} + 1"))?;
        if bw == tw + 1 {
            tight += 1;
        }
    }
    Ok(format!(
        "100 graphs, bound attained on {tight}, validators clean"
    ))
}

// ---------------------------------------------------------------- criterion 6

/// A random circuit whose node values all lie in `[0, 1]`.
fn unit_circuit(rng: &mut ChaCha8Rng) -> ArithmeticCircuit<Rational> {
    let mut nodes = Vec::new();
    let mut vals: Vec<Rational> = Vec::new();
    for _ in 0..rng.gen_range(1..6) {
        let d: i64 = rng.gen_range(1..=12);
        let v = q(rng.gen_range(0..=d), d);
        nodes.push(CircuitNode::Const(v.clone()));
        vals.push(v);
    }
    for _ in 0..rng.gen_range(1..40) {
        let (a, b) = (rng.gen_range(0..nodes.len()), rng.gen_range(0..nodes.len()));
        let sum = &vals[a] + &vals[b];
        if rng.gen_bool(0.5) && sum <= <Rational as One>::one() {
            nodes.push(CircuitNode::Add(a, b));
            vals.push(sum);
        } else {
            nodes.push(CircuitNode::Mul(a, b));
            vals.push(&vals[a] * &vals[b]);
        }
    }
    let k = nodes.len();
    ArithmeticCircuit::from_parts(nodes, vec![k - 1, k / 2], 2, 1).expect("well formed")
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = <Rational as Zero>::zero();
    for i in 0..100 {
        let c = unit_circuit(&mut rng);
        let exact = c.eval();
        for b in [10u32, 20, 40] {
            let vals = truncated_eval(&c, 2 * c.size() as u32 + b).map_err(|e| e.to_string())?;
            for (j, r) in c.roots().iter().enumerate() {
                let err = (vals[r].to_rational() - exact.get(j, 0)).abs();
                ensure(err <= pow2(-(b as i64)), || {
                    format!("circuit {i}, b = {b}: error {err}")
                })?;
                let scaled = err * pow2(b as i64);
                if scaled > worst {
                    worst = scaled;
                }
            }
        }
    }
    let worst: f64 = num_traits::ToPrimitive::to_f64(&worst).unwrap_or(f64::NAN);
    Ok(format!(
        "100 circuits, b ∈ {{10, 20, 40}}, largest error {worst:.3}·2^-b"
    ))
}

// ---------------------------------------------------------------- criterion 7

fn criterion_7() -> Outcome {
    let query = parse_query(&read_data("booking.cq")).map_err(|e| e.to_string())?;
    let eval = EvalOptions::default();
    let mut answers = Vec::new();
    for seed in 0..5u64 {
        let domain = 2 + seed as usize;
        let inst = random_instance(seed, &query, domain, 0.4);
        let got = evaluate_query(&query, &inst, AlgebraiseOptions::default(), &eval)
            .map_err(|e| e.to_string())?;
        let want = naive_join(&query, &inst);
        ensure(got == want, || format!("booking instance {seed} differs"))?;
        answers.push(got.len());
    }
    ensure(data_path("booking.csv").exists(), || {
        "booking.csv missing".into()
    })?;
    let mut leaves_seen = 0;
    for seed in 0..50u64 {
        let leaves = 2 + (seed as usize % 11);
        let t = random_attack_tree(seed, leaves);
        leaves_seen = leaves_seen.max(t.leaves().map_err(|e| e.to_string())?.len());
        let got =
            attack_min_cost(&t, AlgebraiseOptions::default(), &eval).map_err(|e| e.to_string())?;
        let want = attack_brute_force(&t).map_err(|e| e.to_string())?;
        ensure(got == want, || {
            format!("attack tree {seed}: {got} vs {want}")
        })?;
    }
    ensure(leaves_seen <= 12, || {
        format!("a tree has {leaves_seen} leaves")
    })?;
    Ok(format!(
        "booking join equals naive join on 5 instances (answer sizes {answers:?}); 50 attack trees match exhaustive search"
    ))
}

// ---------------------------------------------------------------- criterion 8

fn criterion_8() -> Outcome {
    let h = compile_source(&read_data("has_disease.dpp"), Some("hasDisease"))
        .map_err(|e| e.to_string())?;
    let v = h.node_by_name("test").ok_or("no `test` node")?;
    let g = primal_graph(&h.nodes[v].body);
    let td = tree_decomposition(&g, TdMode::Exact).map_err(|e| e.to_string())?;
    ensure(validate_tree_decomposition(&td, &g).is_empty(), || {
        "invalid decomposition".into()
    })?;
    ensure(td.width() == 2, || format!("width {}", td.width()))?;
    Ok(format!(
        "primal graph of `test` ({} vertices, {} edges) has tree width 2",
        g.num_vertices(),
        g.num_edges()
    ))
}

fn main() {
    let mut widths = Widths::default();
    let c1 = criterion_1(&mut widths);
    let results = [
        ("master soundness", c1),
        ("diagnostic-test inference", criterion_2()),
        ("f_n exponential gap", criterion_3()),
        ("term width bound", criterion_4(&widths)),
        ("tree to branch bound", criterion_5()),
        ("truncation guarantee", criterion_6()),
        ("applications", criterion_7()),
        ("test primal graph", criterion_8()),
    ];
    let mut failed = 0;
    for (i, (name, r)) in results.iter().enumerate() {
        match r {
            Ok(detail) => println!("criterion {} ({name}): PASS: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
