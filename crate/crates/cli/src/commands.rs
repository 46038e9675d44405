use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use dotalg::algebraise::{algebrise_hierarchical_with_report, pipeline_stats, AlgebraiseOptions};
use dotalg::apps::{
    attack_brute_force, attack_min_cost, evaluate_query, instance_to_interpretation, naive_join,
    tropical_interpretation, RelationalInstance,
};
use dotalg::decomposition::{
    decompose as decompose_diagram, validate_branch_decomposition, validate_tree_decomposition,
};
use dotalg::diagram::{CallNode, MonoidalSignature, Sort};
use dotalg::frontend::pretty_program;
use dotalg::inference::{infer as run_inference, InferOptions, InferenceMethod};
use dotalg::semiring::{
    boolean, interpret_term, random_interpretation, substochastic, ArithmeticCircuit, EvalOptions,
    Interpretation, Matrix, Rational, Semiring, Tropical,
};
use dotalg::term::{TermDag, TermId, TermStore};
use dotalg::testkit::oracle_semantics;
use dotalg::{Error, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::input::{load, Loaded, Source};
use crate::{Common, SemiringArg};

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn var_labels(node: &CallNode) -> Vec<String> {
    (0..node.body.num_vars())
        .map(|i| node.var_name(dotalg::diagram::Var(i as u32)))
        .collect()
}

fn algebraise_opts(c: &Common) -> AlgebraiseOptions {
    AlgebraiseOptions {
        mode: c.mode.into(),
    }
}

pub fn parse(c: &Common) -> Result<String> {
    let l = load(c)?;
    if c.json {
        let v = match &l.source {
            Source::Program(ast) => json!({ "ast": ast, "diagram": l.h }),
            Source::Query { query, .. } => json!({ "query": query, "diagram": l.h }),
            Source::Attack(t) => json!({ "tree": t, "diagram": l.h }),
            Source::Diagram => json!({ "diagram": l.h }),
        };
        return to_json(&v);
    }
    match &l.source {
        Source::Program(_) => pretty_program(&l.h),
        Source::Query { query, .. } => {
            let atoms: Vec<String> = query
                .atoms
                .iter()
                .map(|a| format!("{}({})", a.relation, a.args.join(", ")))
                .collect();
            Ok(format!(
                "{}({}) :- {}.\n",
                query.name,
                query.free.join(", "),
                atoms.join(", ")
            ))
        }
        _ => {
            let root = l.h.root_node();
            Ok(format!("{}{:?}", root.name, root.body))
        }
    }
}

pub fn graph(c: &Common, hypergraph: bool) -> Result<String> {
    let l = load(c)?;
    let node = &l.h.nodes[l.node(c.node.as_deref())?];
    let labels = var_labels(node);
    let primal = dotalg::decomposition::primal_graph(&node.body);
    let hyper = dotalg::decomposition::dependency_hypergraph(&node.body);
    if c.json {
        return to_json(&json!({
            "node": node.name,
            "labels": labels,
            "primal": primal,
            "hypergraph": hyper,
        }));
    }
    Ok(if hypergraph {
        hyper.to_dot(&labels)
    } else {
        primal.to_dot(&labels)
    })
}

pub fn decompose(c: &Common) -> Result<String> {
    let l = load(c)?;
    let node = &l.h.nodes[l.node(c.node.as_deref())?];
    let labels = var_labels(node);
    let dec = decompose_diagram(&node.body, c.mode.into())?;
    let mut diagnostics = validate_tree_decomposition(&dec.tree, &dec.primal);
    diagnostics.extend(validate_branch_decomposition(&dec.branch, &dec.hypergraph));
    if c.json {
        return to_json(&json!({
            "node": node.name,
            "labels": labels,
            "decomposition": dec,
            "diagnostics": diagnostics,
        }));
    }
    if c.dot {
        return Ok(dec.tree.to_dot(&labels) + &dec.branch.to_dot(&dec.hypergraph));
    }
    let mut out = String::new();
    writeln!(
        out,
        "node {}: {} variables, {} assignments",
        node.name,
        node.body.num_vars(),
        node.body.assignments().len()
    )
    .expect("string write");
    writeln!(
        out,
        "tree width {} ({} bags)",
        dec.tree_width,
        dec.tree.bags.len()
    )
    .expect("string write");
    for (i, bag) in dec.tree.bags.iter().enumerate() {
        let names: Vec<&str> = bag.iter().map(|&v| labels[v].as_str()).collect();
        writeln!(out, "  bag {i}: {{{}}}", names.join(", ")).expect("string write");
    }
    writeln!(
        out,
        "branch width {} ({} hyperedges)",
        dec.branch_width,
        dec.hypergraph.edges.len()
    )
    .expect("string write");
    if diagnostics.is_empty() {
        out.push_str("validators: no problems\n");
    } else {
        for d in &diagnostics {
            writeln!(out, "problem: {d}").expect("string write");
        }
    }
    Ok(out)
}

fn algebraise_loaded(l: &Loaded, c: &Common) -> Result<(TermStore, TermId, Vec<NodeReport>)> {
    let mut store = TermStore::new();
    let (t, reports) = algebrise_hierarchical_with_report(&mut store, &l.h, algebraise_opts(c))?;
    let reports = reports
        .into_iter()
        .map(|(v, report)| NodeReport {
            name: l.h.nodes[v].name.clone(),
            report,
        })
        .collect();
    Ok((store, t, reports))
}

#[derive(Serialize)]
struct NodeReport {
    name: String,
    #[serde(flatten)]
    report: dotalg::algebraise::AlgebraisationReport,
}

pub fn algebraise(c: &Common) -> Result<String> {
    let l = load(c)?;
    let (store, t, reports) = algebraise_loaded(&l, c)?;
    if c.json {
        return to_json(&json!({
            "term": TermDag::export(&store, t),
            "width": store.width(t),
            "dag_size": store.dag_size(t),
            "nodes": reports,
        }));
    }
    let mut out = String::new();
    for r in &reports {
        writeln!(
            out,
            "{}: width {}, branch width {}, {} blocks, term width {}, dag size {}",
            r.name,
            r.report.diagram_width,
            r.report.branch_width,
            r.report.blocks,
            r.report.term_width,
            r.report.dag_size
        )
        .expect("string write");
    }
    writeln!(
        out,
        "term width {}, dag size {}",
        store.width(t),
        store.dag_size(t)
    )
    .expect("string write");
    out.push_str(&store.pretty_shared(t));
    Ok(out)
}

fn default_semiring(l: &Loaded) -> SemiringArg {
    match l.source {
        Source::Program(_) | Source::Diagram => SemiringArg::Rational,
        Source::Query { .. } => SemiringArg::Bool,
        Source::Attack(_) => SemiringArg::Tropical,
    }
}

fn unsupported(what: &str, s: SemiringArg) -> Error {
    let name = match s {
        SemiringArg::Rational => Rational::NAME,
        SemiringArg::Bool => bool::NAME,
        SemiringArg::Tropical => Tropical::NAME,
    };
    Error::InvalidInput(format!("{what} has no {name} interpretation"))
}

fn instance_of(l: &Loaded) -> Result<&RelationalInstance> {
    match &l.source {
        Source::Query {
            instance: Some(i), ..
        } => Ok(i),
        _ => Err(Error::InvalidInput(
            "a query needs a relational instance (--instance file.csv)".into(),
        )),
    }
}

/// Every sort of a bare diagram gets dimension 2 and every symbol a random matrix.
fn seeded<R: Semiring>(sig: &MonoidalSignature, seed: u64) -> Result<Interpretation<R>> {
    let dims: BTreeMap<Sort, usize> = sig.sorts.iter().map(|s| (s.clone(), 2)).collect();
    random_interpretation(sig, &dims, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// The interpretation of `l` over one semiring, as one of three concrete types.
enum Interp {
    Rational(Interpretation<Rational>),
    Bool(Interpretation<bool>),
    Tropical(Interpretation<Tropical>),
}

fn interpretation(l: &Loaded, s: SemiringArg, seed: u64) -> Result<Interp> {
    let sig = &l.h.base;
    Ok(match (&l.source, s) {
        (Source::Program(_), SemiringArg::Rational) => Interp::Rational(substochastic(sig)?),
        (Source::Program(_), SemiringArg::Bool) => Interp::Bool(boolean(sig)?),
        (Source::Program(_), s) => return Err(unsupported("a program", s)),
        (Source::Query { .. }, SemiringArg::Bool) => {
            Interp::Bool(instance_to_interpretation(instance_of(l)?)?)
        }
        (Source::Query { .. }, s) => return Err(unsupported("a query", s)),
        (Source::Attack(t), SemiringArg::Tropical) => Interp::Tropical(tropical_interpretation(t)?),
        (Source::Attack(_), s) => return Err(unsupported("an attack tree", s)),
        (Source::Diagram, SemiringArg::Rational) => Interp::Rational(seeded(sig, seed)?),
        (Source::Diagram, SemiringArg::Bool) => Interp::Bool(seeded(sig, seed)?),
        (Source::Diagram, SemiringArg::Tropical) => Interp::Tropical(seeded(sig, seed)?),
    })
}

fn circuit_json<R: Semiring>(
    store: &TermStore,
    t: TermId,
    i: &Interpretation<R>,
) -> Result<String> {
    let c = ArithmeticCircuit::compile(store, t, i, &EvalOptions::default())?;
    to_json(&c.to_json())
}

pub fn compile(c: &Common, semiring: Option<SemiringArg>) -> Result<String> {
    let l = load(c)?;
    let s = semiring.unwrap_or_else(|| default_semiring(&l));
    let interp = interpretation(&l, s, c.seed)?;
    let (store, t, _) = algebraise_loaded(&l, c)?;
    match interp {
        Interp::Rational(i) => circuit_json(&store, t, &i),
        Interp::Bool(i) => circuit_json(&store, t, &i),
        Interp::Tropical(i) => circuit_json(&store, t, &i),
    }
}

pub fn infer(
    c: &Common,
    digits: u32,
    method: InferenceMethod,
    precision_cap: u32,
) -> Result<String> {
    let l = load(c)?;
    let opts = InferOptions {
        method,
        precision_cap,
        algebraise: algebraise_opts(c),
        ..InferOptions::default()
    };
    let r = run_inference(&l.h, digits, &opts)?;
    if c.json {
        return to_json(&r);
    }
    // enough decimal places to show every requested binary digit
    let places = (digits as usize * 30103).div_ceil(100_000) + 1;
    let mut out = String::new();
    writeln!(out, "p ≈ {}", r.p_f_approx.to_decimal(places)).expect("string write");
    writeln!(out, "    = {} (exact dyadic)", r.p_f_approx).expect("string write");
    writeln!(out, "error ≤ 2^-{}", digits + 1).expect("string write");
    writeln!(
        out,
        "acceptance ≥ {}",
        r.p_acc_lower_bound.to_decimal(places)
    )
    .expect("string write");
    let method = match r.method {
        InferenceMethod::Exact => "exact",
        InferenceMethod::Truncated => "truncated",
        InferenceMethod::Auto => "auto",
    };
    writeln!(
        out,
        "method {method}, {} circuit nodes, {} bits",
        r.circuit_size, r.digits_used
    )
    .expect("string write");
    Ok(out)
}

fn matrix_out<R: Semiring>(m: &Matrix<R>, json: bool) -> Result<String> {
    if json {
        let rows: Vec<Vec<String>> = (0..m.rows())
            .map(|i| (0..m.cols()).map(|j| m.get(i, j).encode()).collect())
            .collect();
        return to_json(&json!({
            "semiring": R::NAME,
            "rows": m.rows(),
            "cols": m.cols(),
            "entries": rows,
        }));
    }
    Ok(format!(
        "{}×{} matrix over {}\n{m}",
        m.rows(),
        m.cols(),
        R::NAME
    ))
}

fn table_out(
    l: &Loaded,
    inst: &RelationalInstance,
    rows: &BTreeSet<Vec<usize>>,
    json: bool,
) -> Result<String> {
    let Source::Query { query, .. } = &l.source else {
        unreachable!("tables come from queries")
    };
    let named: Vec<Vec<&str>> = rows
        .iter()
        .map(|r| r.iter().map(|&e| inst.elements[e].as_str()).collect())
        .collect();
    if json {
        return to_json(&json!({ "columns": query.free, "rows": named }));
    }
    if query.free.is_empty() {
        return Ok(format!("{}\n", !rows.is_empty()));
    }
    let mut out = query.free.join(",") + "\n";
    for r in named {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    Ok(out)
}

fn cost_out(cost: Tropical, json: bool) -> Result<String> {
    if json {
        return to_json(&json!({ "min_cost": cost.finite() }));
    }
    Ok(format!("min cost {cost}\n"))
}

pub fn eval(c: &Common, semiring: Option<SemiringArg>) -> Result<String> {
    let l = load(c)?;
    let s = semiring.unwrap_or_else(|| default_semiring(&l));
    let eval_opts = EvalOptions::default();
    match &l.source {
        Source::Query { query, .. } if s == SemiringArg::Bool => {
            let inst = instance_of(&l)?;
            let rows = evaluate_query(query, inst, algebraise_opts(c), &eval_opts)?;
            return table_out(&l, inst, &rows, c.json);
        }
        Source::Attack(t) if s == SemiringArg::Tropical => {
            return cost_out(attack_min_cost(t, algebraise_opts(c), &eval_opts)?, c.json);
        }
        _ => {}
    }
    let interp = interpretation(&l, s, c.seed)?;
    let (store, t, _) = algebraise_loaded(&l, c)?;
    match interp {
        Interp::Rational(i) => matrix_out(&interpret_term(&store, t, &i, &eval_opts)?, c.json),
        Interp::Bool(i) => matrix_out(&interpret_term(&store, t, &i, &eval_opts)?, c.json),
        Interp::Tropical(i) => matrix_out(&interpret_term(&store, t, &i, &eval_opts)?, c.json),
    }
}

pub fn oracle(c: &Common, semiring: Option<SemiringArg>) -> Result<String> {
    let l = load(c)?;
    let s = semiring.unwrap_or_else(|| default_semiring(&l));
    match &l.source {
        Source::Query { query, .. } if s == SemiringArg::Bool => {
            let inst = instance_of(&l)?;
            return table_out(&l, inst, &naive_join(query, inst), c.json);
        }
        Source::Attack(t) if s == SemiringArg::Tropical => {
            return cost_out(attack_brute_force(t)?, c.json);
        }
        _ => {}
    }
    let interp = interpretation(&l, s, c.seed)?;
    let f = l.h.unfold(c.max_unfold)?;
    match interp {
        Interp::Rational(i) => matrix_out(&oracle_semantics(&f, &i)?, c.json),
        Interp::Bool(i) => matrix_out(&oracle_semantics(&f, &i)?, c.json),
        Interp::Tropical(i) => matrix_out(&oracle_semantics(&f, &i)?, c.json),
    }
}

pub fn stats(c: &Common) -> Result<String> {
    let l = load(c)?;
    let stats = pipeline_stats(&l.h, c.mode.into())?;
    let (store, t, reports) = algebraise_loaded(&l, c)?;
    let (width, dag_size) = (store.width(t), store.dag_size(t));
    if c.json {
        return to_json(&json!({
            "stats": stats,
            "reports": reports,
            "width": width,
            "dag_size": dag_size,
        }));
    }
    let mut out = String::new();
    writeln!(
        out,
        "k = {}, L = {}, M = {}, N = {}",
        stats.k, stats.l, stats.m, stats.n
    )
    .expect("string write");
    writeln!(
        out,
        "{:<16} {:>5} {:>6} {:>5} {:>5} {:>10} {:>6} {:>9}",
        "node", "|A|", "width", "tw", "bw", "term width", "12·bw", "dag size"
    )
    .expect("string write");
    for r in &reports {
        let a = &r.report;
        writeln!(
            out,
            "{:<16} {:>5} {:>6} {:>5} {:>5} {:>10} {:>6} {:>9}",
            r.name,
            a.assignments,
            a.diagram_width,
            a.tree_width,
            a.branch_width,
            a.term_width,
            12 * a.branch_width,
            a.dag_size
        )
        .expect("string write");
    }
    writeln!(out, "whole term: width {width}, dag size {dag_size}").expect("string write");
    Ok(out)
}
