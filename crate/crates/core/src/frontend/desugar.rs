use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::ast::{Expr, ExprKind, FunctionDef, ProgramAst, Stmt};
use super::parser::output_arities;
use crate::diagram::{
    Assignment, CallNode, DotDiagram, HierarchicalDotDiagram, MonoidalSignature, NodeId, Sort,
    Symbol, Var,
};
use crate::error::{Error, Result};

pub const BOOL_SORT: &str = "Bool";

pub fn bool_sort() -> Sort {
    Sort::new(BOOL_SORT)
}

/// Canonical symbol for a coin flip: exact decimal when one exists, `p/q` otherwise.
pub fn flip_symbol(p: &BigRational) -> Symbol {
    Symbol::new(&format!("flip({})", rational_literal(p)))
}

/// Shortest exact literal for `p`: `0.0001` for 1/10000, `1/3` for one third.
pub fn rational_literal(p: &BigRational) -> String {
    if p.is_integer() {
        return p.numer().to_string();
    }
    let mut den = p.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut a, mut b) = (0usize, 0usize);
    while den.is_multiple_of(&two) {
        den /= &two;
        a += 1;
    }
    while den.is_multiple_of(&five) {
        den /= &five;
        b += 1;
    }
    if !den.is_one() || a.max(b) > 40 {
        return format!("{}/{}", p.numer(), p.denom());
    }
    let k = a.max(b);
    let scaled = p * BigRational::from_integer(num_traits::pow(BigInt::from(10), k));
    let digits = scaled.to_integer().abs().to_string();
    let digits = format!("{digits:0>width$}", width = k + 1);
    let (int, frac) = digits.split_at(digits.len() - k);
    let sign = if p < &BigRational::zero() { "-" } else { "" };
    format!("{sign}{int}.{frac}")
}

/// The Boolean program signature with one flip symbol per given probability.
pub fn bool_signature<'a>(flips: impl IntoIterator<Item = &'a BigRational>) -> MonoidalSignature {
    let b = bool_sort();
    let mut sig = MonoidalSignature::new();
    sig.add_sort(b.clone());
    sig.add_symbol(
        Symbol::new("and"),
        vec![b.clone(), b.clone()],
        vec![b.clone()],
    );
    sig.add_symbol(
        Symbol::new("or"),
        vec![b.clone(), b.clone()],
        vec![b.clone()],
    );
    sig.add_symbol(Symbol::new("not"), vec![b.clone()], vec![b.clone()]);
    sig.add_symbol(Symbol::new("observe"), vec![b.clone()], vec![]);
    for p in flips {
        sig.add_symbol(flip_symbol(p), vec![], vec![b.clone()]);
    }
    sig
}

/// Turns a checked program into a hierarchical diagram rooted at `root`
/// (the last function when `None`).
///
/// Only functions reachable from the root become nodes; each function is one
/// node no matter how often it is called.
pub fn desugar(ast: &ProgramAst, root: Option<&str>) -> Result<HierarchicalDotDiagram> {
    let root_def = match root {
        Some(name) => ast
            .function(name)
            .ok_or_else(|| Error::InvalidInput(format!("no function named `{name}`")))?,
        None => ast
            .functions
            .last()
            .ok_or_else(|| Error::InvalidInput("program defines no functions".into()))?,
    };
    let arity = output_arities(ast)?;

    let mut reachable = vec![root_def.name.as_str()];
    let mut k = 0;
    while k < reachable.len() {
        let f = ast.function(reachable[k]).expect("resolved");
        for c in calls_in_order(f) {
            if !reachable.contains(&c) {
                reachable.push(c);
            }
        }
        k += 1;
    }
    let ids: HashMap<&str, NodeId> = ast
        .functions
        .iter()
        .map(|f| f.name.as_str())
        .filter(|n| reachable.contains(n))
        .enumerate()
        .map(|(i, n)| (n, i))
        .collect();

    let mut flips = Vec::new();
    let mut nodes = Vec::with_capacity(ids.len());
    for f in ast
        .functions
        .iter()
        .filter(|f| ids.contains_key(f.name.as_str()))
    {
        let node = lower_function(f, ast, &arity, &ids)?;
        for a in node.body.assignments() {
            if let Some(p) = crate::semiring::parse_flip_probability(a.symbol.name()) {
                flips.push(p);
            }
        }
        nodes.push(node);
    }
    flips.sort();
    flips.dedup();
    let h = HierarchicalDotDiagram {
        base: bool_signature(&flips),
        nodes,
        root: ids[root_def.name.as_str()],
    };
    let diags = h.validate();
    if diags.is_empty() {
        Ok(h)
    } else {
        Err(Error::Validation(diags))
    }
}

/// Parses `src` and desugars it in one step.
pub fn compile_source(src: &str, root: Option<&str>) -> Result<HierarchicalDotDiagram> {
    desugar(&super::parse(src)?, root)
}

fn calls_in_order(f: &FunctionDef) -> Vec<&str> {
    fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a str>) {
        match &e.kind {
            ExprKind::Var { .. } | ExprKind::Flip { .. } => {}
            ExprKind::Not { arg } => walk(arg, out),
            ExprKind::And { left, right } | ExprKind::Or { left, right } => {
                walk(left, out);
                walk(right, out);
            }
            ExprKind::Call { name, args } => {
                for a in args {
                    walk(a, out);
                }
                if !out.contains(&name.as_str()) {
                    out.push(name);
                }
            }
        }
    }
    let mut out = Vec::new();
    for s in &f.body {
        match s {
            Stmt::Let { value, .. } | Stmt::Observe { value, .. } => walk(value, &mut out),
        }
    }
    for r in &f.returns {
        walk(r, &mut out);
    }
    out
}

struct Lowering<'a> {
    ast: &'a ProgramAst,
    arity: &'a HashMap<String, usize>,
    names: Vec<String>,
    assignments: Vec<Assignment>,
    env: HashMap<String, Var>,
    tmp: usize,
}

impl Lowering<'_> {
    fn var(&mut self, name: String) -> Var {
        let v = Var::from_index(self.names.len());
        self.names.push(name);
        v
    }

    fn fresh(&mut self) -> Var {
        let name = format!("%tmp{}", self.tmp);
        self.tmp += 1;
        self.var(name)
    }

    fn outputs(&mut self, targets: Option<&[String]>, n: usize) -> Vec<Var> {
        match targets {
            Some(ts) => ts.iter().map(|t| self.var(t.clone())).collect(),
            None => (0..n).map(|_| self.fresh()).collect(),
        }
    }

    fn single(&mut self, e: &Expr) -> Var {
        let vs = self.lower(e, None);
        debug_assert_eq!(vs.len(), 1);
        vs[0]
    }

    /// Emits assignments for `e`; the final assignment writes `targets` when given.
    fn lower(&mut self, e: &Expr, targets: Option<&[String]>) -> Vec<Var> {
        let (symbol, ins, n_out) = match &e.kind {
            ExprKind::Var { name } => return vec![self.env[name]],
            ExprKind::Flip { p } => (flip_symbol(p), vec![], 1),
            ExprKind::Not { arg } => (Symbol::new("not"), vec![self.single(arg)], 1),
            ExprKind::And { left, right } => {
                let l = self.single(left);
                let r = self.single(right);
                (Symbol::new("and"), vec![l, r], 1)
            }
            ExprKind::Or { left, right } => {
                let l = self.single(left);
                let r = self.single(right);
                (Symbol::new("or"), vec![l, r], 1)
            }
            ExprKind::Call { name, args } => {
                let ins = args.iter().map(|a| self.single(a)).collect();
                (Symbol::new(name), ins, self.arity[name])
            }
        };
        let outs = self.outputs(targets, n_out);
        self.assignments
            .push(Assignment::new(outs.clone(), symbol, ins));
        outs
    }
}

fn lower_function(
    f: &FunctionDef,
    ast: &ProgramAst,
    arity: &HashMap<String, usize>,
    ids: &HashMap<&str, NodeId>,
) -> Result<CallNode> {
    let mut lw = Lowering {
        ast,
        arity,
        names: Vec::new(),
        assignments: Vec::new(),
        env: HashMap::new(),
        tmp: 0,
    };
    let inputs: Vec<Var> = f
        .params
        .iter()
        .map(|p| {
            let v = lw.var(p.clone());
            lw.env.insert(p.clone(), v);
            v
        })
        .collect();
    for s in &f.body {
        match s {
            Stmt::Let { targets, value, .. } => {
                let vs = match &value.kind {
                    ExprKind::Var { name } => vec![lw.env[name]],
                    _ => lw.lower(value, Some(targets)),
                };
                for (t, v) in targets.iter().zip(vs) {
                    lw.env.insert(t.clone(), v);
                }
            }
            Stmt::Observe { value, .. } => {
                let v = lw.single(value);
                lw.assignments
                    .push(Assignment::new(vec![], Symbol::new("observe"), vec![v]));
            }
        }
    }
    let outputs: Vec<Var> = match f.returns.as_slice() {
        [r] => lw.lower(r, None),
        rs => rs.iter().map(|r| lw.single(r)).collect(),
    };

    let b = bool_sort();
    let mut signature = MonoidalSignature::new();
    signature.add_sort(b.clone());
    let mut defn = BTreeMap::new();
    let mut children = Vec::new();
    for c in calls_in_order(f) {
        let callee = lw.ast.function(c).expect("resolved");
        signature.add_symbol(
            Symbol::new(c),
            vec![b.clone(); callee.params.len()],
            vec![b.clone(); lw.arity[c]],
        );
        defn.insert(Symbol::new(c), ids[c]);
        children.push(ids[c]);
    }
    let body = DotDiagram::new(vec![b; lw.names.len()], lw.assignments, inputs, outputs)?;
    Ok(CallNode {
        name: f.name.clone(),
        signature,
        body,
        defn,
        children,
        var_names: lw.names,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals() {
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(rational_literal(&q(1, 10000)), "0.0001");
        assert_eq!(rational_literal(&q(99, 100)), "0.99");
        assert_eq!(rational_literal(&q(1, 2)), "0.5");
        assert_eq!(rational_literal(&q(1, 3)), "1/3");
        assert_eq!(rational_literal(&q(1, 1)), "1");
        assert_eq!(rational_literal(&q(0, 1)), "0");
    }

    #[test]
    fn not_inside_and_gets_one_temporary() {
        let h = compile_source("f(z, t) := let y = ¬z ∧ t; y", None).unwrap();
        let node = h.root_node();
        assert_eq!(node.body.assignments().len(), 2);
        assert_eq!(node.var_names, vec!["z", "t", "%tmp0", "y"]);
        assert_eq!(node.body.assignments()[0].symbol.name(), "not");
    }

    #[test]
    fn single_flip_body() {
        let h = compile_source("f() := flip(0.5)", None).unwrap();
        assert_eq!(h.nodes.len(), 1);
        let body = &h.root_node().body;
        assert_eq!(body.assignments().len(), 1);
        assert_eq!(body.outputs().len(), 1);
        assert!(body.inputs().is_empty());
    }

    #[test]
    fn alias_let_adds_nothing() {
        let h = compile_source("f(a) := let b = a; b", None).unwrap();
        let body = &h.root_node().body;
        assert!(body.assignments().is_empty());
        assert_eq!(body.inputs(), body.outputs());
    }

    #[test]
    fn true_false_become_flips() {
        let h = compile_source("f() := true, false", None).unwrap();
        let syms: Vec<_> = h
            .root_node()
            .body
            .assignments()
            .iter()
            .map(|a| a.symbol.name().to_string())
            .collect();
        assert_eq!(syms, vec!["flip(1)", "flip(0)"]);
    }

    #[test]
    fn unreachable_functions_dropped() {
        let h =
            compile_source("g() := flip(0.5)\nf() := flip(0.25)\nh() := f()", Some("f")).unwrap();
        assert_eq!(h.nodes.len(), 1);
        assert_eq!(h.root_node().name, "f");
    }
}
