use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Read;

use serde::Serialize;

use crate::algebraise::{algebrise, AlgebraiseOptions};
use crate::diagram::{Assignment, DotDiagram, MonoidalSignature, Sort, Symbol, Var};
use crate::error::{Error, Result};
use crate::semiring::{interpret_term, EvalOptions, Interpretation, Matrix};
use crate::term::TermStore;

/// The single sort of relational queries; its dimension is the domain size.
pub const DOMAIN_SORT: &str = "D";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Atom {
    pub relation: String,
    pub args: Vec<String>,
}

/// `head(free…) :- R1(…), R2(…), ….` Variables of the body that are not in the
/// head are existentially quantified.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjunctiveQuery {
    pub name: String,
    pub free: Vec<String>,
    pub atoms: Vec<Atom>,
    /// Arity of every relation mentioned in the body.
    pub relations: BTreeMap<String, usize>,
}

impl ConjunctiveQuery {
    pub fn new(name: impl Into<String>, free: Vec<String>, atoms: Vec<Atom>) -> Result<Self> {
        let mut relations = BTreeMap::new();
        for a in &atoms {
            match relations.insert(a.relation.clone(), a.args.len()) {
                Some(k) if k != a.args.len() => {
                    return Err(Error::InvalidInput(format!(
                        "relation `{}` used with arities {k} and {}",
                        a.relation,
                        a.args.len()
                    )))
                }
                _ => {}
            }
        }
        let mut seen = BTreeSet::new();
        for v in &free {
            if !seen.insert(v) {
                return Err(Error::InvalidInput(format!(
                    "head variable `{v}` is listed twice"
                )));
            }
        }
        Ok(ConjunctiveQuery {
            name: name.into(),
            free,
            atoms,
            relations,
        })
    }

    /// Every variable, head variables first, then body variables by first use.
    pub fn variables(&self) -> Vec<String> {
        let mut out = self.free.clone();
        for a in &self.atoms {
            for v in &a.args {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
        }
        out
    }

    pub fn existential(&self) -> Vec<String> {
        self.variables().split_off(self.free.len())
    }

    pub fn signature(&self) -> MonoidalSignature {
        let d = Sort::new(DOMAIN_SORT);
        let mut sig = MonoidalSignature::new();
        sig.add_sort(d.clone());
        for (r, &k) in &self.relations {
            sig.add_symbol(Symbol::new(r), vec![d.clone(); k], Vec::new());
        }
        sig
    }
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_alphabetic() || c == '_')
        && cs.all(|c| c.is_alphanumeric() || c == '_')
}

/// Splits `R(a, b)` into the name and argument list.
fn parse_atom(text: &str) -> Result<(String, Vec<String>)> {
    let text = text.trim();
    let bad = || Error::Parse {
        line: 1,
        column: 1,
        message: format!("malformed atom `{text}`"),
    };
    let open = text.find('(').ok_or_else(bad)?;
    if !text.ends_with(')') {
        return Err(bad());
    }
    let name = text[..open].trim();
    let inner = text[open + 1..text.len() - 1].trim();
    let args: Vec<String> = if inner.is_empty() {
        Vec::new()
    } else {
        inner.split(',').map(|a| a.trim().to_string()).collect()
    };
    if !is_ident(name) || args.iter().any(|a| !is_ident(a)) {
        return Err(bad());
    }
    Ok((name.to_string(), args))
}

/// Parses `q(u, c) :- Bookings(u, h, d), Hotels(h, p), Cities(c, p, k).`
///
/// Lines starting with `%` or `//` are comments. A query without a body is
/// written `q(x) :- .` or just `q(x).`
pub fn parse_query(src: &str) -> Result<ConjunctiveQuery> {
    let text: String = src
        .lines()
        .filter(|l| {
            let t = l.trim_start();
            !t.starts_with('%') && !t.starts_with("//")
        })
        .collect::<Vec<_>>()
        .join(" ");
    let text = text.trim();
    let text = text.strip_suffix('.').ok_or_else(|| Error::Parse {
        line: 1,
        column: text.len().max(1),
        message: "a query ends with `.`".into(),
    })?;
    let (head, body) = match text.split_once(":-") {
        Some((h, b)) => (h, b.trim()),
        None => (text, ""),
    };
    let (name, free) = parse_atom(head)?;
    let mut atoms = Vec::new();
    // split the body at commas outside parentheses
    let mut depth = 0usize;
    let mut start = 0;
    let bytes: Vec<char> = body.chars().collect();
    let mut pieces = Vec::new();
    for (i, &c) in bytes.iter().enumerate() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                pieces.push(bytes[start..i].iter().collect::<String>());
                start = i + 1;
            }
            _ => {}
        }
    }
    pieces.push(bytes[start..].iter().collect::<String>());
    for p in pieces.iter().filter(|p| !p.trim().is_empty()) {
        let (relation, args) = parse_atom(p)?;
        atoms.push(Atom { relation, args });
    }
    ConjunctiveQuery::new(name, free, atoms)
}

/// The diagram of a query: one variable of sort `D` per query variable, one
/// output-free assignment per atom, the head variables as inputs and no outputs.
pub fn query_to_diagram(q: &ConjunctiveQuery) -> Result<DotDiagram> {
    let vars = q.variables();
    let index: HashMap<&str, Var> = vars
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), Var::from_index(i)))
        .collect();
    let assignments = q
        .atoms
        .iter()
        .map(|a| {
            Assignment::new(
                Vec::new(),
                Symbol::new(&a.relation),
                a.args.iter().map(|v| index[v.as_str()]).collect(),
            )
        })
        .collect();
    let inputs = q.free.iter().map(|v| index[v.as_str()]).collect();
    DotDiagram::new(
        vec![Sort::new(DOMAIN_SORT); vars.len()],
        assignments,
        inputs,
        Vec::new(),
    )
}

/// A finite structure over the domain `{0, …, elements.len() - 1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RelationalInstance {
    /// Names of the domain elements, by index.
    pub elements: Vec<String>,
    pub relations: BTreeMap<String, Relation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub arity: usize,
    pub tuples: BTreeSet<Vec<usize>>,
}

impl RelationalInstance {
    pub fn domain_size(&self) -> usize {
        self.elements.len()
    }

    /// Index of element `name`, adding it to the domain if new.
    pub fn element(&mut self, name: &str) -> usize {
        match self.elements.iter().position(|e| e == name) {
            Some(i) => i,
            None => {
                self.elements.push(name.to_string());
                self.elements.len() - 1
            }
        }
    }

    pub fn insert(&mut self, relation: &str, tuple: Vec<usize>) -> Result<()> {
        if let Some(&x) = tuple.iter().find(|&&x| x >= self.elements.len()) {
            return Err(Error::InvalidInput(format!(
                "element {x} is outside the domain of size {}",
                self.elements.len()
            )));
        }
        let r = self
            .relations
            .entry(relation.to_string())
            .or_insert_with(|| Relation {
                arity: tuple.len(),
                tuples: BTreeSet::new(),
            });
        if r.arity != tuple.len() {
            return Err(Error::InvalidInput(format!(
                "relation `{relation}` has arity {} but got a tuple of length {}",
                r.arity,
                tuple.len()
            )));
        }
        r.tuples.insert(tuple);
        Ok(())
    }

    /// Reads rows `Relation,elem,elem,…`. A row headed `domain` lists elements
    /// without adding a tuple, which fixes their order or adds isolated ones.
    /// Elements are numbered in order of first appearance.
    pub fn from_csv(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut inst = RelationalInstance::default();
        for row in rdr.records() {
            let row = row?;
            let mut fields = row.iter();
            let Some(rel) = fields.next().filter(|r| !r.is_empty()) else {
                continue;
            };
            let tuple: Vec<usize> = fields.map(|e| inst.element(e)).collect();
            if rel != "domain" {
                inst.insert(rel, tuple)?;
            }
        }
        Ok(inst)
    }

    /// Checks the instance against a query: arities agree, and relations the
    /// query mentions but the instance lacks become empty.
    pub fn conform(&mut self, q: &ConjunctiveQuery) -> Result<()> {
        for (r, &k) in &q.relations {
            let rel = self.relations.entry(r.clone()).or_insert_with(|| Relation {
                arity: k,
                tuples: BTreeSet::new(),
            });
            if rel.arity != k {
                return Err(Error::InvalidInput(format!(
                    "query uses `{r}` with arity {k}, the instance with arity {}",
                    rel.arity
                )));
            }
        }
        Ok(())
    }
}

/// The Boolean interpretation of an instance: `D` has the domain size and a
/// relation of arity `k` is the `1 × n^k` row with a `true` at the mixed-radix
/// index (first argument most significant) of every tuple.
pub fn instance_to_interpretation(inst: &RelationalInstance) -> Result<Interpretation<bool>> {
    let n = inst.domain_size();
    let mut interp = Interpretation::new().with_sort(Sort::new(DOMAIN_SORT), n);
    for (name, rel) in &inst.relations {
        let cols = u32::try_from(rel.arity)
            .ok()
            .and_then(|k| n.checked_pow(k))
            .ok_or_else(|| Error::ResourceLimit(format!("relation `{name}` is too wide")))?;
        let mut row = vec![false; cols];
        for t in &rel.tuples {
            row[t.iter().fold(0, |acc, &x| acc * n + x)] = true;
        }
        interp = interp.with_symbol(Symbol::new(name), Matrix::row(row));
    }
    Ok(interp)
}

/// Answers of `q` on `inst` through the diagram pipeline: algebraise, then
/// evaluate over the Booleans. Each answer lists head values in head order.
pub fn evaluate_query(
    q: &ConjunctiveQuery,
    inst: &RelationalInstance,
    opts: AlgebraiseOptions,
    eval: &EvalOptions,
) -> Result<BTreeSet<Vec<usize>>> {
    let mut inst = inst.clone();
    inst.conform(q)?;
    let f = query_to_diagram(q)?;
    let mut store = TermStore::new();
    let t = algebrise(&mut store, &f, opts)?;
    let m = interpret_term(&store, t, &instance_to_interpretation(&inst)?, eval)?;
    let n = inst.domain_size();
    let k = q.free.len();
    let mut out = BTreeSet::new();
    for col in 0..m.cols() {
        if *m.get(0, col) {
            let mut tuple = vec![0; k];
            let mut rest = col;
            for slot in tuple.iter_mut().rev() {
                *slot = rest % n;
                rest /= n;
            }
            out.insert(tuple);
        }
    }
    Ok(out)
}

/// Answers by nested loops over every valuation of the query variables.
pub fn naive_join(q: &ConjunctiveQuery, inst: &RelationalInstance) -> BTreeSet<Vec<usize>> {
    let vars = q.variables();
    let n = inst.domain_size();
    let pos: HashMap<&str, usize> = vars
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i))
        .collect();
    let mut out = BTreeSet::new();
    if n == 0 && !vars.is_empty() {
        return out;
    }
    let mut val = vec![0usize; vars.len()];
    loop {
        let holds = q.atoms.iter().all(|a| {
            let t: Vec<usize> = a.args.iter().map(|v| val[pos[v.as_str()]]).collect();
            inst.relations
                .get(&a.relation)
                .is_some_and(|r| r.tuples.contains(&t))
        });
        if holds {
            out.insert(val[..q.free.len()].to_vec());
        }
        // odometer step
        let mut i = 0;
        while i < val.len() {
            val[i] += 1;
            if val[i] < n {
                break;
            }
            val[i] = 0;
            i += 1;
        }
        if i == val.len() {
            return out;
        }
    }
}
