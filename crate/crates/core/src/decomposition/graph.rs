use std::collections::BTreeSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::diagram::DotDiagram;

/// An undirected simple graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SimpleGraph {
    adj: Vec<BTreeSet<usize>>,
}

#[derive(Serialize, Deserialize)]
struct SimpleGraphRepr {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Serialize for SimpleGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SimpleGraphRepr {
            vertices: self.num_vertices(),
            edges: self.edges().collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SimpleGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = SimpleGraphRepr::deserialize(d)?;
        let mut g = SimpleGraph::new(r.vertices);
        for (u, v) in r.edges {
            if u >= r.vertices || v >= r.vertices {
                return Err(serde::de::Error::custom(format!(
                    "edge ({u}, {v}) out of range"
                )));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }
}

impl SimpleGraph {
    pub fn new(n: usize) -> Self {
        SimpleGraph {
            adj: vec![BTreeSet::new(); n],
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    /// Adds `{u, v}`; self-loops are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u != v {
            self.adj[u].insert(v);
            self.adj[v].insert(u);
        }
    }

    pub fn add_clique(&mut self, vs: &[usize]) {
        for (i, &u) in vs.iter().enumerate() {
            for &v in &vs[i + 1..] {
                self.add_edge(u, v);
            }
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(&v)
    }

    pub fn neighbors(&self, v: usize) -> &BTreeSet<usize> {
        &self.adj[v]
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.range(u + 1..).map(move |&v| (u, v)))
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn to_dot(&self, labels: &[String]) -> String {
        let mut s = String::from("graph primal {\n");
        for v in 0..self.num_vertices() {
            let label = labels.get(v).cloned().unwrap_or_else(|| format!("v{v}"));
            writeln!(s, "  {v} [label=\"{}\"];", escape(&label)).expect("string write");
        }
        for (u, v) in self.edges() {
            writeln!(s, "  {u} -- {v};").expect("string write");
        }
        s.push_str("}\n");
        s
    }
}

/// Vertices are the diagram's variables; two distinct variables are adjacent when
/// they share an assignment, are both inputs, or are both outputs.
pub fn primal_graph(f: &DotDiagram) -> SimpleGraph {
    let mut g = SimpleGraph::new(f.num_vars());
    let idx = |vs: &[crate::diagram::Var]| vs.iter().map(|v| v.index()).collect::<Vec<_>>();
    for a in f.assignments() {
        g.add_clique(&idx(&a.vars().collect::<Vec<_>>()));
    }
    g.add_clique(&idx(f.inputs()));
    g.add_clique(&idx(f.outputs()));
    g
}

/// One hyperedge: a label and its sorted, duplicate-free vertex set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HyperEdge {
    pub label: String,
    pub vertices: Vec<usize>,
}

/// A hypergraph with vertices `0..n` and an ordered list of hyperedges.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypergraph {
    pub vertices: usize,
    pub edges: Vec<HyperEdge>,
}

impl Hypergraph {
    pub fn new(vertices: usize) -> Self {
        Hypergraph {
            vertices,
            edges: Vec::new(),
        }
    }

    pub fn add_edge(
        &mut self,
        label: impl Into<String>,
        vs: impl IntoIterator<Item = usize>,
    ) -> usize {
        let set: BTreeSet<usize> = vs.into_iter().collect();
        assert!(
            set.iter().all(|&v| v < self.vertices),
            "hyperedge vertex out of range"
        );
        self.edges.push(HyperEdge {
            label: label.into(),
            vertices: set.into_iter().collect(),
        });
        self.edges.len() - 1
    }

    /// Bipartite view: round nodes for vertices, boxes for hyperedges.
    pub fn to_dot(&self, labels: &[String]) -> String {
        let mut s = String::from("graph dependency {\n");
        for v in 0..self.vertices {
            let label = labels.get(v).cloned().unwrap_or_else(|| format!("v{v}"));
            writeln!(s, "  v{v} [shape=circle,label=\"{}\"];", escape(&label))
                .expect("string write");
        }
        for (i, e) in self.edges.iter().enumerate() {
            writeln!(s, "  e{i} [shape=box,label=\"{}\"];", escape(&e.label))
                .expect("string write");
            for v in &e.vertices {
                writeln!(s, "  e{i} -- v{v};").expect("string write");
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Hyperedges are the assignments in order, then `in` and `out`.
pub fn dependency_hypergraph(f: &DotDiagram) -> Hypergraph {
    let mut h = Hypergraph::new(f.num_vars());
    for (i, a) in f.assignments().iter().enumerate() {
        h.add_edge(format!("a{i}:{}", a.symbol), a.vars().map(|v| v.index()));
    }
    h.add_edge("in", f.inputs().iter().map(|v| v.index()));
    h.add_edge("out", f.outputs().iter().map(|v| v.index()));
    h
}

pub(crate) fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
