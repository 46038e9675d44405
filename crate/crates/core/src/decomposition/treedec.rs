use std::collections::BTreeSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::graph::SimpleGraph;
use crate::diagram::Diagnostic;
use crate::error::{Error, Result};

/// Largest graph the exact subset dynamic programme accepts.
pub const EXACT_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TdMode {
    /// Minimum-fill elimination ordering.
    #[default]
    Heuristic,
    /// Optimal width by dynamic programming over vertex subsets.
    Exact,
}

impl std::str::FromStr for TdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heuristic" => Ok(TdMode::Heuristic),
            "exact" => Ok(TdMode::Exact),
            _ => Err(Error::InvalidInput(format!(
                "unknown decomposition mode `{s}`"
            ))),
        }
    }
}

/// Bags indexed by id, joined by the edges of a tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDecomposition {
    pub bags: Vec<BTreeSet<usize>>,
    pub edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    /// Largest bag size minus one; zero when every bag is empty.
    pub fn width(&self) -> usize {
        self.bags
            .iter()
            .map(BTreeSet::len)
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        adj
    }

    pub fn to_dot(&self, labels: &[String]) -> String {
        let mut s = String::from("graph tree_decomposition {\n  node [shape=box];\n");
        for (i, bag) in self.bags.iter().enumerate() {
            let names: Vec<String> = bag
                .iter()
                .map(|&v| labels.get(v).cloned().unwrap_or_else(|| format!("v{v}")))
                .collect();
            writeln!(
                s,
                "  b{i} [label=\"{}\"];",
                super::graph::escape(&names.join(", "))
            )
            .expect("string write");
        }
        for (a, b) in &self.edges {
            writeln!(s, "  b{a} -- b{b};").expect("string write");
        }
        s.push_str("}\n");
        s
    }
}

pub fn tree_decomposition(g: &SimpleGraph, mode: TdMode) -> Result<TreeDecomposition> {
    let order = match mode {
        TdMode::Heuristic => min_fill_order(g),
        TdMode::Exact => exact_order(g)?,
    };
    Ok(normalize(from_elimination_order(g, &order)))
}

/// Greedy elimination: repeatedly remove the vertex whose neighbourhood needs the
/// fewest fill edges, breaking ties by degree and then by index.
pub fn min_fill_order(g: &SimpleGraph) -> Vec<usize> {
    let n = g.num_vertices();
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).clone()).collect();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(usize, usize, usize)> = None;
        for v in (0..n).filter(|&v| alive[v]) {
            let ns: Vec<usize> = adj[v].iter().copied().collect();
            let mut fill = 0;
            for (i, &a) in ns.iter().enumerate() {
                for &b in &ns[i + 1..] {
                    if !adj[a].contains(&b) {
                        fill += 1;
                    }
                }
            }
            let key = (fill, ns.len(), v);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        let (_, _, v) = best.expect("a live vertex remains");
        eliminate(&mut adj, v);
        alive[v] = false;
        order.push(v);
    }
    order
}

fn eliminate(adj: &mut [BTreeSet<usize>], v: usize) {
    let ns: Vec<usize> = adj[v].iter().copied().collect();
    for (i, &a) in ns.iter().enumerate() {
        adj[a].remove(&v);
        for &b in &ns[i + 1..] {
            adj[a].insert(b);
            adj[b].insert(a);
        }
    }
    adj[v].clear();
}

/// Vertices outside `s ∪ {v}` reachable from `v` through `s`.
fn q_set(nbr: &[u32], s: u32, v: usize) -> u32 {
    let mut comp = 1u32 << v;
    loop {
        let mut reach = 0u32;
        let mut bits = comp;
        while bits != 0 {
            let u = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            reach |= nbr[u];
        }
        let grown = comp | (reach & s);
        if grown == comp {
            return reach & !s & !(1u32 << v);
        }
        comp = grown;
    }
}

/// An elimination ordering of minimum width, by dynamic programming over subsets.
pub fn exact_order(g: &SimpleGraph) -> Result<Vec<usize>> {
    let n = g.num_vertices();
    if n > EXACT_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "exact tree decomposition supports at most {EXACT_LIMIT} vertices, got {n}"
        )));
    }
    let nbr: Vec<u32> = (0..n)
        .map(|v| g.neighbors(v).iter().fold(0u32, |m, &u| m | (1 << u)))
        .collect();
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    // tw[s]: least possible maximum |Q| when the vertices of s are eliminated first.
    let mut tw = vec![u8::MAX; 1usize << n];
    tw[0] = 0;
    for s in 1..=full {
        let mut best = u8::MAX;
        let mut bits = s;
        while bits != 0 {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = s & !(1 << v);
            let prev = tw[rest as usize];
            if prev >= best {
                continue;
            }
            let q = q_set(&nbr, rest, v).count_ones() as u8;
            best = best.min(prev.max(q));
        }
        tw[s as usize] = best;
    }
    let mut order = vec![0; n];
    let mut s = full;
    for pos in (0..n).rev() {
        let target = tw[s as usize];
        let mut bits = s;
        let v = loop {
            let v = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let rest = s & !(1 << v);
            if tw[rest as usize].max(q_set(&nbr, rest, v).count_ones() as u8) == target {
                break v;
            }
        };
        order[pos] = v;
        s &= !(1 << v);
    }
    Ok(order)
}

/// Standard construction: eliminating `v` creates the bag `{v} ∪ N⁺(v)`, hung below
/// the bag of the earliest-eliminated vertex of `N⁺(v)`. Components are chained.
pub fn from_elimination_order(g: &SimpleGraph, order: &[usize]) -> TreeDecomposition {
    let n = g.num_vertices();
    if n == 0 {
        return TreeDecomposition {
            bags: vec![BTreeSet::new()],
            edges: Vec::new(),
        };
    }
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut adj: Vec<BTreeSet<usize>> = (0..n).map(|v| g.neighbors(v).clone()).collect();
    let mut bags = Vec::with_capacity(n);
    let mut parent = vec![None; n];
    for (i, &v) in order.iter().enumerate() {
        let later: BTreeSet<usize> = adj[v].iter().copied().filter(|&u| pos[u] > i).collect();
        parent[i] = later.iter().map(|&u| pos[u]).min();
        let mut bag = later;
        bag.insert(v);
        bags.push(bag);
        eliminate(&mut adj, v);
    }
    let mut edges = Vec::new();
    let mut last_root: Option<usize> = None;
    for (i, up) in parent.iter().enumerate() {
        match *up {
            Some(p) => edges.push((i, p)),
            None => {
                if let Some(r) = last_root {
                    edges.push((r, i));
                }
                last_root = Some(i);
            }
        }
    }
    TreeDecomposition { bags, edges }
}

/// Contracts every tree edge whose one bag is contained in the other, so no bag is
/// a subset of a neighbour and the bag count is at most the vertex count.
pub fn normalize(td: TreeDecomposition) -> TreeDecomposition {
    let mut bags: Vec<Option<BTreeSet<usize>>> = td.bags.into_iter().map(Some).collect();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); bags.len()];
    for &(a, b) in &td.edges {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    loop {
        let mut merged = false;
        for a in 0..bags.len() {
            let Some(ba) = &bags[a] else { continue };
            let target = adj[a]
                .iter()
                .copied()
                .find(|&b| bags[b].as_ref().is_some_and(|bb| ba.is_subset(bb)));
            if let Some(b) = target {
                let ns: Vec<usize> = adj[a].iter().copied().filter(|&x| x != b).collect();
                for x in ns {
                    adj[x].remove(&a);
                    adj[x].insert(b);
                    adj[b].insert(x);
                }
                adj[b].remove(&a);
                adj[a].clear();
                bags[a] = None;
                merged = true;
            }
        }
        if !merged {
            break;
        }
    }
    let ids: Vec<Option<usize>> = bags
        .iter()
        .scan(0usize, |next, b| {
            Some(b.as_ref().map(|_| {
                *next += 1;
                *next - 1
            }))
        })
        .collect();
    let mut edges = Vec::new();
    for (a, ns) in adj.iter().enumerate() {
        for &b in ns.range(a + 1..) {
            edges.push((ids[a].expect("live"), ids[b].expect("live")));
        }
    }
    edges.sort_unstable();
    TreeDecomposition {
        bags: bags.into_iter().flatten().collect(),
        edges,
    }
}

/// Checks the tree shape and the three decomposition conditions against `g`.
///
/// Condition 0 is the tree shape, 1 vertex coverage, 2 edge coverage and 3 the
/// connectedness of each vertex's bags.
pub fn validate_tree_decomposition(td: &TreeDecomposition, g: &SimpleGraph) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let k = td.bags.len();
    if k == 0 {
        diags.push(Diagnostic::new(None, 0, "no bags"));
        return diags;
    }
    if let Some(&(a, b)) = td.edges.iter().find(|&&(a, b)| a >= k || b >= k || a == b) {
        diags.push(Diagnostic::new(
            None,
            0,
            format!("bad tree edge ({a}, {b})"),
        ));
        return diags;
    }
    if td.edges.len() != k - 1 || !connected(k, &td.edges, |_| true) {
        diags.push(Diagnostic::new(None, 0, "bags do not form a tree"));
        return diags;
    }
    if let Some((i, v)) = td
        .bags
        .iter()
        .enumerate()
        .find_map(|(i, b)| b.iter().find(|&&v| v >= g.num_vertices()).map(|&v| (i, v)))
    {
        diags.push(Diagnostic::new(
            Some(i),
            1,
            format!("bag holds unknown vertex {v}"),
        ));
        return diags;
    }
    for v in 0..g.num_vertices() {
        if !td.bags.iter().any(|b| b.contains(&v)) {
            diags.push(Diagnostic::new(None, 1, format!("vertex {v} is in no bag")));
        }
    }
    for (u, v) in g.edges() {
        if !td.bags.iter().any(|b| b.contains(&u) && b.contains(&v)) {
            diags.push(Diagnostic::new(
                None,
                2,
                format!("edge {{{u}, {v}}} is in no bag"),
            ));
        }
    }
    for v in 0..g.num_vertices() {
        let holds = |i: usize| td.bags[i].contains(&v);
        let sub: Vec<(usize, usize)> = td
            .edges
            .iter()
            .copied()
            .filter(|&(a, b)| holds(a) && holds(b))
            .collect();
        let members = (0..k).filter(|&i| holds(i)).count();
        if members > 0 && sub.len() != members - 1 {
            diags.push(Diagnostic::new(
                None,
                3,
                format!("bags holding vertex {v} are not connected"),
            ));
        }
    }
    diags
}

/// Whether the nodes selected by `keep` are connected by `edges` (trivially true if none).
pub(crate) fn connected(n: usize, edges: &[(usize, usize)], keep: impl Fn(usize) -> bool) -> bool {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        if keep(a) && keep(b) {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let Some(start) = (0..n).find(|&i| keep(i)) else {
        return true;
    };
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    (0..n).filter(|&i| keep(i)).all(|i| seen[i])
}
