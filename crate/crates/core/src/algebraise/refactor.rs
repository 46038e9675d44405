use std::collections::{BTreeMap, HashMap};

use crate::decomposition::{
    dependency_hypergraph, validate_branch_decomposition, BranchDecomposition,
};
use crate::diagram::{
    Assignment, CallNode, DotDiagram, HierarchicalDotDiagram, MonoidalSignature, NodeId, Symbol,
    Var,
};
use crate::error::{Error, Result};

/// Signature with the sorts and symbols `f` actually uses.
pub(crate) fn signature_of(f: &DotDiagram) -> Result<MonoidalSignature> {
    let mut sig = MonoidalSignature::new();
    for s in f.sorts() {
        sig.add_sort(s.clone());
    }
    for (sym, ty) in f.used_symbols()? {
        sig.add_symbol(sym, ty.dom, ty.cod);
    }
    Ok(sig)
}

enum Item {
    Inline(usize),
    Call {
        symbol: Symbol,
        node: NodeId,
        inputs: Vec<Var>,
        outputs: Vec<Var>,
    },
}

/// Rewrites `f` as a hierarchy in which every body has at most two assignments,
/// following the branch decomposition `b` of its dependency hypergraph.
///
/// Each inner tree node becomes a call node whose interface is the set of its
/// variables shared with the rest of `f`; variables produced inside the block
/// are outputs, the others inputs. The `in` and `out` leaves are first made
/// siblings so that no block has to carry interface variables past its cut.
/// Block symbols are named `{prefix}~{k}`. Unfolding the result gives a
/// diagram isomorphic to `f`.
pub fn refactor_by_branch_decomposition(
    f: &DotDiagram,
    b: &BranchDecomposition,
    prefix: &str,
) -> Result<HierarchicalDotDiagram> {
    let h = dependency_hypergraph(f);
    let diags = validate_branch_decomposition(b, &h);
    if !diags.is_empty() {
        return Err(Error::Validation(diags));
    }
    let base = signature_of(f)?;
    let n = f.assignments().len();
    if n <= 2 {
        return Ok(HierarchicalDotDiagram::single(base, prefix, f.clone()));
    }
    let (in_edge, out_edge) = (n, n + 1);
    let b = b.moved_next_to(out_edge, in_edge);
    let adj = b.adjacency();
    let at = b.hyperedge_at();
    let p = adj[b.leaf_of[in_edge]][0];
    let q = *adj[p]
        .iter()
        .find(|&&y| y != b.leaf_of[in_edge] && y != b.leaf_of[out_edge])
        .expect("inner node of degree 3");

    // Rooted at q, away from p.
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); b.nodes];
    let mut order = Vec::new();
    let mut stack = vec![(q, p)];
    while let Some((x, parent)) = stack.pop() {
        order.push(x);
        for &y in &adj[x] {
            if y != parent {
                children[x].push(y);
                stack.push((y, x));
            }
        }
    }

    let mut total = vec![0usize; f.num_vars()];
    for a in f.assignments() {
        for v in distinct(a.vars()) {
            total[v.index()] += 1;
        }
    }
    let mut on_interface = vec![false; f.num_vars()];
    for v in f.inputs().iter().chain(f.outputs()) {
        on_interface[v.index()] = true;
    }

    let mut below: Vec<Vec<usize>> = vec![Vec::new(); b.nodes];
    let mut items: Vec<Option<Item>> = (0..b.nodes).map(|_| None).collect();
    let mut nodes: Vec<CallNode> = Vec::new();
    for &x in order.iter().rev() {
        if children[x].is_empty() {
            let a = at[x].expect("leaf carries a hyperedge");
            debug_assert!(a < n);
            below[x] = vec![a];
            items[x] = Some(Item::Inline(a));
            continue;
        }
        let mut set: Vec<usize> = children[x]
            .iter()
            .flat_map(|&c| below[c].iter().copied())
            .collect();
        set.sort_unstable();

        let (inputs, outputs) = if x == q {
            (f.inputs().to_vec(), f.outputs().to_vec())
        } else {
            block_interface(f, &set, &total, &on_interface)
        };
        let mut assignments = Vec::new();
        let mut signature = MonoidalSignature::new();
        let mut defn = BTreeMap::new();
        let mut kids = Vec::new();
        for &c in &children[x] {
            match items[c].take().expect("child item built") {
                Item::Inline(a) => assignments.push(f.assignments()[a].clone()),
                Item::Call {
                    symbol,
                    node,
                    inputs,
                    outputs,
                } => {
                    signature.add_symbol(symbol.clone(), f.sorts_of(&inputs), f.sorts_of(&outputs));
                    defn.insert(symbol.clone(), node);
                    kids.push(node);
                    assignments.push(Assignment::new(outputs, symbol, inputs));
                }
            }
        }
        let body = DotDiagram::from_used(f.sorts(), assignments, &inputs, &outputs)?;
        let id = nodes.len();
        nodes.push(CallNode {
            name: format!("{prefix}~{id}"),
            signature,
            body,
            defn,
            children: kids,
            var_names: Vec::new(),
        });
        below[x] = set;
        items[x] = Some(Item::Call {
            symbol: Symbol::new(&format!("{prefix}~{id}")),
            node: id,
            inputs,
            outputs,
        });
    }
    let root = nodes.len() - 1;
    nodes[root].name = prefix.to_string();
    Ok(HierarchicalDotDiagram { base, nodes, root })
}

fn distinct(vs: impl Iterator<Item = Var>) -> Vec<Var> {
    let mut out: Vec<Var> = Vec::new();
    for v in vs {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Variables of the assignments in `set` that also occur outside it, in order
/// of first occurrence, split into (consumed only, produced).
fn block_interface(
    f: &DotDiagram,
    set: &[usize],
    total: &[usize],
    on_interface: &[bool],
) -> (Vec<Var>, Vec<Var>) {
    let mut count: HashMap<Var, usize> = HashMap::new();
    let mut seen = Vec::new();
    let mut produced = Vec::new();
    for &a in set {
        let a = &f.assignments()[a];
        for v in distinct(a.vars()) {
            let c = count.entry(v).or_insert(0);
            if *c == 0 {
                seen.push(v);
            }
            *c += 1;
        }
        produced.extend(a.outputs.iter().copied());
    }
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for v in seen {
        if on_interface[v.index()] || count[&v] < total[v.index()] {
            if produced.contains(&v) {
                outputs.push(v);
            } else {
                inputs.push(v);
            }
        }
    }
    (inputs, outputs)
}
