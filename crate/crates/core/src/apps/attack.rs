use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebraise::{algebrise, AlgebraiseOptions};
use crate::diagram::{Assignment, DotDiagram, Sort, Symbol, Var};
use crate::error::{Error, Result};
use crate::semiring::{interpret_term, EvalOptions, Interpretation, Matrix, Semiring, Tropical};
use crate::term::TermStore;

/// Sort of attack-tree nodes: index 0 means "not achieved", 1 "achieved".
pub const STEP_SORT: &str = "S";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum AttackNode {
    Leaf { name: String, cost: u64 },
    And { name: String, children: Vec<String> },
    Or { name: String, children: Vec<String> },
}

impl AttackNode {
    pub fn name(&self) -> &str {
        match self {
            AttackNode::Leaf { name, .. }
            | AttackNode::And { name, .. }
            | AttackNode::Or { name, .. } => name,
        }
    }

    fn children(&self) -> &[String] {
        match self {
            AttackNode::Leaf { .. } => &[],
            AttackNode::And { children, .. } | AttackNode::Or { children, .. } => children,
        }
    }
}

/// An attack tree (or DAG: a node may be shared by several gates).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackTree {
    pub root: String,
    pub nodes: Vec<AttackNode>,
}

impl AttackTree {
    pub fn from_json(text: &str) -> Result<Self> {
        let t: AttackTree = serde_json::from_str(text)?;
        t.order()?;
        Ok(t)
    }

    /// Nodes reachable from the root, children before parents.
    fn order(&self) -> Result<Vec<&AttackNode>> {
        let by_name: HashMap<&str, &AttackNode> =
            self.nodes.iter().map(|n| (n.name(), n)).collect();
        if by_name.len() != self.nodes.len() {
            return Err(Error::InvalidInput(
                "attack tree repeats a node name".into(),
            ));
        }
        let get = |name: &str| {
            by_name
                .get(name)
                .copied()
                .ok_or_else(|| Error::InvalidInput(format!("unknown attack node `{name}`")))
        };
        // 0 unvisited, 1 on stack, 2 done
        let mut state: HashMap<&str, u8> = HashMap::new();
        let mut out = Vec::new();
        let mut stack = vec![(get(&self.root)?, false)];
        while let Some((n, expanded)) = stack.pop() {
            if expanded {
                state.insert(n.name(), 2);
                out.push(n);
                continue;
            }
            match state.get(n.name()) {
                Some(2) => continue,
                Some(1) => {
                    return Err(Error::InvalidInput(format!(
                        "attack node `{}` lies on a cycle",
                        n.name()
                    )))
                }
                _ => {}
            }
            if matches!(n, AttackNode::And { children, .. } | AttackNode::Or { children, .. } if children.is_empty())
            {
                return Err(Error::InvalidInput(format!(
                    "gate `{}` has no children",
                    n.name()
                )));
            }
            state.insert(n.name(), 1);
            stack.push((n, true));
            for c in n.children() {
                let c = get(c)?;
                if state.get(c.name()) == Some(&1) {
                    return Err(Error::InvalidInput(format!(
                        "attack node `{}` lies on a cycle",
                        c.name()
                    )));
                }
                if state.get(c.name()) != Some(&2) {
                    stack.push((c, false));
                }
            }
        }
        Ok(out)
    }

    /// Reachable leaves with their costs, in a fixed order.
    pub fn leaves(&self) -> Result<Vec<(String, u64)>> {
        Ok(self
            .order()?
            .into_iter()
            .filter_map(|n| match n {
                AttackNode::Leaf { name, cost } => Some((name.clone(), *cost)),
                _ => None,
            })
            .collect())
    }
}

fn leaf_symbol(cost: u64) -> Symbol {
    Symbol::new(&format!("leaf_{cost}"))
}

fn gate_symbol(and: bool, k: usize) -> Symbol {
    Symbol::new(&format!("{}_{k}", if and { "and" } else { "or" }))
}

/// One variable of sort `S` per reachable node. A leaf of cost `c` is the
/// assignment `x = leaf_c()`, a gate `x = and_k(children)` or `or_k(…)`; the
/// root is the single output.
pub fn attack_tree_to_diagram(t: &AttackTree) -> Result<DotDiagram> {
    let order = t.order()?;
    let var: HashMap<&str, Var> = order
        .iter()
        .enumerate()
        .map(|(i, n)| (n.name(), Var::from_index(i)))
        .collect();
    let assignments = order
        .iter()
        .map(|n| {
            let (sym, ins) = match n {
                AttackNode::Leaf { cost, .. } => (leaf_symbol(*cost), Vec::new()),
                AttackNode::And { children, .. } | AttackNode::Or { children, .. } => (
                    gate_symbol(matches!(n, AttackNode::And { .. }), children.len()),
                    children.iter().map(|c| var[c.as_str()]).collect(),
                ),
            };
            Assignment::new(vec![var[n.name()]], sym, ins)
        })
        .collect();
    DotDiagram::new(
        vec![Sort::new(STEP_SORT); order.len()],
        assignments,
        Vec::new(),
        vec![var[t.root.as_str()]],
    )
}

/// The min-cost reading: `leaf_c` is the column `(0, c)` (skipping a step is
/// free, performing it costs `c`), and a gate is the `2 × 2^k` 0/∞ matrix of
/// its Boolean function.
pub fn tropical_interpretation(t: &AttackTree) -> Result<Interpretation<Tropical>> {
    let mut interp = Interpretation::new().with_sort(Sort::new(STEP_SORT), 2);
    for n in t.order()? {
        match n {
            AttackNode::Leaf { cost, .. } => {
                interp = interp.with_symbol(
                    leaf_symbol(*cost),
                    Matrix::column(vec![Tropical::Finite(0), Tropical::Finite(*cost)]),
                );
            }
            AttackNode::And { children, .. } | AttackNode::Or { children, .. } => {
                let and = matches!(n, AttackNode::And { .. });
                let k = children.len();
                let cols = 1usize
                    .checked_shl(k as u32)
                    .filter(|c| *c <= 1 << 20)
                    .ok_or_else(|| {
                        Error::ResourceLimit(format!("gate `{}` is too wide", n.name()))
                    })?;
                let mut m = Matrix::zeros(2, cols);
                for col in 0..cols {
                    // the first child is the most significant bit
                    let ones = col.count_ones() as usize;
                    let out = if and { ones == k } else { ones > 0 };
                    m.set(usize::from(out), col, Tropical::one());
                }
                interp = interp.with_symbol(gate_symbol(and, k), m);
            }
        }
    }
    Ok(interp)
}

/// Cheapest set of basic steps achieving the root, through the diagram pipeline.
/// `Infinity` when the root cannot be achieved.
pub fn attack_min_cost(
    t: &AttackTree,
    opts: AlgebraiseOptions,
    eval: &EvalOptions,
) -> Result<Tropical> {
    let f = attack_tree_to_diagram(t)?;
    let mut store = TermStore::new();
    let term = algebrise(&mut store, &f, opts)?;
    let m = interpret_term(&store, term, &tropical_interpretation(t)?, eval)?;
    Ok(*m.get(1, 0))
}

/// Minimum over all subsets of leaves that achieve the root of their total cost.
pub fn attack_brute_force(t: &AttackTree) -> Result<Tropical> {
    let order = t.order()?;
    let leaves: Vec<&str> = order
        .iter()
        .filter(|n| matches!(n, AttackNode::Leaf { .. }))
        .map(|n| n.name())
        .collect();
    if leaves.len() > 24 {
        return Err(Error::ResourceLimit(format!(
            "{} leaves are too many to enumerate",
            leaves.len()
        )));
    }
    let mut best = Tropical::Infinity;
    for mask in 0u32..(1 << leaves.len()) {
        let mut value: HashMap<&str, bool> = HashMap::new();
        let mut cost = 0u64;
        for n in &order {
            let v = match n {
                AttackNode::Leaf { name, cost: c } => {
                    let i = leaves.iter().position(|l| l == name).expect("leaf listed");
                    let on = mask >> i & 1 == 1;
                    if on {
                        cost += c;
                    }
                    on
                }
                AttackNode::And { children, .. } => children.iter().all(|c| value[c.as_str()]),
                AttackNode::Or { children, .. } => children.iter().any(|c| value[c.as_str()]),
            };
            value.insert(n.name(), v);
        }
        if value[t.root.as_str()] {
            best = best.add(&Tropical::Finite(cost));
        }
    }
    Ok(best)
}

/// A reproducible random attack DAG with `leaves` basic steps and gates of
/// fan-in 2 or 3; later gates may reuse earlier nodes.
pub fn random_attack_tree(seed: u64, leaves: usize) -> AttackTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nodes: Vec<AttackNode> = (0..leaves.max(1))
        .map(|i| AttackNode::Leaf {
            name: format!("s{i}"),
            cost: rng.gen_range(1..=20),
        })
        .collect();
    // nodes not yet used by any gate
    let mut open: Vec<String> = nodes.iter().map(|n| n.name().to_string()).collect();
    let mut g = 0;
    while open.len() > 1 {
        let k = rng.gen_range(2..=3usize).min(open.len());
        let mut children = Vec::new();
        for _ in 0..k {
            let i = rng.gen_range(0..open.len());
            children.push(open.swap_remove(i));
        }
        if rng.gen_bool(0.2) {
            let extra = nodes[rng.gen_range(0..nodes.len())].name().to_string();
            if !children.contains(&extra) {
                children.push(extra);
            }
        }
        let name = format!("g{g}");
        g += 1;
        nodes.push(if rng.gen_bool(0.5) {
            AttackNode::And {
                name: name.clone(),
                children,
            }
        } else {
            AttackNode::Or {
                name: name.clone(),
                children,
            }
        });
        open.push(name);
    }
    let root = open.pop().expect("one node remains");
    AttackTree { root, nodes }
}

/// Leaf costs by name, for reporting.
pub fn leaf_costs(t: &AttackTree) -> Result<BTreeMap<String, u64>> {
    Ok(t.leaves()?.into_iter().collect())
}
