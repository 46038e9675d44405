use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::eval::{check_node_size, generator_dims, parent_counts};
use super::{generator_matrix, EvalOptions, Interpretation, Matrix, Semiring};
use crate::error::{Error, Result};
use crate::term::{TermId, TermKind, TermStore};

/// Index of a circuit node.
pub type NodeRef = usize;

#[derive(Clone, Debug, PartialEq)]
pub enum CircuitNode<R> {
    Const(R),
    Add(NodeRef, NodeRef),
    Mul(NodeRef, NodeRef),
}

/// A DAG of binary `+`/`·` gates over constant leaves.
///
/// Nodes are stored children-first. Entry `(i, j)` of the compiled matrix is the value
/// of node `roots[i * cols + j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArithmeticCircuit<R> {
    nodes: Vec<CircuitNode<R>>,
    roots: Vec<NodeRef>,
    rows: usize,
    cols: usize,
}

const ZERO: NodeRef = 0;
const ONE: NodeRef = 1;

struct Builder<R> {
    nodes: Vec<CircuitNode<R>>,
    consts: HashMap<String, NodeRef>,
    gates: HashMap<(bool, NodeRef, NodeRef), NodeRef>,
}

impl<R: Semiring> Builder<R> {
    fn new() -> Self {
        let mut b = Builder {
            nodes: vec![CircuitNode::Const(R::zero()), CircuitNode::Const(R::one())],
            consts: HashMap::new(),
            gates: HashMap::new(),
        };
        b.consts.insert(R::zero().encode(), ZERO);
        b.consts.insert(R::one().encode(), ONE);
        b
    }

    fn constant(&mut self, v: &R) -> NodeRef {
        if v.is_zero() {
            return ZERO;
        }
        if v.is_one() {
            return ONE;
        }
        let key = v.encode();
        if let Some(&r) = self.consts.get(&key) {
            return r;
        }
        let r = self.nodes.len();
        self.nodes.push(CircuitNode::Const(v.clone()));
        self.consts.insert(key, r);
        r
    }

    fn gate(&mut self, is_add: bool, a: NodeRef, b: NodeRef) -> NodeRef {
        let key = (is_add, a.min(b), a.max(b));
        if let Some(&r) = self.gates.get(&key) {
            return r;
        }
        let r = self.nodes.len();
        self.nodes.push(if is_add {
            CircuitNode::Add(key.1, key.2)
        } else {
            CircuitNode::Mul(key.1, key.2)
        });
        self.gates.insert(key, r);
        r
    }

    fn add(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        match (a, b) {
            (ZERO, x) | (x, ZERO) => x,
            _ => self.gate(true, a, b),
        }
    }

    fn mul(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        match (a, b) {
            (ZERO, _) | (_, ZERO) => ZERO,
            (ONE, x) | (x, ONE) => x,
            _ => self.gate(false, a, b),
        }
    }

    fn constants(&mut self, m: &Matrix<R>) -> SymMatrix {
        SymMatrix {
            rows: m.rows(),
            cols: m.cols(),
            data: m.entries().iter().map(|v| self.constant(v)).collect(),
        }
    }

    fn matmul(&mut self, a: &SymMatrix, b: &SymMatrix) -> SymMatrix {
        let mut data = Vec::with_capacity(a.rows * b.cols);
        for i in 0..a.rows {
            for j in 0..b.cols {
                // left-deep sum chain over the non-zero products
                let mut acc = ZERO;
                for k in 0..a.cols {
                    let p = self.mul(a.data[i * a.cols + k], b.data[k * b.cols + j]);
                    acc = self.add(acc, p);
                }
                data.push(acc);
            }
        }
        SymMatrix {
            rows: a.rows,
            cols: b.cols,
            data,
        }
    }

    fn kronecker(&mut self, a: &SymMatrix, b: &SymMatrix) -> SymMatrix {
        let rows = a.rows * b.rows;
        let cols = a.cols * b.cols;
        let mut data = vec![ZERO; rows * cols];
        for i in 0..a.rows {
            for j in 0..a.cols {
                let x = a.data[i * a.cols + j];
                if x == ZERO {
                    continue;
                }
                for k in 0..b.rows {
                    for l in 0..b.cols {
                        data[(i * b.rows + k) * cols + j * b.cols + l] =
                            self.mul(x, b.data[k * b.cols + l]);
                    }
                }
            }
        }
        SymMatrix { rows, cols, data }
    }
}

#[derive(Clone)]
struct SymMatrix {
    rows: usize,
    cols: usize,
    data: Vec<NodeRef>,
}

impl<R: Semiring> ArithmeticCircuit<R> {
    /// Compiles the evaluation of `t` under `interp` into a circuit.
    pub fn compile(
        store: &TermStore,
        t: TermId,
        interp: &Interpretation<R>,
        opts: &EvalOptions,
    ) -> Result<Self> {
        let order = store.topo_order(t);
        let mut pending = parent_counts(store, &order);
        let mut memo: HashMap<TermId, SymMatrix> = HashMap::new();
        let mut b = Builder::<R>::new();
        for &x in &order {
            check_node_size(store, x, interp, opts)?;
            let kind = store.kind(x);
            let m = if let Some((g, n, m)) = generator_dims(kind, interp, opts.dim_cap)? {
                b.constants(&generator_matrix::<R>(g, n, m))
            } else {
                match kind {
                    TermKind::Symbol(s) => {
                        let m = interp.matrix(s)?.clone();
                        b.constants(&m)
                    }
                    TermKind::Seq(l, r) => {
                        let (l, r) = (memo[l].clone(), memo[r].clone());
                        if l.cols != r.rows {
                            return Err(Error::DimensionMismatch("composite interface".into()));
                        }
                        b.matmul(&l, &r)
                    }
                    TermKind::Par(l, r) => {
                        let (l, r) = (memo[l].clone(), memo[r].clone());
                        b.kronecker(&l, &r)
                    }
                    _ => unreachable!("generators handled above"),
                }
            };
            if let Some((l, r)) = kind.children() {
                for c in [l, r] {
                    let p = pending.get_mut(&c).expect("reachable");
                    *p -= 1;
                    if *p == 0 {
                        memo.remove(&c);
                    }
                }
            }
            memo.insert(x, m);
        }
        let root = memo.remove(&t).expect("root compiled");
        Ok(ArithmeticCircuit {
            nodes: b.nodes,
            roots: root.data,
            rows: root.rows,
            cols: root.cols,
        })
    }

    /// Builds a circuit from raw parts, checking ordering and binary fan-in.
    pub fn from_parts(
        nodes: Vec<CircuitNode<R>>,
        roots: Vec<NodeRef>,
        rows: usize,
        cols: usize,
    ) -> Result<Self> {
        for (i, n) in nodes.iter().enumerate() {
            if let CircuitNode::Add(a, b) | CircuitNode::Mul(a, b) = n {
                if *a >= i || *b >= i {
                    return Err(Error::InvalidInput(format!(
                        "circuit node {i} refers to a later node"
                    )));
                }
            }
        }
        if roots.len() != rows * cols {
            return Err(Error::InvalidInput(
                "root table does not match rows × cols".into(),
            ));
        }
        if roots.iter().any(|r| *r >= nodes.len()) {
            return Err(Error::InvalidInput("root refers to a missing node".into()));
        }
        Ok(ArithmeticCircuit {
            nodes,
            roots,
            rows,
            cols,
        })
    }

    pub fn nodes(&self) -> &[CircuitNode<R>] {
        &self.nodes
    }

    pub fn roots(&self) -> &[NodeRef] {
        &self.roots
    }

    /// Root node holding entry `(row, col)`.
    pub fn root_of(&self, row: usize, col: usize) -> NodeRef {
        self.roots[row * self.cols + col]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Number of nodes reachable from the roots.
    pub fn size(&self) -> usize {
        self.reachable().iter().filter(|r| **r).count()
    }

    fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<NodeRef> = self.roots.clone();
        while let Some(x) = stack.pop() {
            if std::mem::replace(&mut seen[x], true) {
                continue;
            }
            if let CircuitNode::Add(a, b) | CircuitNode::Mul(a, b) = &self.nodes[x] {
                stack.push(*a);
                stack.push(*b);
            }
        }
        seen
    }

    /// Drops unreachable nodes and renumbers.
    pub fn pruned(&self) -> Self {
        let seen = self.reachable();
        let mut map = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, n) in self.nodes.iter().enumerate() {
            if !seen[i] {
                continue;
            }
            map[i] = nodes.len();
            nodes.push(match n {
                CircuitNode::Const(v) => CircuitNode::Const(v.clone()),
                CircuitNode::Add(a, b) => CircuitNode::Add(map[*a], map[*b]),
                CircuitNode::Mul(a, b) => CircuitNode::Mul(map[*a], map[*b]),
            });
        }
        ArithmeticCircuit {
            nodes,
            roots: self.roots.iter().map(|r| map[*r]).collect(),
            rows: self.rows,
            cols: self.cols,
        }
    }

    /// Evaluates every node in `S`, mapping constants through `lift`.
    pub fn eval_with<S: Semiring>(&self, lift: impl Fn(&R) -> S) -> Vec<S> {
        let mut val: Vec<S> = Vec::with_capacity(self.nodes.len());
        for n in &self.nodes {
            let v = match n {
                CircuitNode::Const(c) => lift(c),
                CircuitNode::Add(a, b) => val[*a].add(&val[*b]),
                CircuitNode::Mul(a, b) => val[*a].mul(&val[*b]),
            };
            val.push(v);
        }
        val
    }

    /// Values of all roots, as the compiled matrix.
    pub fn eval(&self) -> Matrix<R> {
        let val = self.eval_with(R::clone);
        let data = self.roots.iter().map(|r| val[*r].clone()).collect();
        Matrix::from_vec(self.rows, self.cols, data).expect("root table matches shape")
    }

    pub fn to_json(&self) -> CircuitJson {
        CircuitJson {
            semiring: R::NAME.to_string(),
            rows: self.rows,
            cols: self.cols,
            nodes: self
                .nodes
                .iter()
                .map(|n| match n {
                    CircuitNode::Const(v) => CircuitNodeJson {
                        op: "const".into(),
                        value: Some(v.encode()),
                        args: None,
                    },
                    CircuitNode::Add(a, b) => CircuitNodeJson {
                        op: "+".into(),
                        value: None,
                        args: Some([*a, *b]),
                    },
                    CircuitNode::Mul(a, b) => CircuitNodeJson {
                        op: "*".into(),
                        value: None,
                        args: Some([*a, *b]),
                    },
                })
                .collect(),
            roots: self.roots.clone(),
        }
    }

    pub fn from_json(j: &CircuitJson) -> Result<Self> {
        if j.semiring != R::NAME {
            return Err(Error::InvalidInput(format!(
                "circuit is over `{}`, expected `{}`",
                j.semiring,
                R::NAME
            )));
        }
        let nodes = j
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let args = || {
                    n.args
                        .ok_or_else(|| Error::InvalidInput(format!("node {i} has no args")))
                };
                Ok(match n.op.as_str() {
                    "const" => {
                        let v = n
                            .value
                            .as_deref()
                            .ok_or_else(|| Error::InvalidInput(format!("node {i} has no value")))?;
                        CircuitNode::Const(R::decode(v)?)
                    }
                    "+" => {
                        let [a, b] = args()?;
                        CircuitNode::Add(a, b)
                    }
                    "*" => {
                        let [a, b] = args()?;
                        CircuitNode::Mul(a, b)
                    }
                    other => return Err(Error::InvalidInput(format!("unknown gate `{other}`"))),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(nodes, j.roots.clone(), j.rows, j.cols)
    }
}

/// Serialized circuit: node table (children first) and a row-major root table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitJson {
    pub semiring: String,
    pub rows: usize,
    pub cols: usize,
    pub nodes: Vec<CircuitNodeJson>,
    pub roots: Vec<NodeRef>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitNodeJson {
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub args: Option<[NodeRef; 2]>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::{Rational, Tropical};

    #[test]
    fn constants_only() {
        let c: ArithmeticCircuit<Rational> = ArithmeticCircuit::from_parts(
            vec![CircuitNode::Const(Rational::new(1.into(), 2.into()))],
            vec![0, 0],
            2,
            1,
        )
        .unwrap();
        let m = c.eval();
        let h = Rational::new(1.into(), 2.into());
        assert_eq!(m.entries(), &[h.clone(), h]);
    }

    #[test]
    fn half_plus_half() {
        let h = Rational::new(1.into(), 2.into());
        let c = ArithmeticCircuit::from_parts(
            vec![CircuitNode::Const(h), CircuitNode::Add(0, 0)],
            vec![1],
            1,
            1,
        )
        .unwrap();
        assert_eq!(c.eval().entries(), &[Rational::from_integer(1.into())]);
    }

    #[test]
    fn tropical_min_of_sums() {
        // min(2 + 3, 4)
        let c = ArithmeticCircuit::from_parts(
            vec![
                CircuitNode::Const(Tropical::Finite(2)),
                CircuitNode::Const(Tropical::Finite(3)),
                CircuitNode::Const(Tropical::Finite(4)),
                CircuitNode::Mul(0, 1),
                CircuitNode::Add(3, 2),
            ],
            vec![4],
            1,
            1,
        )
        .unwrap();
        assert_eq!(c.eval().entries(), &[Tropical::Finite(4)]);
    }

    #[test]
    fn rejects_forward_reference() {
        let r = ArithmeticCircuit::<bool>::from_parts(vec![CircuitNode::Add(0, 1)], vec![0], 1, 1);
        assert!(r.is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = ArithmeticCircuit::from_parts(
            vec![
                CircuitNode::Const(Rational::new(1.into(), 3.into())),
                CircuitNode::Const(Rational::new(2.into(), 7.into())),
                CircuitNode::Mul(0, 1),
                CircuitNode::Add(2, 0),
            ],
            vec![3, 2],
            1,
            2,
        )
        .unwrap();
        let text = serde_json::to_string(&c.to_json()).unwrap();
        let back = ArithmeticCircuit::<Rational>::from_json(&serde_json::from_str(&text).unwrap())
            .unwrap();
        assert_eq!(back, c);
    }
}
