use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{TermId, TermKind, TermStore};
use crate::diagram::{Sort, Symbol, SymbolType};
use crate::error::{Error, Result};

/// Serializable node table for a single term, children listed before parents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDag {
    pub nodes: Vec<TermDagNode>,
    pub root: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermDagNode {
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<Symbol>,
    /// Sort list of a generator; for `swap` the first block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sorts: Option<Vec<Sort>>,
    /// Second block of a `swap`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sorts2: Option<Vec<Sort>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<usize>,
    pub dom: Vec<Sort>,
    pub cod: Vec<Sort>,
}

impl TermDag {
    pub fn export(store: &TermStore, t: TermId) -> TermDag {
        let order = store.topo_order(t);
        let pos: HashMap<TermId, usize> = order.iter().enumerate().map(|(i, x)| (*x, i)).collect();
        let nodes = order
            .iter()
            .map(|&x| {
                let mut n = TermDagNode {
                    op: String::new(),
                    symbol: None,
                    sorts: None,
                    sorts2: None,
                    left: None,
                    right: None,
                    dom: store.dom(x).to_vec(),
                    cod: store.cod(x).to_vec(),
                };
                let (op, sorts) = match store.kind(x) {
                    TermKind::Symbol(s) => {
                        n.symbol = Some(s.clone());
                        ("symbol", None)
                    }
                    TermKind::Id(s) => ("id", Some(s)),
                    TermKind::Swap(a, b) => {
                        n.sorts2 = Some(b.to_vec());
                        ("swap", Some(a))
                    }
                    TermKind::Copy(s) => ("copy", Some(s)),
                    TermKind::Del(s) => ("del", Some(s)),
                    TermKind::Equate(s) => ("equate", Some(s)),
                    TermKind::New(s) => ("new", Some(s)),
                    TermKind::Seq(a, b) => {
                        n.left = Some(pos[a]);
                        n.right = Some(pos[b]);
                        ("seq", None)
                    }
                    TermKind::Par(a, b) => {
                        n.left = Some(pos[a]);
                        n.right = Some(pos[b]);
                        ("par", None)
                    }
                };
                n.op = op.to_string();
                n.sorts = sorts.map(|s| s.to_vec());
                n
            })
            .collect();
        TermDag {
            nodes,
            root: order.len() - 1,
        }
    }

    /// Rebuilds the term inside `store`, re-checking every typing rule.
    pub fn import(&self, store: &mut TermStore) -> Result<TermId> {
        let mut ids: Vec<TermId> = Vec::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.iter().enumerate() {
            let child = |c: Option<usize>| -> Result<TermId> {
                let c = c.ok_or_else(|| bad(i, "missing child"))?;
                ids.get(c)
                    .copied()
                    .ok_or_else(|| bad(i, "child must precede parent"))
            };
            let sorts = || n.sorts.clone().ok_or_else(|| bad(i, "missing sorts"));
            let id = match n.op.as_str() {
                "symbol" => {
                    let s = n.symbol.clone().ok_or_else(|| bad(i, "missing symbol"))?;
                    store.symbol(s, &SymbolType::new(n.dom.clone(), n.cod.clone()))?
                }
                "id" => store.id(&sorts()?),
                "swap" => {
                    let b = n
                        .sorts2
                        .clone()
                        .ok_or_else(|| bad(i, "missing second block"))?;
                    store.swap(&sorts()?, &b)
                }
                "copy" => store.copy(&sorts()?),
                "del" => store.del(&sorts()?),
                "equate" => store.equate(&sorts()?),
                "new" => store.new_(&sorts()?),
                "seq" => {
                    let (a, b) = (child(n.left)?, child(n.right)?);
                    store.seq(a, b)?
                }
                "par" => {
                    let (a, b) = (child(n.left)?, child(n.right)?);
                    store.par(a, b)
                }
                other => return Err(bad(i, &format!("unknown op `{other}`"))),
            };
            if store.dom(id) != n.dom || store.cod(id) != n.cod {
                return Err(bad(i, "recorded dom/cod disagree with the node"));
            }
            ids.push(id);
        }
        ids.get(self.root)
            .copied()
            .ok_or_else(|| Error::InvalidInput("term root out of range".into()))
    }
}

fn bad(i: usize, msg: &str) -> Error {
    Error::InvalidInput(format!("term node {i}: {msg}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let b = Sort::new("B");
        let mut st = TermStore::new();
        let f = st
            .symbol(
                "f".into(),
                &SymbolType::new(vec![b.clone(), b.clone()], vec![b.clone()]),
            )
            .unwrap();
        let sw = st.swap(std::slice::from_ref(&b), std::slice::from_ref(&b));
        let c = st.copy(std::slice::from_ref(&b));
        let fs = st.seq(f, sw).unwrap();
        let t = st.seq(fs, c).unwrap();
        let t = st.par(t, c);
        let dag = TermDag::export(&st, t);
        let text = serde_json::to_string(&dag).unwrap();
        let back: TermDag = serde_json::from_str(&text).unwrap();
        let mut st2 = TermStore::new();
        let t2 = back.import(&mut st2).unwrap();
        assert_eq!(TermDag::export(&st2, t2), dag);
        assert_eq!(st2.dag_size(t2), st.dag_size(t));
        assert_eq!(st2.width(t2), st.width(t));
    }
}
