use std::fs;
use std::path::Path;

use dotalg::apps::{
    attack_tree_to_diagram, parse_query, query_to_diagram, AttackTree, ConjunctiveQuery,
    RelationalInstance,
};
use dotalg::diagram::{DotDiagram, HierarchicalDotDiagram, NodeId};
use dotalg::frontend::{desugar, parse, ProgramAst};
use dotalg::{Error, Result};

use crate::Common;

pub enum Source {
    Program(ProgramAst),
    Query {
        query: ConjunctiveQuery,
        instance: Option<RelationalInstance>,
    },
    Attack(AttackTree),
    Diagram,
}

/// A loaded input together with the hierarchy every pipeline stage works on.
pub struct Loaded {
    pub source: Source,
    pub h: HierarchicalDotDiagram,
}

impl Loaded {
    pub fn node(&self, name: Option<&str>) -> Result<NodeId> {
        match name {
            None => Ok(self.h.root),
            Some(n) => self
                .h
                .node_by_name(n)
                .ok_or_else(|| Error::InvalidInput(format!("no node named `{n}`"))),
        }
    }
}

fn single(f: DotDiagram, name: &str) -> Result<HierarchicalDotDiagram> {
    let sig = f.signature()?;
    Ok(HierarchicalDotDiagram::single(sig, name, f))
}

pub fn load(c: &Common) -> Result<Loaded> {
    let text = fs::read_to_string(&c.input)?;
    let ext = c
        .input
        .extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    match ext.as_str() {
        "cq" => {
            let query = parse_query(&text)?;
            let instance = match &c.instance {
                Some(p) => Some(load_instance(p, &query)?),
                None => None,
            };
            let h = single(query_to_diagram(&query)?, &query.name)?;
            Ok(Loaded {
                source: Source::Query { query, instance },
                h,
            })
        }
        "json" => {
            let v: serde_json::Value = serde_json::from_str(&text)?;
            if v.get("vars").is_some() {
                let f: DotDiagram = serde_json::from_value(v)?;
                let name = c
                    .input
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("diagram")
                    .to_string();
                Ok(Loaded {
                    source: Source::Diagram,
                    h: single(f, &name)?,
                })
            } else {
                let t = AttackTree::from_json(&text)?;
                let h = single(attack_tree_to_diagram(&t)?, &t.root)?;
                Ok(Loaded {
                    source: Source::Attack(t),
                    h,
                })
            }
        }
        _ => {
            let ast = parse(&text)?;
            let h = desugar(&ast, c.function.as_deref())?;
            Ok(Loaded {
                source: Source::Program(ast),
                h,
            })
        }
    }
}

fn load_instance(path: &Path, q: &ConjunctiveQuery) -> Result<RelationalInstance> {
    let mut inst = RelationalInstance::from_csv(fs::File::open(path)?)?;
    inst.conform(q)?;
    Ok(inst)
}
