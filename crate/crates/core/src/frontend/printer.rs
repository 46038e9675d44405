use std::collections::HashSet;
use std::fmt::Write;

use crate::diagram::{HierarchicalDotDiagram, Var};
use crate::error::{Error, Result};
use crate::semiring::parse_flip_probability;

use super::desugar::rational_literal;
use super::parser::RESERVED;

/// Prints a hierarchy back as program source, one `let` per assignment.
///
/// Works for diagrams in program form: every variable is either a distinct
/// parameter or written by exactly one earlier assignment, and the node symbols
/// are the Boolean program symbols or calls to children.
pub fn pretty_program(h: &HierarchicalDotDiagram) -> Result<String> {
    let mut out = String::new();
    for (k, v) in h.bottom_up_order()?.into_iter().enumerate() {
        let node = &h.nodes[v];
        let body = &node.body;
        let names = identifiers(node.var_names.as_slice(), body.num_vars());
        let not_program = |why: &str| {
            Error::InvalidInput(format!(
                "node `{}` is not in program form: {why}",
                node.name
            ))
        };

        let mut defined = vec![false; body.num_vars()];
        for &x in body.inputs() {
            if defined[x.index()] {
                return Err(not_program("repeated parameter"));
            }
            defined[x.index()] = true;
        }
        if k > 0 {
            out.push('\n');
        }
        let params: Vec<&str> = body
            .inputs()
            .iter()
            .map(|x| names[x.index()].as_str())
            .collect();
        writeln!(out, "{}({}) :=", node.name, params.join(", ")).expect("string write");

        for a in body.assignments() {
            let arg = |x: &Var| names[x.index()].as_str();
            if let Some(x) = a.inputs.iter().find(|x| !defined[x.index()]) {
                return Err(not_program(&format!("`{}` used before definition", arg(x))));
            }
            let name = a.symbol.name();
            let rhs = match (name, a.inputs.as_slice()) {
                ("and", [l, r]) => format!("{} ∧ {}", arg(l), arg(r)),
                ("or", [l, r]) => format!("{} ∨ {}", arg(l), arg(r)),
                ("not", [x]) => format!("¬{}", arg(x)),
                ("observe", [x]) if a.outputs.is_empty() => {
                    writeln!(out, "  observe({});", arg(x)).expect("string write");
                    continue;
                }
                _ => match parse_flip_probability(name) {
                    Some(p) if a.inputs.is_empty() => format!("flip({})", rational_literal(&p)),
                    _ if node.defn.contains_key(&a.symbol) => {
                        let args: Vec<&str> = a.inputs.iter().map(arg).collect();
                        format!("{name}({})", args.join(", "))
                    }
                    _ => return Err(not_program(&format!("unsupported symbol `{name}`"))),
                },
            };
            if a.outputs.is_empty() {
                return Err(not_program(&format!("`{name}` has no outputs to bind")));
            }
            for y in &a.outputs {
                if defined[y.index()] {
                    return Err(not_program(&format!("`{}` written twice", arg(y))));
                }
                defined[y.index()] = true;
            }
            let targets: Vec<&str> = a.outputs.iter().map(arg).collect();
            writeln!(out, "  let {} = {rhs};", targets.join(", ")).expect("string write");
        }
        if let Some(x) = body.vars().find(|x| !defined[x.index()]) {
            return Err(not_program(&format!(
                "`{}` is never defined",
                names[x.index()]
            )));
        }
        let rets: Vec<&str> = body
            .outputs()
            .iter()
            .map(|x| names[x.index()].as_str())
            .collect();
        writeln!(out, "  {}", rets.join(", ")).expect("string write");
    }
    Ok(out)
}

/// Unique source identifiers derived from recorded variable names.
fn identifiers(recorded: &[String], n: usize) -> Vec<String> {
    let mut used = HashSet::new();
    (0..n)
        .map(|i| {
            let base = recorded
                .get(i)
                .map(|s| s.trim_start_matches('%').to_string())
                .filter(|s| {
                    s.chars()
                        .next()
                        .is_some_and(|c| c.is_alphabetic() || c == '_')
                        && s.chars()
                            .all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
                        && !RESERVED.contains(&s.as_str())
                })
                .unwrap_or_else(|| format!("v{i}"));
            let mut name = base.clone();
            let mut k = 1;
            while !used.insert(name.clone()) {
                name = format!("{base}_{k}");
                k += 1;
            }
            name
        })
        .collect()
}
