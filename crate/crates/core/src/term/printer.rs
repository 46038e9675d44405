use std::collections::HashMap;
use std::fmt::Write;

use super::{TermId, TermKind, TermStore};
use crate::diagram::Sort;

fn sorts(s: &[Sort]) -> String {
    let names: Vec<&str> = s.iter().map(Sort::name).collect();
    format!("({})", names.join(","))
}

fn leaf(kind: &TermKind) -> String {
    match kind {
        TermKind::Symbol(s) => s.to_string(),
        TermKind::Id(s) => format!("id{}", sorts(s)),
        TermKind::Swap(a, b) => format!("swap{}{}", sorts(a), sorts(b)),
        TermKind::Copy(s) => format!("copy{}", sorts(s)),
        TermKind::Del(s) => format!("del{}", sorts(s)),
        TermKind::Equate(s) => format!("equate{}", sorts(s)),
        TermKind::New(s) => format!("new{}", sorts(s)),
        TermKind::Seq(..) | TermKind::Par(..) => unreachable!("not a leaf"),
    }
}

impl TermStore {
    /// Fully expanded infix form, or `None` if it would exceed `max_len` bytes.
    pub fn pretty(&self, t: TermId, max_len: usize) -> Option<String> {
        // Expanded lengths, saturating, so huge shared terms are rejected cheaply.
        let mut len: HashMap<TermId, usize> = HashMap::new();
        for x in self.topo_order(t) {
            let l = match self.kind(x) {
                TermKind::Seq(a, b) | TermKind::Par(a, b) => {
                    len[a].saturating_add(len[b]).saturating_add(5)
                }
                k => leaf(k).len(),
            };
            len.insert(x, l);
        }
        if len[&t] > max_len {
            return None;
        }
        let mut out = String::with_capacity(len[&t]);
        self.write_expanded(t, &mut out);
        Some(out)
    }

    fn write_expanded(&self, t: TermId, out: &mut String) {
        match self.kind(t) {
            TermKind::Seq(a, b) => {
                out.push('(');
                self.write_expanded(*a, out);
                out.push_str(" ∘ ");
                self.write_expanded(*b, out);
                out.push(')');
            }
            TermKind::Par(a, b) => {
                out.push('(');
                self.write_expanded(*a, out);
                out.push_str(" ⊗ ");
                self.write_expanded(*b, out);
                out.push(')');
            }
            k => out.push_str(&leaf(k)),
        }
    }

    /// One line per shared node: `tN = tA ∘ tB`, root last.
    pub fn pretty_shared(&self, t: TermId) -> String {
        let order = self.topo_order(t);
        let name: HashMap<TermId, usize> = order.iter().enumerate().map(|(i, x)| (*x, i)).collect();
        let mut out = String::new();
        for x in &order {
            let rhs = match self.kind(*x) {
                TermKind::Seq(a, b) => format!("t{} ∘ t{}", name[a], name[b]),
                TermKind::Par(a, b) => format!("t{} ⊗ t{}", name[a], name[b]),
                k => leaf(k),
            };
            let _ = writeln!(
                out,
                "t{} = {}    : {} -> {}",
                name[x],
                rhs,
                sorts(self.dom(*x)),
                sorts(self.cod(*x))
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use crate::diagram::{Sort, SymbolType};
    use crate::term::TermStore;

    #[test]
    fn infix_form() {
        let b = Sort::new("Bool");
        let mut st = TermStore::new();
        let or = st
            .symbol(
                "or".into(),
                &SymbolType::new(vec![b.clone(), b.clone()], vec![b.clone()]),
            )
            .unwrap();
        let c = st.copy(std::slice::from_ref(&b));
        let t = st.seq(or, c).unwrap();
        assert_eq!(st.pretty(t, 1000).unwrap(), "(or ∘ copy(Bool))");
        assert!(st.pretty(t, 3).is_none());
        assert!(st.pretty_shared(t).lines().count() == 3);
    }
}
