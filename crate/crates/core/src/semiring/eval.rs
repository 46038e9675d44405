use std::collections::HashMap;

use super::value::Value;
use super::{GeneratorKind, Interpretation, Matrix, Semiring};
use crate::error::{Error, Result};
use crate::term::{TermId, TermKind, TermStore};

/// Default bound on the dimension of any intermediate interface.
pub const DEFAULT_DIM_CAP: usize = 1 << 16;
/// Default bound on the number of entries of any intermediate matrix.
pub const DEFAULT_MAX_ENTRIES: usize = 1 << 22;

#[derive(Clone, Copy, Debug)]
pub struct EvalOptions {
    pub dim_cap: usize,
    pub max_entries: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            dim_cap: DEFAULT_DIM_CAP,
            max_entries: DEFAULT_MAX_ENTRIES,
        }
    }
}

/// Fails before any work is done for a node whose matrix would be too large.
pub(crate) fn check_node_size<R: Semiring>(
    store: &TermStore,
    x: TermId,
    interp: &Interpretation<R>,
    opts: &EvalOptions,
) -> Result<()> {
    let cols = interp.dims_product(store.dom(x), opts.dim_cap)?;
    let rows = interp.dims_product(store.cod(x), opts.dim_cap)?;
    match rows.checked_mul(cols) {
        Some(n) if n <= opts.max_entries => Ok(()),
        _ => Err(Error::ResourceLimit(format!(
            "a {rows}×{cols} intermediate matrix exceeds the cap of {} entries",
            opts.max_entries
        ))),
    }
}

/// Reference counts of each reachable node among reachable parents.
pub(crate) fn parent_counts(store: &TermStore, order: &[TermId]) -> HashMap<TermId, usize> {
    let mut counts: HashMap<TermId, usize> = order.iter().map(|x| (*x, 0)).collect();
    for x in order {
        if let Some((a, b)) = store.kind(*x).children() {
            *counts.get_mut(&a).expect("reachable") += 1;
            *counts.get_mut(&b).expect("reachable") += 1;
        }
    }
    counts
}

/// Generator kind and the two block dimensions it acts on.
pub(crate) fn generator_dims<R: Semiring>(
    kind: &TermKind,
    interp: &Interpretation<R>,
    cap: usize,
) -> Result<Option<(GeneratorKind, usize, usize)>> {
    let g = match kind {
        TermKind::Id(s) => (GeneratorKind::Id, interp.dims_product(s, cap)?, 0),
        TermKind::Swap(a, b) => {
            let (da, db) = (interp.dims_product(a, cap)?, interp.dims_product(b, cap)?);
            interp.dims_product(&[&a[..], &b[..]].concat(), cap)?;
            (GeneratorKind::Swap, da, db)
        }
        TermKind::Copy(s) => {
            interp.dims_product(&[&s[..], &s[..]].concat(), cap)?;
            (GeneratorKind::Copy, interp.dims_product(s, cap)?, 0)
        }
        TermKind::Equate(s) => {
            interp.dims_product(&[&s[..], &s[..]].concat(), cap)?;
            (GeneratorKind::Equate, interp.dims_product(s, cap)?, 0)
        }
        TermKind::Del(s) => (GeneratorKind::Del, interp.dims_product(s, cap)?, 0),
        TermKind::New(s) => (GeneratorKind::New, interp.dims_product(s, cap)?, 0),
        _ => return Ok(None),
    };
    Ok(Some(g))
}

/// Semantics of a term: structural recursion over the shared DAG, each distinct
/// sub-term evaluated once.
///
/// Wiring is evaluated as index maps and `id ⊗ M ⊗ id` as `M` plus the
/// identity sizes, so only the matrices actually produced count against
/// `max_entries`.
pub fn interpret_term<R: Semiring>(
    store: &TermStore,
    t: TermId,
    interp: &Interpretation<R>,
    opts: &EvalOptions,
) -> Result<Matrix<R>> {
    let cap = opts.max_entries;
    let order = store.topo_order(t);
    let mut pending = parent_counts(store, &order);
    let mut memo: HashMap<TermId, Value<R>> = HashMap::new();
    for &x in &order {
        interp.dims_product(store.dom(x), opts.dim_cap)?;
        interp.dims_product(store.cod(x), opts.dim_cap)?;
        let kind = store.kind(x);
        let v = if let Some((g, n, m)) = generator_dims(kind, interp, opts.dim_cap)? {
            Value::generator(g, n, m, cap)?
        } else {
            match kind {
                TermKind::Symbol(s) => Value::matrix(interp.matrix(s)?.clone(), cap)?,
                TermKind::Seq(a, b) => Value::compose(&memo[a], &memo[b], cap)?,
                TermKind::Par(a, b) => Value::tensor(&memo[a], &memo[b], cap)?,
                _ => unreachable!("generators handled above"),
            }
        };
        if let Some((a, b)) = kind.children() {
            for c in [a, b] {
                let p = pending.get_mut(&c).expect("reachable");
                *p -= 1;
                if *p == 0 {
                    memo.remove(&c);
                }
            }
        }
        memo.insert(x, v);
    }
    memo.remove(&t).expect("root evaluated").into_dense(cap)
}
