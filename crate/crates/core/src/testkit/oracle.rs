use crate::diagram::{DotDiagram, Var};
use crate::error::{Error, Result};
use crate::semiring::{Interpretation, Matrix, Semiring};

/// Largest number of joint valuations the oracle will enumerate.
pub const ORACLE_LIMIT: u128 = 10_000_000;

/// Brute-force semantics: for every joint valuation of all variables, multiply the
/// symbol-matrix entries selected by each assignment and add the product into the
/// cell addressed by the output and input valuations.
///
/// Shares no code with the term evaluator; only the symbol tables are common.
pub fn oracle_semantics<R: Semiring>(
    f: &DotDiagram,
    interp: &Interpretation<R>,
) -> Result<Matrix<R>> {
    let dims: Vec<usize> = f
        .sorts()
        .iter()
        .map(|s| interp.dim(s))
        .collect::<Result<_>>()?;
    let total = dims
        .iter()
        .fold(1u128, |acc, &d| acc.saturating_mul(d as u128));
    if total > ORACLE_LIMIT {
        return Err(Error::ResourceLimit(format!(
            "oracle would enumerate {total} valuations (limit {ORACLE_LIMIT})"
        )));
    }
    let list_dim = |vars: &[Var]| -> Result<usize> {
        vars.iter().try_fold(1usize, |acc, v| {
            acc.checked_mul(dims[v.index()])
                .filter(|x| (*x as u128) <= ORACLE_LIMIT)
                .ok_or_else(|| Error::ResourceLimit("oracle interface too large".into()))
        })
    };
    let rows = list_dim(f.outputs())?;
    let cols = list_dim(f.inputs())?;

    let mats: Vec<&Matrix<R>> = f
        .assignments()
        .iter()
        .map(|a| interp.matrix(&a.symbol))
        .collect::<Result<_>>()?;
    for (a, m) in f.assignments().iter().zip(&mats) {
        if m.rows() != list_dim(&a.outputs)? || m.cols() != list_dim(&a.inputs)? {
            return Err(Error::DimensionMismatch(format!(
                "matrix for `{}` is {}×{}, assignment needs {}×{}",
                a.symbol,
                m.rows(),
                m.cols(),
                list_dim(&a.outputs)?,
                list_dim(&a.inputs)?
            )));
        }
    }

    let index = |vars: &[Var], val: &[usize]| -> usize {
        vars.iter()
            .fold(0usize, |acc, v| acc * dims[v.index()] + val[v.index()])
    };

    let mut out = Matrix::zeros(rows, cols);
    let mut val = vec![0usize; dims.len()];
    if dims.contains(&0) {
        return Ok(out);
    }
    loop {
        let mut prod = R::one();
        for (a, m) in f.assignments().iter().zip(&mats) {
            let e = m.get(index(&a.outputs, &val), index(&a.inputs, &val));
            prod = prod.mul(e);
            if prod.is_zero() {
                break;
            }
        }
        if !prod.is_zero() {
            let (r, c) = (index(f.outputs(), &val), index(f.inputs(), &val));
            let cell = out.get(r, c).add(&prod);
            out.set(r, c, cell);
        }
        // odometer, last variable fastest
        let mut i = dims.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            val[i] += 1;
            if val[i] < dims[i] {
                break;
            }
            val[i] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{MonoidalSignature, Sort, Symbol, SymbolType};
    use crate::semiring::{substochastic, Rational};

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn flip_column() {
        let b = Sort::new("Bool");
        let mut sig = MonoidalSignature::new();
        sig.add_sort(b.clone());
        sig.add_symbol("flip(3/10)".into(), vec![], vec![b.clone()]);
        let s = substochastic(&sig).unwrap();
        let d = DotDiagram::symbol(Symbol::new("flip(3/10)"), &SymbolType::new(vec![], vec![b]));
        let m = oracle_semantics(&d, &s).unwrap();
        assert_eq!(m.entries(), &[q(7, 10), q(3, 10)]);
    }

    #[test]
    fn identity_wiring() {
        let b = Sort::new("Bool");
        let mut sig = MonoidalSignature::new();
        sig.add_sort(b.clone());
        let s = substochastic(&sig).unwrap();
        let d = DotDiagram::identity(&[b.clone(), b]);
        assert_eq!(oracle_semantics(&d, &s).unwrap(), Matrix::identity(4));
    }
}
