use std::collections::BTreeMap;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Matrix, Semiring};
use crate::diagram::{MonoidalSignature, Sort, Symbol};
use crate::error::{Error, Result};

/// Assigns a dimension to every sort and a matrix to every symbol.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "Matrix<R>: Serialize",
    deserialize = "Matrix<R>: Deserialize<'de>"
))]
pub struct Interpretation<R: Semiring> {
    pub sort_dims: BTreeMap<Sort, usize>,
    pub symbols: BTreeMap<Symbol, Matrix<R>>,
}

impl<R: Semiring> Default for Interpretation<R> {
    fn default() -> Self {
        Interpretation {
            sort_dims: BTreeMap::new(),
            symbols: BTreeMap::new(),
        }
    }
}

impl<R: Semiring> Interpretation<R> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_sort(mut self, sort: Sort, dim: usize) -> Self {
        self.sort_dims.insert(sort, dim);
        self
    }

    pub fn with_symbol(mut self, symbol: Symbol, m: Matrix<R>) -> Self {
        self.symbols.insert(symbol, m);
        self
    }

    pub fn dim(&self, sort: &Sort) -> Result<usize> {
        self.sort_dims
            .get(sort)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("no dimension for sort `{sort}`")))
    }

    /// Product of the dimensions of a sort list, failing on overflow past `cap`.
    pub fn dims_product(&self, sorts: &[Sort], cap: usize) -> Result<usize> {
        let mut total: usize = 1;
        for s in sorts {
            total = total
                .checked_mul(self.dim(s)?)
                .filter(|t| *t <= cap)
                .ok_or_else(|| {
                    Error::ResourceLimit(format!(
                        "interface of {} wires exceeds the dimension cap {cap}",
                        sorts.len()
                    ))
                })?;
        }
        Ok(total)
    }

    pub fn matrix(&self, symbol: &Symbol) -> Result<&Matrix<R>> {
        self.symbols
            .get(symbol)
            .ok_or_else(|| Error::MissingSymbol(symbol.to_string()))
    }

    /// Checks that every symbol of `sig` has a matrix of the right shape.
    pub fn check(&self, sig: &MonoidalSignature) -> Result<()> {
        for (sym, ty) in &sig.symbols {
            let m = self.matrix(sym)?;
            let rows = self.dims_product(&ty.cod, usize::MAX)?;
            let cols = self.dims_product(&ty.dom, usize::MAX)?;
            if m.rows() != rows || m.cols() != cols {
                return Err(Error::DimensionMismatch(format!(
                    "`{sym}` needs a {rows}×{cols} matrix, got {}×{}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(())
    }
}

/// Reads the probability out of a `flip(...)` symbol name.
///
/// Accepts `flip(p/q)`, `flip(0.25)` and `flip(1e-4)`.
pub fn parse_flip_probability(name: &str) -> Option<BigRational> {
    let inner = name.strip_prefix("flip(")?.strip_suffix(')')?;
    let p = parse_rational_literal(inner)?;
    (!p.is_negative() && p <= <BigRational as One>::one()).then_some(p)
}

/// Parses `p/q`, a decimal like `0.125`, or scientific notation like `1e-4` exactly.
pub(crate) fn parse_rational_literal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        if Zero::is_zero(&d) {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num = BigInt::from_str(&digits).ok()?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

fn bool_table<R: Semiring>(
    sig: &MonoidalSignature,
    flip: impl Fn(&BigRational) -> (R, R),
) -> Result<Interpretation<R>> {
    let (o, l) = (R::zero(), R::one());
    let mut interp = Interpretation::new();
    for sort in &sig.sorts {
        interp.sort_dims.insert(sort.clone(), 2);
    }
    for sym in sig.symbols.keys() {
        let m = match sym.name() {
            "and" => Matrix::from_rows(vec![
                vec![l.clone(), l.clone(), l.clone(), o.clone()],
                vec![o.clone(), o.clone(), o.clone(), l.clone()],
            ])?,
            "or" => Matrix::from_rows(vec![
                vec![l.clone(), o.clone(), o.clone(), o.clone()],
                vec![o.clone(), l.clone(), l.clone(), l.clone()],
            ])?,
            "not" => {
                Matrix::from_rows(vec![vec![o.clone(), l.clone()], vec![l.clone(), o.clone()]])?
            }
            "observe" => Matrix::row(vec![o.clone(), l.clone()]),
            name => match parse_flip_probability(name) {
                Some(p) => {
                    let (f, t) = flip(&p);
                    Matrix::column(vec![f, t])
                }
                None => return Err(Error::MissingSymbol(name.to_string())),
            },
        };
        interp.symbols.insert(sym.clone(), m);
    }
    Ok(interp)
}

/// The substochastic-matrix interpretation of the Boolean program signature.
pub fn substochastic(sig: &MonoidalSignature) -> Result<Interpretation<BigRational>> {
    bool_table(sig, |p| (<BigRational as One>::one() - p, p.clone()))
}

/// The possibilistic reading: a flip is possible on each side with nonzero mass.
pub fn boolean(sig: &MonoidalSignature) -> Result<Interpretation<bool>> {
    bool_table(sig, |p| (!One::is_one(p), !Zero::is_zero(p)))
}

/// Uniformly random symbol matrices with fixed per-sort dimensions.
pub fn random_interpretation<R: Semiring, G: Rng + ?Sized>(
    sig: &MonoidalSignature,
    dims: &BTreeMap<Sort, usize>,
    rng: &mut G,
) -> Result<Interpretation<R>> {
    let mut interp = Interpretation::new();
    for sort in &sig.sorts {
        let d = dims
            .get(sort)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("no dimension for sort `{sort}`")))?;
        interp.sort_dims.insert(sort.clone(), d);
    }
    for (sym, ty) in &sig.symbols {
        let rows = interp.dims_product(&ty.cod, usize::MAX)?;
        let cols = interp.dims_product(&ty.dom, usize::MAX)?;
        let data = (0..rows * cols).map(|_| R::sample(rng)).collect();
        interp
            .symbols
            .insert(sym.clone(), Matrix::from_vec(rows, cols, data)?);
    }
    Ok(interp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn literals() {
        assert_eq!(parse_rational_literal("0.99"), Some(q(99, 100)));
        assert_eq!(parse_rational_literal("1e-4"), Some(q(1, 10_000)));
        assert_eq!(parse_rational_literal("10^-4"), None);
        assert_eq!(parse_rational_literal("3/9"), Some(q(1, 3)));
        assert_eq!(parse_rational_literal(".5"), Some(q(1, 2)));
        assert_eq!(parse_rational_literal("1/0"), None);
        assert_eq!(parse_flip_probability("flip(1/5)"), Some(q(1, 5)));
        assert_eq!(parse_flip_probability("flip(3/2)"), None);
        assert_eq!(parse_flip_probability("and"), None);
    }

    #[test]
    fn substochastic_tables() {
        let b = Sort::new("Bool");
        let mut sig = MonoidalSignature::new();
        sig.add_sort(b.clone());
        sig.add_symbol("and".into(), vec![b.clone(), b.clone()], vec![b.clone()]);
        sig.add_symbol("observe".into(), vec![b.clone()], vec![]);
        sig.add_symbol("flip(1/5)".into(), vec![], vec![b]);
        let s = substochastic(&sig).unwrap();
        s.check(&sig).unwrap();
        let and = s.matrix(&"and".into()).unwrap();
        let expect: Vec<BigRational> = [1, 1, 1, 0, 0, 0, 0, 1].iter().map(|&x| q(x, 1)).collect();
        assert_eq!(and.entries(), &expect[..]);
        assert_eq!(
            s.matrix(&"observe".into()).unwrap().entries(),
            &[q(0, 1), q(1, 1)]
        );
        assert_eq!(
            s.matrix(&"flip(1/5)".into()).unwrap().entries(),
            &[q(4, 5), q(1, 5)]
        );

        let bo = boolean(&sig).unwrap();
        assert_eq!(
            bo.matrix(&"and".into()).unwrap().entries(),
            &[true, true, true, false, false, false, false, true]
        );
    }
}
