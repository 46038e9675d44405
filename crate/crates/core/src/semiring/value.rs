//! Intermediate values of term evaluation.
//!
//! Wiring is kept as an index map ([`Selection`]) and a matrix tensored with
//! identities as its core plus the identity sizes ([`Factored`]). Composites
//! are computed from these without expanding the identities, so a term like
//! `(g ⊗ id) ∘ w` costs about as much as `g` and `w` themselves.

use super::{generator_matrix, GeneratorKind, Matrix, Semiring};
use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

/// A 0/1 matrix with at most one 1 in each row: row `i` selects column
/// `map[i]`, or nothing when it is `NONE`. Every generator except `del` has
/// this shape, and it is closed under `∘` and `⊗`.
#[derive(Clone)]
pub(super) struct Selection {
    rows: usize,
    cols: usize,
    map: Vec<u32>,
}

impl Selection {
    fn identity(n: usize) -> Self {
        Selection {
            rows: n,
            cols: n,
            map: (0..n as u32).collect(),
        }
    }

    fn is_identity(&self) -> bool {
        self.rows == self.cols && self.map.iter().enumerate().all(|(i, &j)| j as usize == i)
    }

    fn dense<R: Semiring>(&self, cap: usize) -> Result<Matrix<R>> {
        check(self.rows, self.cols, cap)?;
        let mut data = vec![R::zero(); self.rows * self.cols];
        for (i, &j) in self.map.iter().enumerate() {
            if j != NONE {
                data[i * self.cols + j as usize] = R::one();
            }
        }
        Matrix::from_vec(self.rows, self.cols, data)
    }
}

/// `id(left) ⊗ inner ⊗ id(right)`.
#[derive(Clone)]
pub(super) struct Factored<R> {
    left: usize,
    inner: Matrix<R>,
    right: usize,
}

impl<R: Semiring> Factored<R> {
    fn plain(inner: Matrix<R>) -> Self {
        Factored {
            left: 1,
            inner,
            right: 1,
        }
    }

    fn is_plain(&self) -> bool {
        self.left == 1 && self.right == 1
    }

    fn rows(&self) -> usize {
        self.left * self.inner.rows() * self.right
    }

    fn cols(&self) -> usize {
        self.left * self.inner.cols() * self.right
    }

    fn dense(self, cap: usize) -> Result<Matrix<R>> {
        if self.is_plain() {
            return Ok(self.inner);
        }
        check(self.rows(), self.cols(), cap)?;
        let l = Matrix::identity(self.left);
        let r = Matrix::identity(self.right);
        Ok(l.kronecker(&self.inner).kronecker(&r))
    }
}

pub(super) enum Value<R> {
    Select(Selection),
    Factored(Factored<R>),
}

fn check(rows: usize, cols: usize, cap: usize) -> Result<()> {
    match rows.checked_mul(cols) {
        Some(n) if n <= cap => Ok(()),
        _ => Err(Error::ResourceLimit(format!(
            "a {rows}×{cols} intermediate matrix exceeds the cap of {cap} entries"
        ))),
    }
}

fn check_map(rows: usize, cap: usize) -> Result<()> {
    if rows > cap || rows >= NONE as usize {
        return Err(Error::ResourceLimit(format!(
            "a wiring with {rows} rows exceeds the cap of {cap} entries"
        )));
    }
    Ok(())
}

impl<R: Semiring> Value<R> {
    pub(super) fn generator(g: GeneratorKind, n: usize, m: usize, cap: usize) -> Result<Self> {
        let sel = |rows: usize, cols: usize, map: Vec<u32>| {
            Ok(Value::Select(Selection { rows, cols, map }))
        };
        let sq = |k: usize| {
            k.checked_mul(k)
                .filter(|&x| x <= cap)
                .ok_or_else(|| Error::ResourceLimit(format!("a wiring on {k}² rows is too large")))
        };
        match g {
            GeneratorKind::Id => {
                check_map(n, cap)?;
                Ok(Value::Select(Selection::identity(n)))
            }
            GeneratorKind::Swap => {
                let nm = n
                    .checked_mul(m)
                    .ok_or_else(|| Error::ResourceLimit("swap too large".into()))?;
                check_map(nm, cap)?;
                // output e_j ⊗ e_i comes from input e_i ⊗ e_j
                let mut map = vec![NONE; nm];
                for i in 0..n {
                    for j in 0..m {
                        map[j * n + i] = (i * m + j) as u32;
                    }
                }
                sel(nm, nm, map)
            }
            GeneratorKind::Copy => {
                let nn = sq(n)?;
                check_map(nn, cap)?;
                let mut map = vec![NONE; nn];
                for i in 0..n {
                    map[i * n + i] = i as u32;
                }
                sel(nn, n, map)
            }
            GeneratorKind::Equate => {
                let nn = sq(n)?;
                check_map(n, cap)?;
                sel(n, nn, (0..n).map(|i| (i * n + i) as u32).collect())
            }
            GeneratorKind::New => {
                check_map(n, cap)?;
                sel(n, 1, vec![0; n])
            }
            GeneratorKind::Del => {
                check(1, n, cap)?;
                Ok(Value::Factored(Factored::plain(generator_matrix(g, n, m))))
            }
        }
    }

    pub(super) fn matrix(m: Matrix<R>, cap: usize) -> Result<Self> {
        check(m.rows(), m.cols(), cap)?;
        Ok(Value::Factored(Factored::plain(m)))
    }

    fn shape(&self) -> (usize, usize) {
        match self {
            Value::Select(s) => (s.rows, s.cols),
            Value::Factored(f) => (f.rows(), f.cols()),
        }
    }

    pub(super) fn into_dense(self, cap: usize) -> Result<Matrix<R>> {
        match self {
            Value::Select(s) => s.dense(cap),
            Value::Factored(f) => f.dense(cap),
        }
    }

    fn to_dense(&self, cap: usize) -> Result<Matrix<R>> {
        match self {
            Value::Select(s) => s.dense(cap),
            Value::Factored(f) => f.clone().dense(cap),
        }
    }

    /// `a · b`, applying `a` after `b`.
    pub(super) fn compose(a: &Self, b: &Self, cap: usize) -> Result<Self> {
        let ((ar, ac), (br, bc)) = (a.shape(), b.shape());
        if ac != br {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose a {ar}×{ac} matrix with a {br}×{bc} one"
            )));
        }
        Ok(match (a, b) {
            (Value::Select(x), Value::Select(y)) => {
                check_map(ar, cap)?;
                Value::Select(Selection {
                    rows: ar,
                    cols: bc,
                    map: x
                        .map
                        .iter()
                        .map(|&k| if k == NONE { NONE } else { y.map[k as usize] })
                        .collect(),
                })
            }
            (Value::Select(x), Value::Factored(f)) => {
                check(ar, bc, cap)?;
                Value::matrix(gather_rows(x, f), cap)?
            }
            (Value::Factored(f), Value::Select(y)) => {
                check(ar, bc, cap)?;
                Value::matrix(scatter_cols(f, y), cap)?
            }
            (Value::Factored(f), Value::Factored(g)) => {
                if f.left == g.left && f.right == g.right {
                    check(f.inner.rows(), g.inner.cols(), cap)?;
                    Value::Factored(Factored {
                        left: f.left,
                        inner: f.inner.matmul(&g.inner)?,
                        right: f.right,
                    })
                } else {
                    check(ar, bc, cap)?;
                    if g.is_plain() {
                        Value::matrix(factored_times_dense(f, &g.inner), cap)?
                    } else if f.is_plain() {
                        Value::matrix(dense_times_factored(&f.inner, g), cap)?
                    } else {
                        let gd = g.clone().dense(cap)?;
                        Value::matrix(factored_times_dense(f, &gd), cap)?
                    }
                }
            }
        })
    }

    /// `a ⊗ b`.
    pub(super) fn tensor(a: &Self, b: &Self, cap: usize) -> Result<Self> {
        Ok(match (a, b) {
            (Value::Select(x), Value::Select(y)) => {
                let rows = x.rows.saturating_mul(y.rows);
                check_map(rows, cap)?;
                let mut map = Vec::with_capacity(rows);
                for &i in &x.map {
                    for &k in &y.map {
                        map.push(if i == NONE || k == NONE {
                            NONE
                        } else {
                            (i as usize * y.cols + k as usize) as u32
                        });
                    }
                }
                Value::Select(Selection {
                    rows,
                    cols: x.cols * y.cols,
                    map,
                })
            }
            (Value::Select(x), Value::Factored(f)) if x.is_identity() => {
                Value::Factored(Factored {
                    left: x.rows * f.left,
                    inner: f.inner.clone(),
                    right: f.right,
                })
            }
            (Value::Factored(f), Value::Select(y)) if y.is_identity() => {
                Value::Factored(Factored {
                    left: f.left,
                    inner: f.inner.clone(),
                    right: f.right * y.rows,
                })
            }
            _ => {
                let ((ar, ac), (br, bc)) = (a.shape(), b.shape());
                check(ar.saturating_mul(br), ac.saturating_mul(bc), cap)?;
                Value::matrix(a.to_dense(cap)?.kronecker(&b.to_dense(cap)?), cap)?
            }
        })
    }
}

/// Row `(p, i, c)` of `id ⊗ M ⊗ id` has `M[i, m]` at column `(p, m, c)`.
fn gather_rows<R: Semiring>(x: &Selection, f: &Factored<R>) -> Matrix<R> {
    let (mr, mc, r) = (f.inner.rows(), f.inner.cols(), f.right);
    let cols = f.cols();
    let mut data = vec![R::zero(); x.rows * cols];
    for (i, &k) in x.map.iter().enumerate() {
        if k == NONE {
            continue;
        }
        let k = k as usize;
        let (p, ii, c) = (k / (mr * r), (k / r) % mr, k % r);
        for m in 0..mc {
            data[i * cols + (p * mc + m) * r + c] = f.inner.get(ii, m).clone();
        }
    }
    Matrix::from_vec(x.rows, cols, data).expect("shape computed above")
}

/// Column `(p, m, c)` of `id ⊗ M ⊗ id` has `M[i, m]` at row `(p, i, c)`.
fn scatter_cols<R: Semiring>(f: &Factored<R>, y: &Selection) -> Matrix<R> {
    let (mr, mc, r) = (f.inner.rows(), f.inner.cols(), f.right);
    let rows = f.rows();
    let cols = y.cols;
    let mut data = vec![R::zero(); rows * cols];
    for (k, &j) in y.map.iter().enumerate() {
        if j == NONE {
            continue;
        }
        let (p, m, c) = (k / (mc * r), (k / r) % mc, k % r);
        for i in 0..mr {
            let w = f.inner.get(i, m);
            if w.is_zero() {
                continue;
            }
            let at = ((p * mr + i) * r + c) * cols + j as usize;
            data[at] = data[at].add(w);
        }
    }
    Matrix::from_vec(rows, cols, data).expect("shape computed above")
}

/// `(id ⊗ M ⊗ id) · B` without expanding the identities.
fn factored_times_dense<R: Semiring>(f: &Factored<R>, b: &Matrix<R>) -> Matrix<R> {
    let (l, mr, mc, r) = (f.left, f.inner.rows(), f.inner.cols(), f.right);
    let n = b.cols();
    let rows = f.rows();
    let src = b.entries();
    let mut data = vec![R::zero(); rows * n];
    for p in 0..l {
        for i in 0..mr {
            for m in 0..mc {
                let w = f.inner.get(i, m);
                if w.is_zero() {
                    continue;
                }
                for c in 0..r {
                    let from = ((p * mc + m) * r + c) * n;
                    let to = ((p * mr + i) * r + c) * n;
                    for j in 0..n {
                        data[to + j] = data[to + j].add(&w.mul(&src[from + j]));
                    }
                }
            }
        }
    }
    Matrix::from_vec(rows, n, data).expect("shape computed above")
}

/// `A · (id ⊗ M ⊗ id)` without expanding the identities.
fn dense_times_factored<R: Semiring>(a: &Matrix<R>, g: &Factored<R>) -> Matrix<R> {
    let (l, mr, mc, r) = (g.left, g.inner.rows(), g.inner.cols(), g.right);
    let rows = a.rows();
    let (ac, cols) = (a.cols(), g.cols());
    let src = a.entries();
    let mut data = vec![R::zero(); rows * cols];
    for x in 0..rows {
        for p in 0..l {
            for i in 0..mr {
                for m in 0..mc {
                    let w = g.inner.get(i, m);
                    if w.is_zero() {
                        continue;
                    }
                    for c in 0..r {
                        let v = &src[x * ac + (p * mr + i) * r + c];
                        let at = x * cols + (p * mc + m) * r + c;
                        data[at] = data[at].add(&v.mul(w));
                    }
                }
            }
        }
    }
    Matrix::from_vec(rows, cols, data).expect("shape computed above")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semiring::PrimeField;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const CAP: usize = 1 << 20;

    fn random(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<PrimeField> {
        let data = (0..rows * cols)
            .map(|_| PrimeField::new(rng.gen_range(0..5)))
            .collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    fn factored(l: usize, m: Matrix<PrimeField>, r: usize) -> Value<PrimeField> {
        Value::Factored(Factored {
            left: l,
            inner: m,
            right: r,
        })
    }

    fn swap(n: usize, m: usize) -> Value<PrimeField> {
        Value::generator(GeneratorKind::Swap, n, m, CAP).unwrap()
    }

    #[test]
    fn lazy_products_match_dense_ones() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (l, r) = (rng.gen_range(1..4), rng.gen_range(1..4));
            let (mr, mc) = (rng.gen_range(1..4), rng.gen_range(1..4));
            let f = factored(l, random(&mut rng, mr, mc), r);
            let fd = f.to_dense(CAP).unwrap();
            let rows = fd.rows();
            let cols = fd.cols();

            let b = Value::matrix(random(&mut rng, cols, 3), CAP).unwrap();
            let want = fd.matmul(&b.to_dense(CAP).unwrap()).unwrap();
            assert_eq!(
                Value::compose(&f, &b, CAP)
                    .unwrap()
                    .into_dense(CAP)
                    .unwrap(),
                want
            );

            let a = Value::matrix(random(&mut rng, 2, rows), CAP).unwrap();
            let want = a.to_dense(CAP).unwrap().matmul(&fd).unwrap();
            assert_eq!(
                Value::compose(&a, &f, CAP)
                    .unwrap()
                    .into_dense(CAP)
                    .unwrap(),
                want
            );

            // selections on both sides: a swap of the right shape
            let s_in = swap(1, cols);
            let s_out = swap(rows, 1);
            let want = fd.clone();
            let got = Value::compose(&s_out, &Value::compose(&f, &s_in, CAP).unwrap(), CAP)
                .unwrap()
                .into_dense(CAP)
                .unwrap();
            assert_eq!(got, want);

            let copy = Value::generator(GeneratorKind::Copy, cols, 0, CAP).unwrap();
            let eq = Value::generator(GeneratorKind::Equate, rows, 0, CAP).unwrap();
            let lhs = Value::compose(&eq, &Value::tensor(&f, &f, CAP).unwrap(), CAP).unwrap();
            let lhs = Value::compose(&lhs, &copy, CAP)
                .unwrap()
                .into_dense(CAP)
                .unwrap();
            let eqd = eq.to_dense(CAP).unwrap();
            let cd = copy.to_dense(CAP).unwrap();
            let want = eqd.matmul(&fd.kronecker(&fd)).unwrap().matmul(&cd).unwrap();
            assert_eq!(lhs, want);
        }
    }

    #[test]
    fn tensoring_with_identity_stays_factored() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = Value::matrix(random(&mut rng, 2, 3), CAP).unwrap();
        let id = Value::generator(GeneratorKind::Id, 4, 0, CAP).unwrap();
        let t = Value::tensor(&Value::tensor(&id, &m, CAP).unwrap(), &id, CAP).unwrap();
        assert!(matches!(&t, Value::Factored(f) if f.left == 4 && f.right == 4));
        let want = Matrix::<PrimeField>::identity(4)
            .kronecker(&m.to_dense(CAP).unwrap())
            .kronecker(&Matrix::identity(4));
        assert_eq!(t.into_dense(CAP).unwrap(), want);
    }

    #[test]
    fn selections_compose_as_maps() {
        let c = Value::<PrimeField>::generator(GeneratorKind::Copy, 3, 0, CAP).unwrap();
        let e = Value::<PrimeField>::generator(GeneratorKind::Equate, 3, 0, CAP).unwrap();
        let ec = Value::compose(&e, &c, CAP).unwrap();
        assert!(matches!(&ec, Value::Select(s) if s.is_identity()));
    }
}
