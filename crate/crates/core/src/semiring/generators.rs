use serde::{Deserialize, Serialize};

use super::{Matrix, Semiring};

/// The structural generators of a hypergraph category.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Id,
    Swap,
    Copy,
    Del,
    Equate,
    New,
}

/// Matrix of a generator acting on an object of dimension `n`.
///
/// `swap` takes the dimensions of its two blocks; the other kinds use `n` only.
pub fn generator_matrix<R: Semiring>(kind: GeneratorKind, n: usize, m: usize) -> Matrix<R> {
    match kind {
        GeneratorKind::Id => Matrix::identity(n),
        GeneratorKind::Swap => {
            // e_i ⊗ e_j ↦ e_j ⊗ e_i with i < n, j < m
            let mut out = Matrix::zeros(n * m, n * m);
            for i in 0..n {
                for j in 0..m {
                    out.set(j * n + i, i * m + j, R::one());
                }
            }
            out
        }
        GeneratorKind::Copy => {
            let mut out = Matrix::zeros(n * n, n);
            for i in 0..n {
                out.set(i * n + i, i, R::one());
            }
            out
        }
        GeneratorKind::Del => Matrix::row(vec![R::one(); n]),
        GeneratorKind::Equate => {
            let mut out = Matrix::zeros(n, n * n);
            for i in 0..n {
                out.set(i, i * n + i, R::one());
            }
            out
        }
        GeneratorKind::New => Matrix::column(vec![R::one(); n]),
    }
}
