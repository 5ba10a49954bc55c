use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::{CMatrix, CVector, C64};

/// One Kraus operator `K: ℂ^{in} → ℂ^{out}`.
#[derive(Debug, Clone, PartialEq)]
pub enum KrausOperator {
    /// At most one nonzero per column: `(row, col, value)` triples. The
    /// amplifier and attenuator shift operators have this form.
    Sparse {
        rows: usize,
        cols: usize,
        entries: Vec<(usize, usize, C64)>,
    },
    Dense(CMatrix),
    /// `|left⟩⟨right|`.
    RankOne {
        left: CVector,
        right: CVector,
    },
}

impl KrausOperator {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            KrausOperator::Sparse { rows, cols, .. } => (*rows, *cols),
            KrausOperator::Dense(m) => (m.nrows(), m.ncols()),
            KrausOperator::RankOne { left, right } => (left.len(), right.len()),
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match self {
            KrausOperator::Sparse {
                rows,
                cols,
                entries,
            } => {
                let mut m = CMatrix::zeros(*rows, *cols);
                for &(i, j, v) in entries {
                    m[(i, j)] += v;
                }
                m
            }
            KrausOperator::Dense(m) => m.clone(),
            KrausOperator::RankOne { left, right } => left * right.adjoint(),
        }
    }

    /// `‖K‖_F² = Tr K†K`.
    pub fn weight(&self) -> f64 {
        match self {
            KrausOperator::Sparse { entries, .. } => entries.iter().map(|e| e.2.norm_sqr()).sum(),
            KrausOperator::Dense(m) => m.norm_squared(),
            KrausOperator::RankOne { left, right } => left.norm_squared() * right.norm_squared(),
        }
    }

    /// `K ρ K†`.
    pub fn conjugate(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.shape().0, self.shape().0);
        self.conjugate_into(rho, &mut out);
        out
    }

    /// `acc += K ρ K†`.
    pub fn conjugate_into(&self, rho: &CMatrix, acc: &mut CMatrix) {
        match self {
            KrausOperator::Sparse { entries, .. } => {
                for &(a, i, ki) in entries {
                    for &(b, j, kj) in entries {
                        acc[(a, b)] += ki * rho[(i, j)] * kj.conj();
                    }
                }
            }
            KrausOperator::Dense(k) => *acc += k * rho * k.adjoint(),
            KrausOperator::RankOne { left, right } => {
                let s = (right.adjoint() * rho * right)[(0, 0)];
                acc.gerc(s, left, left, C64::new(1.0, 0.0));
            }
        }
    }

    /// `K† X K`.
    pub fn dual_conjugate(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.shape().1, self.shape().1);
        self.dual_conjugate_into(x, &mut out);
        out
    }

    /// `acc += K† X K`.
    pub fn dual_conjugate_into(&self, x: &CMatrix, acc: &mut CMatrix) {
        match self {
            KrausOperator::Sparse { entries, .. } => {
                for &(a, i, ki) in entries {
                    for &(b, j, kj) in entries {
                        acc[(i, j)] += ki.conj() * x[(a, b)] * kj;
                    }
                }
            }
            KrausOperator::Dense(k) => *acc += k.adjoint() * x * k,
            KrausOperator::RankOne { left, right } => {
                let s = (left.adjoint() * x * left)[(0, 0)];
                acc.gerc(s, right, right, C64::new(1.0, 0.0));
            }
        }
    }

    /// `K₁ ⊗ K₂`, same representation when both factors share it.
    pub fn kron(&self, other: &KrausOperator) -> KrausOperator {
        match (self, other) {
            (
                KrausOperator::Sparse {
                    rows: r1,
                    cols: c1,
                    entries: e1,
                },
                KrausOperator::Sparse {
                    rows: r2,
                    cols: c2,
                    entries: e2,
                },
            ) => {
                let mut entries = Vec::with_capacity(e1.len() * e2.len());
                for &(a, i, x) in e1 {
                    for &(b, j, y) in e2 {
                        entries.push((a * r2 + b, i * c2 + j, x * y));
                    }
                }
                KrausOperator::Sparse {
                    rows: r1 * r2,
                    cols: c1 * c2,
                    entries,
                }
            }
            (
                KrausOperator::RankOne {
                    left: l1,
                    right: r1,
                },
                KrausOperator::RankOne {
                    left: l2,
                    right: r2,
                },
            ) => KrausOperator::RankOne {
                left: l1.kronecker(l2),
                right: r1.kronecker(r2),
            },
            _ => KrausOperator::Dense(self.to_dense().kronecker(&other.to_dense())),
        }
    }
}

/// `Σ_i K_i ρ K_i†`, reduced in a fixed order whatever the thread count.
pub(crate) fn sum_conjugations(kraus: &[KrausOperator], rho: &CMatrix, out_dim: usize) -> CMatrix {
    reduce_chunks(kraus, out_dim, |k, acc| k.conjugate_into(rho, acc))
}

pub(crate) fn sum_dual_conjugations(
    kraus: &[KrausOperator],
    x: &CMatrix,
    in_dim: usize,
) -> CMatrix {
    reduce_chunks(kraus, in_dim, |k, acc| k.dual_conjugate_into(x, acc))
}

/// Accumulates over a fixed partition into at most `CHUNKS` contiguous
/// runs, so the summation order (and memory) does not depend on the pool.
fn reduce_chunks<F>(kraus: &[KrausOperator], dim: usize, f: F) -> CMatrix
where
    F: Fn(&KrausOperator, &mut CMatrix) + Sync,
{
    const CHUNKS: usize = 8;
    let size = kraus.len().div_ceil(CHUNKS).max(1);
    let partial: Vec<CMatrix> = kraus
        .par_chunks(size)
        .map(|chunk| {
            let mut acc = CMatrix::zeros(dim, dim);
            for k in chunk {
                f(k, &mut acc);
            }
            acc
        })
        .collect();
    partial
        .into_iter()
        .fold(CMatrix::zeros(dim, dim), |acc, m| acc + m)
}

/// `Σ K†K`.
pub(crate) fn gram(kraus: &[KrausOperator], in_dim: usize) -> CMatrix {
    let out_dim = kraus.first().map_or(0, |k| k.shape().0);
    let id = CMatrix::identity(out_dim, out_dim);
    reduce_chunks(kraus, in_dim, |k, acc| k.dual_conjugate_into(&id, acc))
}

pub(crate) fn check_shapes(kraus: &[KrausOperator], out_dim: usize, in_dim: usize) -> Result<()> {
    for k in kraus {
        if k.shape() != (out_dim, in_dim) {
            return Err(Error::shape(format!(
                "Kraus operator is {:?}, channel needs ({out_dim}, {in_dim})",
                k.shape()
            )));
        }
    }
    Ok(())
}
