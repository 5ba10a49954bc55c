//! Hermitian-matrix helpers shared by the state, channel and check modules.

use nalgebra::DMatrix;

use crate::convex::ConvexFn;
use crate::{CMatrix, C64};

/// True when every off-diagonal entry is at most `tol` in modulus.
pub fn is_diagonal(m: &CMatrix, tol: f64) -> bool {
    let n = m.nrows();
    for j in 0..n {
        for i in 0..n {
            if i != j && m[(i, j)].norm() > tol {
                return false;
            }
        }
    }
    true
}

/// Largest entrywise deviation from Hermiticity.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// `(M + M†) / 2`.
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues of a Hermitian matrix, sorted nonincreasing. Diagonal inputs
/// skip the decomposition.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut vals: Vec<f64> = if is_diagonal(m, 0.0) {
        m.diagonal().iter().map(|c| c.re).collect()
    } else {
        m.clone().symmetric_eigenvalues().iter().copied().collect()
    };
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    vals
}

/// Eigenvalues (nonincreasing) and matching unit eigenvectors as columns.
pub fn hermitian_eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let n = m.nrows();
    let mut vecs = CMatrix::zeros(n, n);
    let vals = order
        .iter()
        .enumerate()
        .map(|(col, &k)| {
            vecs.set_column(col, &eig.eigenvectors.column(k));
            eig.eigenvalues[k]
        })
        .collect();
    (vals, vecs)
}

/// Largest `|i − j|` with a nonzero entry.
pub fn bandwidth(m: &CMatrix) -> usize {
    let n = m.nrows();
    let mut b = 0;
    for j in 0..n {
        for i in 0..n {
            if m[(i, j)] != C64::new(0.0, 0.0) {
                b = b.max(i.abs_diff(j));
            }
        }
    }
    b
}

/// `Tr f(A)` for Hermitian `A`. Integer powers use traces of products (with a
/// banded fast path); everything else goes through the spectrum.
pub fn trace_fn(m: &CMatrix, f: ConvexFn) -> f64 {
    if is_diagonal(m, 0.0) {
        return m.diagonal().iter().map(|c| f.eval(c.re)).sum();
    }
    match f.integer_power() {
        Some(1) => m.trace().re,
        Some(2) => m.iter().map(|c| c.norm_sqr()).sum(),
        Some(3) => banded_cube_trace(m),
        _ => hermitian_eigenvalues(m)
            .into_iter()
            .map(|x| f.eval(x))
            .sum(),
    }
}

fn banded_cube_trace(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let b = bandwidth(m);
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        let j_lo = i.saturating_sub(b);
        let j_hi = (i + b).min(n - 1);
        for j in j_lo..=j_hi {
            let aij = m[(i, j)];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            let lo = i.max(j).saturating_sub(b);
            let hi = (i.min(j) + b).min(n - 1);
            for k in lo..=hi {
                acc += aij * m[(j, k)] * m[(k, i)];
            }
        }
    }
    acc.re
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if is_diagonal(m, 0.0) {
        return m.diagonal().iter().map(|c| c.re.abs()).sum();
    }
    hermitian_eigenvalues(m).iter().map(|x| x.abs()).sum()
}

/// Principal square root of a positive semidefinite matrix.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let (vals, vecs) = hermitian_eigh(m);
    let mut scaled = vecs.clone();
    for (j, &v) in vals.iter().enumerate() {
        let s = v.max(0.0).sqrt();
        scaled.column_mut(j).scale_mut(s);
    }
    &scaled * vecs.adjoint()
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    if is_diagonal(rho, 0.0) && is_diagonal(sigma, 0.0) {
        let s: f64 = rho
            .diagonal()
            .iter()
            .zip(sigma.diagonal().iter())
            .map(|(a, b)| (a.re.max(0.0) * b.re.max(0.0)).sqrt())
            .sum();
        return s * s;
    }
    let root = psd_sqrt(rho);
    let inner = hermitize(&(&root * sigma * &root));
    let s: f64 = hermitian_eigenvalues(&inner)
        .iter()
        .map(|x| x.max(0.0).sqrt())
        .sum();
    s * s
}

/// Embed `m` in the top-left block of a `rows × cols` zero matrix, or crop.
pub fn resize(m: &CMatrix, rows: usize, cols: usize) -> CMatrix {
    let mut out = CMatrix::zeros(rows, cols);
    let r = rows.min(m.nrows());
    let c = cols.min(m.ncols());
    out.view_mut((0, 0), (r, c))
        .copy_from(&m.view((0, 0), (r, c)));
    out
}

/// Real matrix to complex.
pub fn complexify(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}
