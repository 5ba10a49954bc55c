//! Truncated Fock spaces and the states that live on them.
//!
//! A [`DensityOperator`] stores the compression `P ρ P` of an ideal state `ρ`
//! onto the levels kept by its [`FockCutoff`], together with `tail_bound`,
//! the mass `1 − Tr P ρ P` that the truncation dropped.

mod coherent;
mod entropy;
pub mod format;
mod states;

pub(crate) use coherent::coherent_amplitudes;
pub use coherent::{coherent_vector, displacement_block, displacement_matrix, CoherentVector};
pub use entropy::{
    bound_f, entropy_of_probs, g, g_inv, schatten_norm, schatten_norm_of, von_neumann_entropy,
    von_neumann_entropy_of,
};
pub use states::{
    coherent_state, fock_state, haar_unitary, mean_energy, passive_rearrangement,
    random_isospectral_state, thermal_product, thermal_state, vacuum,
};
pub(crate) use states::{conjugate_spectrum, haar_unitary_with};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::{CMatrix, C64};

/// Number of retained Fock levels per mode and number of modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockCutoff {
    dim: usize,
    modes: usize,
}

impl FockCutoff {
    pub fn new(dim: usize, modes: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::domain(format!("cutoff dim must be ≥ 2, got {dim}")));
        }
        if modes == 0 {
            return Err(Error::domain("a Fock space needs at least one mode"));
        }
        dim.checked_pow(modes as u32)
            .filter(|&d| d <= 1 << 24)
            .ok_or_else(|| Error::domain(format!("{dim}^{modes} levels is too large")))?;
        Ok(Self { dim, modes })
    }

    pub fn single(dim: usize) -> Result<Self> {
        Self::new(dim, 1)
    }

    /// Smallest single-mode cutoff whose thermal tail `z^dim` is below `tail`.
    pub fn for_thermal(z: f64, tail: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&z) {
            return Err(Error::domain(format!(
                "thermal parameter z = {z} not in [0, 1)"
            )));
        }
        let dim = if z == 0.0 {
            2
        } else {
            ((tail.ln() / z.ln()).ceil() as usize).max(2)
        };
        Self::single(dim)
    }

    /// Smallest single-mode cutoff whose coherent tail at `|z|² = t` is below `tail`.
    pub fn for_coherent(t: f64, tail: f64) -> Result<Self> {
        let mut dim = 2usize;
        while crate::special::poisson_upper_tail(t, dim) > tail {
            dim += 1 + dim / 8;
            if dim > 1 << 20 {
                return Err(Error::Truncation(format!(
                    "no cutoff reaches tail {tail} at |z|² = {t}"
                )));
            }
        }
        Self::single(dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// `dim^modes`.
    pub fn total_dim(&self) -> usize {
        self.dim.pow(self.modes as u32)
    }

    pub fn with_dim(&self, dim: usize) -> Result<Self> {
        Self::new(dim, self.modes)
    }

    /// Per-mode occupation numbers of a flat index; mode 1 is most significant.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.modes];
        for slot in out.iter_mut().rev() {
            *slot = flat % self.dim;
            flat /= self.dim;
        }
        out
    }

    pub fn flat_index(&self, occupations: &[usize]) -> usize {
        occupations.iter().fold(0, |acc, &n| acc * self.dim + n)
    }

    /// Total photon number `n₁ + … + n_M` of a flat index.
    pub fn photon_number(&self, flat: usize) -> usize {
        self.multi_index(flat).iter().sum()
    }
}

/// Anything with a matrix on a truncated Fock space that phase-space
/// functionals can consume.
pub trait FockOperator {
    fn cutoff(&self) -> FockCutoff;
    fn matrix(&self) -> &CMatrix;
    /// Certified mass outside the cutoff.
    fn tail_bound(&self) -> f64 {
        0.0
    }
}

/// A state on a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    cutoff: FockCutoff,
    matrix: CMatrix,
    tail_bound: f64,
}

pub(crate) const HERMITIAN_TOL: f64 = 1e-12;
pub(crate) const NEGATIVE_TOL: f64 = 1e-12;

impl DensityOperator {
    /// Validated constructor: Hermitian within 1e−12 entrywise, eigenvalues
    /// ≥ −1e−12, trace within `tail_bound + 1e−12` of one.
    pub fn new(cutoff: FockCutoff, matrix: CMatrix, tail_bound: f64) -> Result<Self> {
        let n = cutoff.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::shape(format!(
                "matrix is {}×{}, cutoff needs {n}×{n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !(tail_bound >= 0.0) || !tail_bound.is_finite() {
            return Err(Error::NotAState(format!("invalid tail bound {tail_bound}")));
        }
        if matrix
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NotAState("non-finite entries".into()));
        }
        let defect = linalg::hermiticity_defect(&matrix);
        if defect > HERMITIAN_TOL {
            return Err(Error::NotAState(format!(
                "not Hermitian (defect {defect:.3e})"
            )));
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > tail_bound + 1e-12 {
            return Err(Error::NotAState(format!(
                "trace {trace} differs from 1 by more than tail bound {tail_bound}"
            )));
        }
        let min = linalg::hermitian_eigenvalues(&matrix)
            .last()
            .copied()
            .unwrap_or(0.0);
        if min < -NEGATIVE_TOL {
            return Err(Error::NotAState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self::from_parts(cutoff, matrix, tail_bound))
    }

    /// Skips validation; used where positivity holds by construction.
    pub(crate) fn from_parts(cutoff: FockCutoff, matrix: CMatrix, tail_bound: f64) -> Self {
        Self {
            cutoff,
            matrix,
            tail_bound,
        }
    }

    /// Fock-diagonal state with the given populations.
    pub fn from_diagonal(cutoff: FockCutoff, probs: &[f64], tail_bound: f64) -> Result<Self> {
        let n = cutoff.total_dim();
        if probs.len() > n {
            return Err(Error::shape(format!(
                "{} populations for {n} levels",
                probs.len()
            )));
        }
        let mut m = CMatrix::zeros(n, n);
        for (i, &p) in probs.iter().enumerate() {
            m[(i, i)] = C64::new(p, 0.0);
        }
        Self::new(cutoff, m, tail_bound)
    }

    /// `|ψ⟩⟨ψ|` for a unit vector.
    pub fn from_pure(cutoff: FockCutoff, psi: &crate::CVector) -> Result<Self> {
        let m = psi * psi.adjoint();
        Self::new(cutoff, linalg::hermitize(&m), 0.0)
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn modes(&self) -> usize {
        self.cutoff.modes()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn is_diagonal(&self) -> bool {
        linalg::is_diagonal(&self.matrix, 0.0)
    }

    /// Eigenvalues, nonincreasing.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    /// Spectrum with diagonalisation noise in `[−1e−9, 0)` clamped to zero.
    pub fn spectrum(&self) -> Result<Spectrum> {
        let vals = self.eigenvalues();
        let clamped = entropy::clamp_eigenvalues(&vals)?;
        Spectrum::new(clamped)
    }

    /// Same operator on a larger (or equal) cutoff, zero-padded.
    pub fn embed(&self, cutoff: FockCutoff) -> Result<Self> {
        if cutoff.modes() != self.modes() || cutoff.dim() < self.cutoff.dim() {
            return Err(Error::shape(
                "embedding needs the same modes and a larger cutoff",
            ));
        }
        if self.modes() == 1 {
            let n = cutoff.dim();
            return Ok(Self::from_parts(
                cutoff,
                linalg::resize(&self.matrix, n, n),
                self.tail_bound,
            ));
        }
        let n = cutoff.total_dim();
        let mut m = CMatrix::zeros(n, n);
        let old = self.cutoff;
        for j in 0..old.total_dim() {
            let jj = cutoff.flat_index(&old.multi_index(j));
            for i in 0..old.total_dim() {
                let ii = cutoff.flat_index(&old.multi_index(i));
                m[(ii, jj)] = self.matrix[(i, j)];
            }
        }
        Ok(Self::from_parts(cutoff, m, self.tail_bound))
    }

    /// `ρ ⊗ σ`; both factors must share the per-mode cutoff.
    pub fn tensor(&self, other: &DensityOperator) -> Result<Self> {
        if self.cutoff.dim() != other.cutoff.dim() {
            return Err(Error::shape("tensor factors need the same per-mode cutoff"));
        }
        let cutoff = FockCutoff::new(self.cutoff.dim(), self.modes() + other.modes())?;
        let m = self.matrix.kronecker(&other.matrix);
        // mass lost by either factor bounds the lost mass of the product
        let tail = 1.0 - (1.0 - self.tail_bound) * (1.0 - other.tail_bound);
        Ok(Self::from_parts(cutoff, m, tail.max(0.0)))
    }

    /// `D(w) ρ D(w)†` for a single mode. The displaced state is truncated to
    /// the same cutoff; the lost mass is added to the tail bound.
    pub fn displaced(&self, w: &CoherentAmplitude) -> Result<Self> {
        let d = displacement_matrix(w, self.cutoff)?;
        let m = linalg::hermitize(&(&d * &self.matrix * d.adjoint()));
        let lost = (self.trace() - m.trace().re).max(0.0);
        Ok(Self::from_parts(self.cutoff, m, self.tail_bound + lost))
    }
}

impl FockOperator for DensityOperator {
    fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    fn tail_bound(&self) -> f64 {
        self.tail_bound
    }
}

/// A Hermitian operator with `0 ≤ A ≤ I` (the Berezin–Lieb and Klein setting).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedOperator {
    cutoff: FockCutoff,
    matrix: CMatrix,
}

impl BoundedOperator {
    pub fn new(cutoff: FockCutoff, matrix: CMatrix) -> Result<Self> {
        let n = cutoff.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::shape(format!("operator must be {n}×{n}")));
        }
        if linalg::hermiticity_defect(&matrix) > 1e-10 {
            return Err(Error::Precondition("operator is not Hermitian".into()));
        }
        let eig = linalg::hermitian_eigenvalues(&matrix);
        let (hi, lo) = (eig[0], eig[eig.len() - 1]);
        if lo < -1e-10 || hi > 1.0 + 1e-10 {
            return Err(Error::Precondition(format!(
                "operator spectrum [{lo:.3e}, {hi:.6}] is outside [0, 1]"
            )));
        }
        Ok(Self { cutoff, matrix })
    }

    pub fn from_state(rho: &DensityOperator) -> Result<Self> {
        Self::new(rho.cutoff(), rho.matrix().clone())
    }

    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

impl FockOperator for BoundedOperator {
    fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

/// Eigenvalues of a state, nonincreasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    probs: Vec<f64>,
}

impl Spectrum {
    /// Sorts the input nonincreasing (stable) after checking it is a
    /// sub-probability vector.
    pub fn new(mut probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::domain("empty spectrum"));
        }
        if probs.iter().any(|&p| !(0.0..=1.0 + 1e-12).contains(&p)) {
            return Err(Error::domain("spectrum entries must lie in [0, 1]"));
        }
        let sum: f64 = probs.iter().sum();
        if sum > 1.0 + 1e-12 {
            return Err(Error::domain(format!("spectrum sums to {sum} > 1")));
        }
        probs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(Self { probs })
    }

    /// `(1 − z) zⁿ` for `n < len`, renormalised to sum to one when `normalize`.
    pub fn thermal(z: f64, len: usize, normalize: bool) -> Result<Self> {
        if !(0.0..1.0).contains(&z) {
            return Err(Error::domain(format!(
                "thermal parameter z = {z} not in [0, 1)"
            )));
        }
        let mut probs: Vec<f64> = (0..len).map(|n| (1.0 - z) * z.powi(n as i32)).collect();
        if normalize {
            let s: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= s);
        }
        Self::new(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `−Σ p ln p`.
    pub fn entropy(&self) -> f64 {
        entropy_of_probs(&self.probs)
    }

    /// Number of strictly positive entries.
    pub fn rank(&self) -> usize {
        self.probs.iter().filter(|&&p| p > 0.0).count()
    }
}

/// A phase-space point `z ∈ ℂ^M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherentAmplitude(Vec<C64>);

impl CoherentAmplitude {
    pub fn new(z: Vec<C64>) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::domain("phase-space point needs at least one mode"));
        }
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::domain("phase-space point must be finite"));
        }
        Ok(Self(z))
    }

    /// Single-mode point; panics on non-finite input.
    pub fn single(z: C64) -> Self {
        Self::new(vec![z]).expect("finite single-mode amplitude")
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        Self::single(C64::from_polar(r, theta))
    }

    pub fn modes(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[C64] {
        &self.0
    }

    /// `|z|² = Σ |z_i|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|c| c * s).collect())
    }
}
