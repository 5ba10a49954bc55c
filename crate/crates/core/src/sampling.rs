//! Seeded generators for the randomized suites. Every generator takes the
//! RNG by `&mut`, so one seed drives a whole suite reproducibly.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::Result;
use crate::fock::{
    conjugate_spectrum, haar_unitary_with, BoundedOperator, DensityOperator, FockCutoff, Spectrum,
};
use crate::linalg;
use crate::{CMatrix, C64};

/// The generator used throughout: ChaCha8 seeded from a `u64`.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random spectrum of length `1..=max_len`. Entries are powers of
/// exponential variates, normalised; the random exponent spreads the
/// entropies from nearly flat to nearly pure.
pub fn random_spectrum<R: Rng + ?Sized>(rng: &mut R, max_len: usize) -> Result<Spectrum> {
    let len = rng.random_range(1..=max_len.max(1));
    let beta = rng.random_range(0.5..4.0);
    let raw: Vec<f64> = (0..len)
        .map(|_| {
            let e: f64 = Exp1.sample(rng);
            e.powf(beta)
        })
        .collect();
    let s: f64 = raw.iter().sum();
    Spectrum::new(raw.into_iter().map(|x| x / s).collect())
}

/// Spectrum padded or truncated to exactly `len` entries, renormalised.
pub fn random_full_spectrum<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Result<Spectrum> {
    let raw: Vec<f64> = (0..len).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = raw.iter().sum();
    Spectrum::new(raw.into_iter().map(|x: f64| x / s).collect())
}

/// `U diag(spec) U†` with Haar `U` drawn from `rng`.
pub fn isospectral_state<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &Spectrum,
    cutoff: FockCutoff,
) -> Result<DensityOperator> {
    if spec.len() > cutoff.total_dim() {
        return Err(crate::Error::shape("spectrum longer than the cutoff"));
    }
    let u = haar_unitary_with(cutoff.total_dim(), rng);
    Ok(conjugate_spectrum(spec, &u, cutoff))
}

/// Random state: random spectrum of length `≤ cutoff`, Haar rotated.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, cutoff: FockCutoff) -> Result<DensityOperator> {
    let spec = random_spectrum(rng, cutoff.total_dim())?;
    isospectral_state(rng, &spec, cutoff)
}

/// Random operator with `0 ≤ A ≤ I`: uniform eigenvalues, Haar eigenbasis.
pub fn random_contraction<R: Rng + ?Sized>(
    rng: &mut R,
    cutoff: FockCutoff,
) -> Result<BoundedOperator> {
    let n = cutoff.total_dim();
    let eig: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
    let u = haar_unitary_with(n, rng);
    let mut scaled = u.clone();
    for (j, &e) in eig.iter().enumerate() {
        scaled.column_mut(j).scale_mut(e);
    }
    let m: CMatrix = linalg::hermitize(&(scaled * u.adjoint()));
    BoundedOperator::new(cutoff, m)
}

/// `φ(z) = Σ_i a_i exp(−|z − c_i|²/w_i²)` with `Σ a_i ≤ 1`, so `0 ≤ φ ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBumps {
    pub bumps: Vec<(C64, f64, f64)>,
}

impl GaussianBumps {
    pub fn eval(&self, z: C64) -> f64 {
        self.bumps
            .iter()
            .map(|&(c, w, a)| a * (-(z - c).norm_sqr() / (w * w)).exp())
            .sum()
    }

    /// One to three bumps with centres in the disc `|c| ≤ 0.8`, widths in
    /// `[0.7, 1.3]`, total height in `[0.3, 1]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let k = rng.random_range(1..=3);
        let height = rng.random_range(0.3..=1.0);
        let raw: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
        let s: f64 = raw.iter().sum();
        let bumps = raw
            .into_iter()
            .map(|r: f64| {
                let radius = 0.8 * rng.random_range(0.0f64..1.0).sqrt();
                let angle = rng.random_range(0.0..std::f64::consts::TAU);
                let w = rng.random_range(0.7..=1.3);
                (C64::from_polar(radius, angle), w, height * r / s)
            })
            .collect();
        Self { bumps }
    }

    /// `|z|²` beyond which `φ < e^{−40}`.
    pub fn extent(&self) -> f64 {
        let reach = self
            .bumps
            .iter()
            .map(|&(c, w, _)| c.norm() + w * 40f64.sqrt())
            .fold(0.0, f64::max);
        reach * reach
    }

    /// Cutoff that keeps all but `tol` of `∫ φ(z)|z⟩⟨z|`'s trace: the
    /// smoothed operator's populations decay like `(w²/(w²+1))ⁿ` around
    /// the displaced centres.
    pub fn cutoff_for(&self, tol: f64) -> usize {
        let (c, w) = self
            .bumps
            .iter()
            .map(|&(c, w, _)| (c.norm(), w))
            .fold((0.0f64, 0.0f64), |(a, b), (c, w)| (a.max(c), b.max(w)));
        let ratio = w * w / (w * w + 1.0);
        let n = (tol.ln() - (1.0 - ratio).ln()) / ratio.ln();
        (n.ceil() as usize + (4.0 * c * c).ceil() as usize + 8).max(8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_reproducible_and_valid() {
        let c = FockCutoff::single(9).unwrap();
        let a = random_state(&mut rng(3), c).unwrap();
        let b = random_state(&mut rng(3), c).unwrap();
        assert_eq!(a, b);
        assert!((a.trace() - 1.0).abs() < 1e-12);
        let op = random_contraction(&mut rng(4), c).unwrap();
        let eig = linalg::hermitian_eigenvalues(op.matrix());
        assert!(eig[0] <= 1.0 + 1e-12 && *eig.last().unwrap() >= -1e-12);
    }

    #[test]
    fn spectra_are_normalised_probability_vectors() {
        let mut r = rng(1);
        for _ in 0..50 {
            let s = random_spectrum(&mut r, 24).unwrap();
            assert!(s.len() <= 24);
            assert!((s.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn bumps_stay_in_unit_interval() {
        let mut r = rng(8);
        for _ in 0..20 {
            let phi = GaussianBumps::random(&mut r);
            let total: f64 = phi.bumps.iter().map(|b| b.2).sum();
            assert!(total <= 1.0 + 1e-12);
            for c in &phi.bumps {
                assert!(phi.eval(c.0) <= 1.0 + 1e-12);
            }
            assert!(phi.eval(C64::new(phi.extent().sqrt(), 0.0)) < 1e-17);
        }
    }
}
