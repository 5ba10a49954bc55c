use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{coherent_vector, CoherentAmplitude, DensityOperator, FockCutoff, Spectrum};
use crate::error::{Error, Result};
use crate::linalg;
use crate::{CMatrix, C64};

fn require_single_mode(cutoff: FockCutoff, what: &str) -> Result<()> {
    if cutoff.modes() != 1 {
        return Err(Error::Precondition(format!(
            "{what} is defined for one mode"
        )));
    }
    Ok(())
}

/// Thermal state `(1 − z) Σ zⁿ |n⟩⟨n|` truncated to the cutoff;
/// `tail_bound = z^dim`.
pub fn thermal_state(z: f64, cutoff: FockCutoff) -> Result<DensityOperator> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::domain(format!(
            "thermal parameter z = {z} not in [0, 1)"
        )));
    }
    require_single_mode(cutoff, "thermal_state")?;
    let dim = cutoff.dim();
    let probs: Vec<f64> = (0..dim).map(|n| (1.0 - z) * z.powi(n as i32)).collect();
    let tail = z.powi(dim as i32);
    DensityOperator::from_diagonal(cutoff, &probs, tail)
}

/// `ω_z^{⊗M}` on an M-mode cutoff.
pub fn thermal_product(z: f64, cutoff: FockCutoff) -> Result<DensityOperator> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::domain(format!(
            "thermal parameter z = {z} not in [0, 1)"
        )));
    }
    let n = cutoff.total_dim();
    let probs: Vec<f64> = (0..n)
        .map(|i| {
            let photons = cutoff.photon_number(i);
            (1.0 - z).powi(cutoff.modes() as i32) * z.powi(photons as i32)
        })
        .collect();
    let kept = (1.0 - z.powi(cutoff.dim() as i32)).powi(cutoff.modes() as i32);
    DensityOperator::from_diagonal(cutoff, &probs, (1.0 - kept).max(0.0))
}

/// Number state `|n⟩⟨n|` (flat index `n` for multimode cutoffs).
pub fn fock_state(n: usize, cutoff: FockCutoff) -> Result<DensityOperator> {
    if n >= cutoff.total_dim() {
        return Err(Error::Truncation(format!("level {n} is above the cutoff")));
    }
    let mut probs = vec![0.0; n + 1];
    probs[n] = 1.0;
    DensityOperator::from_diagonal(cutoff, &probs, 0.0)
}

pub fn vacuum(cutoff: FockCutoff) -> DensityOperator {
    fock_state(0, cutoff).expect("vacuum fits every cutoff")
}

/// `P|z⟩⟨z|P`, with the coherent tail as `tail_bound`.
pub fn coherent_state(z: &CoherentAmplitude, cutoff: FockCutoff) -> Result<DensityOperator> {
    let v = coherent_vector(z, cutoff)?;
    let m = linalg::hermitize(&(&v.amplitudes * v.amplitudes.adjoint()));
    Ok(DensityOperator::from_parts(cutoff, m, v.tail))
}

/// `Tr[N ρ]` restricted to the cutoff.
pub fn mean_energy(rho: &DensityOperator) -> f64 {
    let cutoff = rho.cutoff();
    rho.matrix()
        .diagonal()
        .iter()
        .enumerate()
        .map(|(i, c)| cutoff.photon_number(i) as f64 * c.re)
        .sum()
}

/// Diagonal state carrying the spectrum of `rho` in nonincreasing order along
/// the Fock basis.
pub fn passive_rearrangement(rho: &DensityOperator) -> Result<DensityOperator> {
    require_single_mode(rho.cutoff(), "passive_rearrangement")?;
    let spectrum = rho.spectrum()?;
    let n = rho.cutoff().dim();
    let mut m = CMatrix::zeros(n, n);
    for (i, &p) in spectrum.probs().iter().enumerate() {
        m[(i, i)] = C64::new(p, 0.0);
    }
    Ok(DensityOperator::from_parts(
        rho.cutoff(),
        m,
        rho.tail_bound(),
    ))
}

/// Haar-random `n × n` unitary from a ChaCha8 stream seeded with `seed`:
/// QR of a complex Gaussian matrix, with the phases of `R`'s diagonal moved
/// into `Q`.
pub fn haar_unitary(n: usize, seed: u64) -> CMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_unitary_with(n, &mut rng)
}

pub(crate) fn haar_unitary_with<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re * scale, im * scale)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// `U diag(spec) U†` with `U` Haar-distributed on the whole truncated space.
pub fn random_isospectral_state(
    spec: &Spectrum,
    cutoff: FockCutoff,
    seed: u64,
) -> Result<DensityOperator> {
    let n = cutoff.total_dim();
    if spec.len() > n {
        return Err(Error::shape(format!(
            "spectrum of length {} does not fit in {n} levels",
            spec.len()
        )));
    }
    let u = haar_unitary(n, seed);
    Ok(conjugate_spectrum(spec, &u, cutoff))
}

/// `U diag(spec) U†` for a given unitary.
pub(crate) fn conjugate_spectrum(
    spec: &Spectrum,
    u: &CMatrix,
    cutoff: FockCutoff,
) -> DensityOperator {
    let n = cutoff.total_dim();
    let mut scaled = CMatrix::zeros(n, spec.len());
    for (k, &p) in spec.probs().iter().enumerate() {
        for i in 0..n {
            scaled[(i, k)] = u[(i, k)] * p;
        }
    }
    let cols = u.columns(0, spec.len());
    let m = linalg::hermitize(&(scaled * cols.adjoint()));
    let tail = (1.0 - spec.probs().iter().sum::<f64>()).max(0.0);
    DensityOperator::from_parts(cutoff, m, tail)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{schatten_norm, von_neumann_entropy};

    #[test]
    fn thermal_examples() {
        let c = FockCutoff::single(8).unwrap();
        let vac = thermal_state(0.0, c).unwrap();
        assert_eq!(vac.matrix()[(0, 0)].re, 1.0);
        assert_eq!(vac.tail_bound(), 0.0);
        let w = thermal_state(0.5, c).unwrap();
        assert!((w.matrix()[(1, 1)].re - 0.25).abs() < 1e-16);
        assert!((w.tail_bound() - 0.5f64.powi(8)).abs() < 1e-18);
        assert!(thermal_state(1.0, c).is_err());
        assert!(thermal_state(-0.1, c).is_err());
    }

    #[test]
    fn thermal_energy_entropy_and_norm() {
        let c = FockCutoff::single(64).unwrap();
        let w = thermal_state(0.5, c).unwrap();
        assert!((mean_energy(&w) - 1.0).abs() < 1e-10);
        assert!((von_neumann_entropy(&w).unwrap() - 2.0 * std::f64::consts::LN_2).abs() < 1e-8);
        assert!((schatten_norm(&w, 2.0).unwrap() - 0.5 / 0.75f64.sqrt()).abs() < 1e-12);
        assert!((schatten_norm(&w, 1.0).unwrap() - 1.0).abs() <= w.tail_bound() + 1e-15);
    }

    #[test]
    fn fock_energy() {
        let c = FockCutoff::single(6).unwrap();
        assert_eq!(mean_energy(&fock_state(3, c).unwrap()), 3.0);
        assert_eq!(mean_energy(&vacuum(c)), 0.0);
    }

    #[test]
    fn passive_rearrangement_sorts_onto_fock_basis() {
        let c = FockCutoff::single(10).unwrap();
        let mut probs = vec![0.0; 10];
        probs[3] = 0.5;
        probs[0] = 0.3;
        probs[7] = 0.2;
        let rho = DensityOperator::from_diagonal(c, &probs, 0.0).unwrap();
        let p = passive_rearrangement(&rho).unwrap();
        let diag: Vec<f64> = p.matrix().diagonal().iter().map(|x| x.re).collect();
        assert!((diag[0] - 0.5).abs() < 1e-15);
        assert!((diag[1] - 0.3).abs() < 1e-15);
        assert!((diag[2] - 0.2).abs() < 1e-15);
        assert!(diag[3..].iter().all(|&x| x.abs() < 1e-15));
        let again = passive_rearrangement(&p).unwrap();
        assert!((again.matrix() - p.matrix()).norm() < 1e-15);
    }

    #[test]
    fn pure_state_rearranges_to_vacuum() {
        let c = FockCutoff::single(8).unwrap();
        let spec = Spectrum::new(vec![1.0]).unwrap();
        let psi = random_isospectral_state(&spec, c, 3).unwrap();
        let p = passive_rearrangement(&psi).unwrap();
        assert!((p.matrix() - vacuum(c).matrix()).norm() < 1e-12);
    }

    #[test]
    fn haar_is_unitary_and_deterministic() {
        let u = haar_unitary(9, 42);
        assert!((u.adjoint() * &u - CMatrix::identity(9, 9)).norm() < 1e-12);
        assert_eq!(u, haar_unitary(9, 42));
        assert_ne!(u, haar_unitary(9, 43));
    }

    #[test]
    fn isospectral_state_keeps_spectrum() {
        let c = FockCutoff::single(12).unwrap();
        let spec = Spectrum::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let rho = random_isospectral_state(&spec, c, 7).unwrap();
        let eig = rho.eigenvalues();
        for (a, b) in eig.iter().zip(spec.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((von_neumann_entropy(&rho).unwrap() - spec.entropy()).abs() < 1e-10);
    }
}
