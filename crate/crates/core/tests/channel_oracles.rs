//! Amplifier and attenuator against their Stinespring dilations: a
//! two-mode squeezer and a beam splitter acting on `ρ ⊗ |0⟩⟨0|`, built by
//! matrix exponentials on the chains each unitary leaves invariant.

use nalgebra::DMatrix;
use wehrl_core::channels::{amplifier, attenuator};
use wehrl_core::sampling;
use wehrl_core::{CMatrix, FockCutoff, C64};

/// `exp(r(a†b† − ab))|n, 0⟩ = Σ_m c_m |n+m, m⟩`; the chain keeps
/// `n_a − n_b = n` fixed.
fn squeezed_chain(n: usize, r: f64, len: usize) -> Vec<f64> {
    let mut gen = DMatrix::<f64>::zeros(len, len);
    for m in 0..len - 1 {
        let w = (((n + m + 1) * (m + 1)) as f64).sqrt();
        gen[(m + 1, m)] = w;
        gen[(m, m + 1)] = -w;
    }
    let u = (gen * r).exp();
    u.column(0).iter().copied().collect()
}

/// `exp(θ(a†b − ab†))|n, 0⟩ = Σ_j c_j |n−j, j⟩`; `n_a + n_b = n` is kept,
/// so the chain is finite and the oracle exact.
fn beam_splitter_chain(n: usize, theta: f64) -> Vec<f64> {
    let len = n + 1;
    let mut gen = DMatrix::<f64>::zeros(len, len);
    // index j ↔ |n−j, j⟩; a b† takes j → j+1 with weight √((n−j)(j+1))
    for j in 0..n {
        let w = (((n - j) * (j + 1)) as f64).sqrt();
        gen[(j + 1, j)] = -w;
        gen[(j, j + 1)] = w;
    }
    let u = (gen * theta).exp();
    u.column(0).iter().copied().collect()
}

fn amplifier_oracle(rho: &CMatrix, kappa: f64, out_dim: usize) -> CMatrix {
    let r = kappa.sqrt().acosh();
    let d = rho.nrows();
    let len = out_dim + 200;
    let chains: Vec<Vec<f64>> = (0..d).map(|n| squeezed_chain(n, r, len)).collect();
    let mut out = CMatrix::zeros(out_dim, out_dim);
    for n in 0..d {
        for k in 0..d {
            for m in 0..len {
                if n + m < out_dim && k + m < out_dim {
                    out[(n + m, k + m)] += rho[(n, k)] * chains[n][m] * chains[k][m];
                }
            }
        }
    }
    out
}

fn attenuator_oracle(rho: &CMatrix, lambda: f64) -> CMatrix {
    let theta = lambda.sqrt().acos();
    let d = rho.nrows();
    let chains: Vec<Vec<f64>> = (0..d).map(|n| beam_splitter_chain(n, theta)).collect();
    let mut out = CMatrix::zeros(d, d);
    for n in 0..d {
        for k in 0..d {
            for j in 0..=n.min(k) {
                out[(n - j, k - j)] += rho[(n, k)] * chains[n][j] * chains[k][j];
            }
        }
    }
    out
}

fn max_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z: &C64| z.norm()).fold(0.0, f64::max)
}

#[test]
fn amplifier_is_a_two_mode_squeezer_with_vacuum_environment() {
    let mut rng = sampling::rng(11);
    for (dim, kappa) in [(2, 1.5), (4, 2.0), (6, 4.0), (8, 2.5)] {
        let cut = FockCutoff::single(dim).unwrap();
        let rho = sampling::random_state(&mut rng, cut).unwrap();
        let ch = amplifier(kappa, cut).unwrap();
        let out = ch.apply(&rho).unwrap();
        let oracle = amplifier_oracle(rho.matrix(), kappa, out.cutoff().dim());
        let diff = max_entry(&(out.matrix() - &oracle));
        assert!(diff < 1e-10, "dim {dim}, κ = {kappa}: {diff:e}");
    }
}

#[test]
fn attenuator_is_a_beam_splitter_with_vacuum_environment() {
    let mut rng = sampling::rng(12);
    for (dim, lambda) in [(2, 0.3), (5, 0.5), (8, 0.9), (8, 0.0), (6, 1.0)] {
        let cut = FockCutoff::single(dim).unwrap();
        let rho = sampling::random_state(&mut rng, cut).unwrap();
        let out = attenuator(lambda, cut).unwrap().apply(&rho).unwrap();
        let diff = max_entry(&(out.matrix() - &attenuator_oracle(rho.matrix(), lambda)));
        assert!(diff < 1e-12, "dim {dim}, λ = {lambda}: {diff:e}");
    }
}

#[test]
fn squeezer_oracle_reproduces_the_thermal_output_of_vacuum() {
    // sanity of the oracle itself: |c_m|² = (1/κ)((κ−1)/κ)^m
    let kappa: f64 = 3.0;
    let c = squeezed_chain(0, kappa.sqrt().acosh(), 150);
    for (m, cm) in c.iter().take(20).enumerate() {
        let expected = (1.0 / kappa) * ((kappa - 1.0) / kappa).powi(m as i32);
        assert!((cm * cm - expected).abs() < 1e-13, "m = {m}");
    }
}
