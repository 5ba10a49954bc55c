//! Channel identities. Each compares two constructions of the same
//! operator and uses the stated tolerance as its budget.

use super::SLACK;
use crate::channels::{
    amplifier, amplifier_between, attenuator, measure_reprepare, random_displacement, KrausChannel,
};
use crate::error::{Error, Result};
use crate::fock::{
    coherent_state, coherent_vector, thermal_state, CoherentAmplitude, DensityOperator, FockCutoff,
};
use crate::linalg;
use crate::report::VerificationReport;
use crate::{CMatrix, C64};

fn max_entry(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// `A_κ(ω_z) = ω_{z'}` with `E' = κE + κ − 1`, as fidelity `≥ 1 − 1e−8`.
/// Both sides are Fock-diagonal, so the fidelity is a sum of square roots.
pub fn check_amplifier_thermal(z: f64, kappa: f64, tail: f64) -> Result<VerificationReport> {
    let c = FockCutoff::for_thermal(z, tail)?;
    let rho = thermal_state(z, c)?;
    let out = amplifier(kappa, c)?.apply(&rho)?;
    let e = z / (1.0 - z);
    let e_out = kappa * e + kappa - 1.0;
    let z_out = e_out / (e_out + 1.0);
    let expected = thermal_state(z_out, out.cutoff())?;
    let fid = linalg::fidelity(out.matrix(), expected.matrix());
    let dist = 0.5 * linalg::trace_norm(&(out.matrix() - expected.matrix()));
    Ok(
        VerificationReport::lower_bound("amplifier_thermal", fid, 1.0, 1e-8)
            .input("z", z)
            .input("kappa", kappa)
            .detail("z_out", z_out)
            .detail("trace_distance", dist)
            .detail("output_tail", out.tail_bound()),
    )
}

/// `E_λ(|z⟩⟨z|) = |√λ z⟩⟨√λ z|`, as fidelity `⟨√λ z|E_λ(ρ)|√λ z⟩ ≥ 1 − 1e−8`.
pub fn check_attenuator_coherent(z: C64, lambda: f64, tail: f64) -> Result<VerificationReport> {
    let c = FockCutoff::for_coherent(z.norm_sqr(), tail)?;
    let rho = coherent_state(&CoherentAmplitude::single(z), c)?;
    let out = attenuator(lambda, c)?.apply(&rho)?;
    let psi = coherent_vector(&CoherentAmplitude::single(z * lambda.sqrt()), c)?.amplitudes;
    let fid = (psi.adjoint() * out.matrix() * &psi)[(0, 0)].re;
    Ok(
        VerificationReport::lower_bound("attenuator_coherent", fid, 1.0, 1e-8)
            .input("z", [z.re, z.im])
            .input("lambda", lambda)
            .detail("input_tail", rho.tail_bound()),
    )
}

/// `κ A_κ†(X) = E_{1/κ}(X)` entrywise on `X = |a⟩⟨b|`, `a, b < dim`.
/// The margin uses the block `a, b, rows, cols < ⌊dim/κ⌋ − 2`; the
/// deviation over the whole block is recorded as a detail.
pub fn check_duality(kappa: f64, dim: usize) -> Result<VerificationReport> {
    if !(kappa > 1.0) {
        return Err(Error::domain("duality needs κ > 1"));
    }
    let safe = ((dim as f64 / kappa).floor() as usize).saturating_sub(2);
    if safe == 0 {
        return Err(Error::Truncation(format!(
            "dim {dim} leaves no safe block at κ = {kappa}"
        )));
    }
    let c = FockCutoff::single(dim)?;
    let amp = amplifier_between(kappa, c, c)?;
    let att = attenuator(1.0 / kappa, c)?;
    let (mut worst_safe, mut worst_full) = (0.0f64, 0.0f64);
    for a in 0..dim {
        for b in 0..dim {
            let mut x = CMatrix::zeros(dim, dim);
            x[(a, b)] = C64::new(1.0, 0.0);
            let diff = amp.dual_apply(&x)? * C64::new(kappa, 0.0) - att.apply_matrix(&x)?;
            worst_full = worst_full.max(max_entry(&diff));
            if a < safe && b < safe {
                worst_safe =
                    worst_safe.max(max_entry(&diff.view((0, 0), (safe, safe)).into_owned()));
            }
        }
    }
    Ok(
        VerificationReport::with_margin("duality", worst_safe, 0.0, -worst_safe, 1e-10)
            .input("kappa", kappa)
            .input("dim", dim)
            .input("safe_block", safe)
            .detail("full_block_deviation", worst_full),
    )
}

/// `κ A_κ†(|z⟩⟨z|) = |z/√κ⟩⟨z/√κ|` up to the coherent truncation.
pub fn check_amplifier_coherent_dual(kappa: f64, z: C64, tail: f64) -> Result<VerificationReport> {
    let c = FockCutoff::for_coherent(z.norm_sqr(), tail)?;
    let v = coherent_vector(&CoherentAmplitude::single(z), c)?;
    let x = &v.amplitudes * v.amplitudes.adjoint();
    let lhs = amplifier_between(kappa, c, c)?.dual_apply(&x)? * C64::new(kappa, 0.0);
    let w = coherent_vector(&CoherentAmplitude::single(z / kappa.sqrt()), c)?.amplitudes;
    let dist = linalg::trace_norm(&linalg::hermitize(&(lhs - &w * w.adjoint())));
    // ‖P|z⟩⟨z|P − |z⟩⟨z|‖₁ ≤ 2√tail + tail, and the same for the image
    let charge = 2.0 * (2.0 * v.tail.sqrt() + v.tail);
    Ok(
        VerificationReport::with_margin("amplifier_coherent_dual", dist, 0.0, -dist, 1e-8 + charge)
            .input("kappa", kappa)
            .input("z", [z.re, z.im])
            .detail("coherent_tail", v.tail),
    )
}

/// `M_κ(ρ) = A_κ(N_κ(ρ))`, compared on the first `out_dim` output levels.
/// Both compressed outputs are exact: the amplifier only raises levels, so
/// the block depends only on the same block of `N_κ(ρ)`.
pub fn check_factorization(
    rho: &DensityOperator,
    kappa: f64,
    out_dim: usize,
) -> Result<VerificationReport> {
    let c_in = rho.cutoff();
    let c_out = FockCutoff::single(out_dim)?;
    let m = measure_reprepare(kappa, c_in, c_out)?.apply(rho)?;
    let n = random_displacement(kappa, c_in, c_out)?.apply(rho)?;
    let an = amplifier_between(kappa, c_out, c_out)?.apply(&n)?;
    let dist = 0.5 * linalg::trace_norm(&(m.matrix() - an.matrix()));
    Ok(
        VerificationReport::with_margin("factorization", dist, 0.0, -dist, 1e-6)
            .input("kappa", kappa)
            .input("in_dim", c_in.dim())
            .input("out_dim", out_dim)
            .detail("block_trace", m.trace()),
    )
}

/// `E_λ ∘ E_μ = E_{λμ}` on the whole block (the attenuator never raises
/// levels, so all three compressions are exact).
pub fn check_attenuator_semigroup(
    lambda: f64,
    mu: f64,
    rho: &DensityOperator,
) -> Result<VerificationReport> {
    let c = rho.cutoff();
    let two = attenuator(lambda, c)?.apply(&attenuator(mu, c)?.apply(rho)?)?;
    let one = attenuator(lambda * mu, c)?.apply(rho)?;
    let dev = max_entry(&(two.matrix() - one.matrix()));
    Ok(
        VerificationReport::with_margin("attenuator_semigroup", dev, 0.0, -dev, 1e-9)
            .input("lambda", lambda)
            .input("mu", mu)
            .input("dim", c.dim()),
    )
}

/// `κ A_κ(σ) ≤ ‖σ‖_∞ I`: largest eigenvalue of the scaled output against
/// the input's.
pub fn check_operator_bound(rho: &DensityOperator, kappa: f64) -> Result<VerificationReport> {
    let out = amplifier(kappa, rho.cutoff())?.apply(rho)?;
    let top_out = kappa
        * linalg::hermitian_eigenvalues(out.matrix())
            .last()
            .copied()
            .unwrap_or(0.0);
    let top_in = linalg::hermitian_eigenvalues(rho.matrix())
        .last()
        .copied()
        .unwrap_or(0.0);
    Ok(
        VerificationReport::upper_bound("operator_bound", top_out, top_in, SLACK)
            .input("kappa", kappa),
    )
}

/// `Σ K†K = I` on the first `levels` input levels to within `tol`.
pub fn check_trace_preservation(
    ch: &KrausChannel,
    levels: usize,
    tol: f64,
) -> Result<VerificationReport> {
    let defect = ch.trace_defect_on(levels);
    Ok(
        VerificationReport::with_margin("trace_preservation", defect, 0.0, -defect, tol)
            .input("channel", format!("{:?}", ch.kind()))
            .input("parameter", ch.parameter())
            .input("levels", levels),
    )
}

/// `‖N_κ(ρ) − ρ‖₁` along increasing κ: must not grow. The empirical
/// log-log slope between the last two points is recorded.
pub fn check_displacement_trend(
    rho: &DensityOperator,
    kappas: &[f64],
    out_dim: usize,
) -> Result<VerificationReport> {
    if kappas.len() < 2 || kappas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("need at least two increasing κ values"));
    }
    let c_out = FockCutoff::single(out_dim)?;
    let embedded = rho.embed(c_out)?;
    let mut series = Vec::new();
    for &k in kappas {
        let out = random_displacement(k, rho.cutoff(), c_out)?.apply(rho)?;
        series.push((k, linalg::trace_norm(&(out.matrix() - embedded.matrix()))));
    }
    let shrink = series
        .windows(2)
        .map(|w| w[0].1 - w[1].1)
        .fold(f64::INFINITY, f64::min);
    let n = series.len();
    let rate = (series[n - 1].1 / series[n - 2].1).ln() / (series[n - 1].0 / series[n - 2].0).ln();
    Ok(
        VerificationReport::with_margin("displacement_trend", series[n - 1].1, 0.0, shrink, SLACK)
            .input("kappas", kappas)
            .input("out_dim", out_dim)
            .series(series)
            .detail("loglog_rate", rate),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;

    #[test]
    fn identities_hold() {
        assert!(check_amplifier_thermal(0.5, 2.0, 1e-14).unwrap().pass);
        assert!(
            check_attenuator_coherent(C64::new(1.0, 0.5), 0.3, 1e-14)
                .unwrap()
                .pass
        );
        let d = check_duality(2.0, 20).unwrap();
        assert!(
            d.pass && d.details["full_block_deviation"] < 1e-10,
            "{:?}",
            d
        );
        assert!(
            check_amplifier_coherent_dual(4.0, C64::new(1.0, 0.0), 1e-14)
                .unwrap()
                .pass
        );
    }

    #[test]
    fn factorization_and_trend() {
        let mut r = sampling::rng(5);
        let rho = sampling::random_state(&mut r, FockCutoff::single(12).unwrap()).unwrap();
        let f = check_factorization(&rho, 2.0, 40).unwrap();
        assert!(f.pass, "{}", f.lhs);
        let t = check_displacement_trend(&rho, &[2.0, 8.0, 32.0], 24).unwrap();
        assert!(t.pass);
        assert!(check_attenuator_semigroup(0.6, 0.7, &rho).unwrap().pass);
        assert!(check_operator_bound(&rho, 3.0).unwrap().pass);
    }
}
