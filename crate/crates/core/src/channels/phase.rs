use super::{ChannelKind, KrausChannel, KrausOperator};
use crate::error::{Error, Result};
use crate::fock::{coherent_amplitudes, displacement_block, FockCutoff};
use crate::phase_space::QuadratureScheme;
use crate::{CVector, C64};

/// Gauss–Laguerre scheme in rate `κ + 1` that integrates every matrix
/// element of `N_κ` and `M_κ` between the given cutoffs exactly: the
/// integrands are `e^{−(κ+1)|z|²}` times polynomials of degree at most
/// `in + out − 2` in `|z|²`, with angular harmonics below `in + out`.
pub fn phase_scheme(kappa: f64, in_dim: usize, out_dim: usize) -> Result<QuadratureScheme> {
    QuadratureScheme::gauss_laguerre(
        kappa + 1.0,
        (in_dim + out_dim) / 2 + 2,
        in_dim + out_dim + 1,
    )
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(Error::domain(format!("κ = {kappa} must be ≥ 1")));
    }
    Ok(())
}

fn check_single(
    in_cutoff: FockCutoff,
    out_cutoff: FockCutoff,
    scheme: &QuadratureScheme,
) -> Result<()> {
    if in_cutoff.modes() != 1 || out_cutoff.modes() != 1 || scheme.modes() != 1 {
        return Err(Error::domain("phase-space channels are built single-mode"));
    }
    Ok(())
}

/// `N_κ(ρ) = ∫ κ e^{−κ|z|²} D(z) ρ D(z)† d²z/π` with the exact scheme.
pub fn random_displacement(
    kappa: f64,
    in_cutoff: FockCutoff,
    out_cutoff: FockCutoff,
) -> Result<KrausChannel> {
    check_kappa(kappa)?;
    let scheme = phase_scheme(kappa, in_cutoff.dim(), out_cutoff.dim())?;
    random_displacement_with(kappa, in_cutoff, out_cutoff, &scheme)
}

/// `N_κ` on a caller-supplied scheme; Kraus operators
/// `√(w_i κ e^{−κ|z_i|²}) D(z_i)`. The reported quadrature error is how far
/// the scheme is from integrating the displacement density to one.
pub fn random_displacement_with(
    kappa: f64,
    in_cutoff: FockCutoff,
    out_cutoff: FockCutoff,
    scheme: &QuadratureScheme,
) -> Result<KrausChannel> {
    check_kappa(kappa)?;
    check_single(in_cutoff, out_cutoff, scheme)?;
    let mut kraus = Vec::with_capacity(scheme.len());
    let mut density = 0.0;
    for (z, &w) in scheme.nodes().iter().zip(scheme.weights()) {
        let z = z.components()[0];
        let c = w * kappa * (-kappa * z.norm_sqr()).exp();
        density += c;
        if c <= 0.0 {
            continue;
        }
        kraus.push(KrausOperator::Dense(
            displacement_block(z, out_cutoff.dim(), in_cutoff.dim()) * C64::new(c.sqrt(), 0.0),
        ));
    }
    KrausChannel::from_parts(
        ChannelKind::RandomDisplacement,
        kappa,
        in_cutoff,
        out_cutoff,
        kraus,
        (density - 1.0).abs(),
    )
}

/// `M_κ(ρ) = ∫ ⟨z|ρ|z⟩ |√κ z⟩⟨√κ z| d²z/π` with the exact scheme.
pub fn measure_reprepare(
    kappa: f64,
    in_cutoff: FockCutoff,
    out_cutoff: FockCutoff,
) -> Result<KrausChannel> {
    check_kappa(kappa)?;
    let scheme = phase_scheme(kappa, in_cutoff.dim(), out_cutoff.dim())?;
    measure_reprepare_with(kappa, in_cutoff, out_cutoff, &scheme)
}

/// `M_κ` on a caller-supplied scheme; rank-one Kraus operators
/// `√w_i |√κ z_i⟩⟨z_i|`. The quadrature error is the scheme's deviation
/// from the resolution of the identity on the vacuum, rescaled to the
/// scheme's rate.
pub fn measure_reprepare_with(
    kappa: f64,
    in_cutoff: FockCutoff,
    out_cutoff: FockCutoff,
    scheme: &QuadratureScheme,
) -> Result<KrausChannel> {
    check_kappa(kappa)?;
    check_single(in_cutoff, out_cutoff, scheme)?;
    let sk = kappa.sqrt();
    let mut kraus = Vec::with_capacity(scheme.len());
    // ∫ e^{−(κ+1)|z|²} d²z/π = 1/(κ+1) checks the scheme on the relevant envelope
    let mut envelope = 0.0;
    for (z, &w) in scheme.nodes().iter().zip(scheme.weights()) {
        let z = z.components()[0];
        envelope += w * (-(kappa + 1.0) * z.norm_sqr()).exp();
        let right = CVector::from_vec(coherent_amplitudes(z, in_cutoff.dim()));
        let left = CVector::from_vec(coherent_amplitudes(z * sk, out_cutoff.dim()))
            * C64::new(w.sqrt(), 0.0);
        kraus.push(KrausOperator::RankOne { left, right });
    }
    KrausChannel::from_parts(
        ChannelKind::MeasureReprepare,
        kappa,
        in_cutoff,
        out_cutoff,
        kraus,
        (envelope * (kappa + 1.0) - 1.0).abs(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{mean_energy, vacuum};

    #[test]
    fn displaced_vacuum_has_energy_one_over_kappa() {
        let c_in = FockCutoff::single(2).unwrap();
        let c_out = FockCutoff::single(30).unwrap();
        let n = random_displacement(4.0, c_in, c_out).unwrap();
        let out = n.apply(&vacuum(c_in)).unwrap();
        assert!((mean_energy(&out) - 0.25).abs() < 1e-10);
        assert!((out.trace() - 1.0).abs() < 1e-10);
        assert!(n.quadrature_error() < 1e-12);
    }

    #[test]
    fn measure_reprepare_preserves_trace() {
        let c_in = FockCutoff::single(5).unwrap();
        let c_out = FockCutoff::single(80).unwrap();
        let m = measure_reprepare(2.0, c_in, c_out).unwrap();
        let out = m.apply(&vacuum(c_in)).unwrap();
        assert!((out.trace() - 1.0).abs() < 1e-8);
        assert!(m.quadrature_error() < 1e-12);
        // M_κ(|0⟩⟨0|) = ∫ e^{−|z|²}|√κz⟩⟨√κz| d²z/π: thermal with mean energy κ
        assert!((mean_energy(&out) - 2.0).abs() < 1e-8);
    }
}
