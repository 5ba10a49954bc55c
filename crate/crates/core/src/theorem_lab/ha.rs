use super::{describe, truncation_charge, SLACK};
use crate::channels::{amplifier, amplifier_output_dim};
use crate::convex::ConvexFn;
use crate::error::{Error, Result};
use crate::fock::DensityOperator;
use crate::linalg;
use crate::phase_space::{estimate_functionals, IntegrationOptions};
use crate::report::VerificationReport;
use crate::C64;

/// Largest amplifier output (total dimension) the check will diagonalise.
const MAX_OUTPUT_DIM: usize = 4096;

/// Mass above the output cutoff beyond which the series is not trusted.
const MAX_LOST: f64 = 1e-6;

/// `Tr f(κ^M A_κ^{⊗M}(ρ))/κ^M` and the trace the amplifier pushed above its
/// output cutoff.
pub fn ha_value(rho: &DensityOperator, f: ConvexFn, kappa: f64) -> Result<(f64, f64)> {
    let c = rho.cutoff();
    let out_dim = amplifier_output_dim(kappa.max(1.0), c.dim());
    if out_dim
        .checked_pow(c.modes() as u32)
        .is_none_or(|n| n > MAX_OUTPUT_DIM)
    {
        return Err(Error::Truncation(format!(
            "κ = {kappa} needs {out_dim} output levels per mode, over the {MAX_OUTPUT_DIM}-dimensional limit"
        )));
    }
    let ch = amplifier(kappa, c)?;
    let out = ch.apply(rho)?;
    let lost = (out.tail_bound() - rho.tail_bound()).max(0.0);
    if lost > MAX_LOST {
        return Err(Error::Truncation(format!(
            "amplifier output cutoff loses {lost:.3e} of the trace at κ = {kappa}"
        )));
    }
    let scale = kappa.powi(c.modes() as i32);
    let scaled = out.matrix() * C64::new(scale, 0.0);
    Ok((linalg::trace_fn(&scaled, f) / scale, lost))
}

/// Finite-κ approach of `Tr f(κ^M A_κ(ρ))/κ^M` to `∫ f(Q)`.
///
/// Every point must lie above the target (Berezin–Lieb on `κ^M A_κ(ρ)`,
/// valid for any convex `f`) and the distance to the target must not grow
/// along the grid. The margin is the smallest of these slacks.
pub fn check_ha_limit(
    rho: &DensityOperator,
    f: ConvexFn,
    kappas: &[f64],
    opts: &IntegrationOptions,
) -> Result<VerificationReport> {
    if kappas.is_empty() {
        return Err(Error::domain("empty κ grid"));
    }
    if kappas.iter().any(|&k| !(k >= 1.0) || !k.is_finite()) {
        return Err(Error::domain("κ values must be finite and ≥ 1"));
    }
    if kappas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("κ grid must be increasing"));
    }
    let target = estimate_functionals(rho, &[f], opts)?[0];
    let mut series = Vec::with_capacity(kappas.len());
    let mut charge: f64 = 0.0;
    for &k in kappas {
        let (v, lost) = ha_value(rho, f, k)?;
        charge = charge.max(truncation_charge(f, lost));
        series.push((k, v));
    }
    let dist: Vec<f64> = series.iter().map(|&(_, v)| v - target.value).collect();
    let above = dist.iter().copied().fold(f64::INFINITY, f64::min);
    let shrink = dist
        .windows(2)
        .map(|w| w[0].abs() - w[1].abs())
        .fold(f64::INFINITY, f64::min);
    let monotone = dist.windows(2).all(|w| w[1].abs() <= w[0].abs());
    let last = series.last().unwrap().1;
    let mut r = VerificationReport::with_margin(
        "ha_limit",
        last,
        target.value,
        above.min(shrink),
        target.error + 2.0 * charge + SLACK,
    )
    .input("f", f.name())
    .input("kappas", kappas)
    .input("state", describe(rho))
    .series(series)
    .detail("target_error", target.error)
    .detail("truncation_charge", charge)
    .detail("min_distance_above_target", above)
    .detail(
        "min_distance_decrease",
        if kappas.len() > 1 { shrink } else { 0.0 },
    )
    .flag("monotone", monotone)
    .flag("above_target", above >= 0.0);
    if kappas.len() == 1 {
        r.set_margin(above);
    }
    if !f.is_c1() {
        r = r.note("f is not C¹: only the lower half of the limit is theorem-backed; the trend is reported as observed");
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{vacuum, FockCutoff};

    #[test]
    fn vacuum_square_matches_closed_form() {
        let rho = vacuum(FockCutoff::single(2).unwrap());
        for k in [1.0, 2.0, 8.0] {
            let (v, _) = ha_value(&rho, ConvexFn::Square, k).unwrap();
            assert!((v - 1.0 / (2.0 - 1.0 / k)).abs() < 1e-12);
        }
        let r = check_ha_limit(
            &rho,
            ConvexFn::Square,
            &[2.0, 4.0, 8.0],
            &IntegrationOptions::default(),
        )
        .unwrap();
        assert!(r.pass && r.flags["monotone"]);
        assert!((r.rhs - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bad_grids_are_rejected() {
        let rho = vacuum(FockCutoff::single(2).unwrap());
        let o = IntegrationOptions::default();
        assert!(check_ha_limit(&rho, ConvexFn::Square, &[], &o).is_err());
        assert!(check_ha_limit(&rho, ConvexFn::Square, &[4.0, 2.0], &o).is_err());
        assert!(check_ha_limit(&rho, ConvexFn::Square, &[0.5], &o).is_err());
    }
}
