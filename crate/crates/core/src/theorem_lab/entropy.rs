use super::{describe, entropy_charge, SLACK};
use crate::channels::amplifier;
use crate::convex::ConvexFn;
use crate::error::{Error, Result};
use crate::fock::{bound_f, g, g_inv, von_neumann_entropy, DensityOperator};
use crate::phase_space::{estimate_functionals, IntegrationOptions};
use crate::report::VerificationReport;

/// `|margin|` at or below which an entropy bound counts as saturated.
pub const SATURATION_LEVEL: f64 = 1e-4;

/// `W(ρ) ≥ M·f(S(ρ)/M)` with `f(x) = ln(g⁻¹(x) + 1) + 1`.
///
/// The truncation charge is applied to both sides: `f′ ≤ 1`, and the
/// Wehrl entropy moves by no more than the entropy of the dropped mass.
pub fn check_entropy_bound(
    rho: &DensityOperator,
    opts: &IntegrationOptions,
) -> Result<VerificationReport> {
    let m = rho.modes() as f64;
    let s = von_neumann_entropy(rho)?;
    let bound = m * bound_f(s / m)?;
    let w = estimate_functionals(rho, &[ConvexFn::XLogX], opts)?[0].negate();
    let charge = 2.0 * entropy_charge(rho.tail_bound(), rho.cutoff().total_dim());
    let r =
        VerificationReport::lower_bound("entropy_bound", w.value, bound, w.error + charge + SLACK)
            .input("state", describe(rho))
            .detail("von_neumann_entropy", s)
            .detail("wehrl_error", w.error)
            .detail("truncation_charge", charge);
    let saturated = r.margin.abs() <= SATURATION_LEVEL;
    Ok(r.flag("saturated", saturated))
}

/// `S(A_κ(ρ)) ≥ g(κ·g⁻¹(S(ρ)) + κ − 1)` for one mode.
pub fn check_epni(rho: &DensityOperator, kappa: f64) -> Result<VerificationReport> {
    if rho.modes() != 1 {
        return Err(Error::domain(
            "the entropy-photon-number inequality is checked for one mode",
        ));
    }
    let s_in = von_neumann_entropy(rho)?;
    let out = amplifier(kappa, rho.cutoff())?.apply(rho)?;
    let s_out = von_neumann_entropy(&out)?;
    let rhs = g(kappa * g_inv(s_in)? + kappa - 1.0)?;
    let lost = (out.tail_bound() - rho.tail_bound()).max(0.0);
    // d rhs / dS ≤ κ, so input truncation costs at most κ times its entropy
    let charge = kappa * entropy_charge(rho.tail_bound(), rho.cutoff().dim())
        + entropy_charge(out.tail_bound(), out.cutoff().dim());
    Ok(
        VerificationReport::lower_bound("epni", s_out, rhs, charge + SLACK)
            .input("kappa", kappa)
            .input("state", describe(rho))
            .detail("input_entropy", s_in)
            .detail("lost_trace", lost)
            .detail("truncation_charge", charge),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fock_state, thermal_state, vacuum, FockCutoff};

    #[test]
    fn thermal_states_saturate() {
        for z in [0.0, 0.3, 0.6, 0.9] {
            let c = FockCutoff::for_thermal(z, 1e-14).unwrap();
            let r = check_entropy_bound(
                &thermal_state(z, c).unwrap(),
                &IntegrationOptions::default(),
            )
            .unwrap();
            assert!(r.pass && r.flags["saturated"], "z = {z}: {}", r.margin);
        }
    }

    #[test]
    fn fock_one_is_strictly_above() {
        let r = check_entropy_bound(
            &fock_state(1, FockCutoff::single(2).unwrap()).unwrap(),
            &IntegrationOptions::default(),
        )
        .unwrap();
        assert!((r.rhs - 1.0).abs() < 1e-12);
        assert!((r.lhs - (1.0 + 0.5772156649015329)).abs() < 1e-8);
        assert!(!r.flags["saturated"]);
    }

    #[test]
    fn vacuum_at_gain_two() {
        let r = check_epni(&vacuum(FockCutoff::single(2).unwrap()), 2.0).unwrap();
        let two_ln2 = 2.0 * std::f64::consts::LN_2;
        assert!((r.rhs - two_ln2).abs() < 1e-12);
        assert!((r.lhs - two_ln2).abs() < 1e-9);
        assert!(r.pass);
    }
}
