use super::{describe, truncation_charge, SLACK};
use crate::channels::amplifier;
use crate::convex::ConvexFn;
use crate::error::{Error, Result};
use crate::fock::{passive_rearrangement, DensityOperator};
use crate::linalg;
use crate::phase_space::{estimate_functionals, IntegrationOptions};
use crate::report::VerificationReport;
use crate::C64;

/// Gains of the channel-level comparison.
pub const CHANNEL_KAPPAS: [f64; 2] = [2.0, 8.0];

/// `∫ f(Q(ρ)) ≤ ∫ f(Q(ρ↓))` for each `f`, then the channel-level
/// `Tr f(κA_κ(ρ)) ≤ Tr f(κA_κ(ρ↓))` at κ ∈ [`CHANNEL_KAPPAS`]. One report
/// per (f) and per (f, κ).
pub fn check_majorization(
    rho: &DensityOperator,
    fs: &[ConvexFn],
    opts: &IntegrationOptions,
) -> Result<Vec<VerificationReport>> {
    if rho.modes() != 1 {
        return Err(Error::domain("majorization is checked for one mode"));
    }
    let down = passive_rearrangement(rho)?;
    let passive = (rho.matrix() - down.matrix()).norm() <= 1e-14;
    let q = estimate_functionals(rho, fs, opts)?;
    let q_down = estimate_functionals(&down, fs, opts)?;
    let mut out = Vec::new();
    for ((&f, a), b) in fs.iter().zip(&q).zip(&q_down) {
        out.push(
            VerificationReport::upper_bound(
                "majorization",
                a.value,
                b.value,
                a.error + b.error + SLACK,
            )
            .input("f", f.name())
            .input("state", describe(rho))
            .detail("quadrature_error", a.error + b.error)
            .flag("passive", passive),
        );
    }
    for k in CHANNEL_KAPPAS {
        let ch = amplifier(k, rho.cutoff())?;
        let a = ch.apply(rho)?;
        let b = ch.apply(&down)?;
        let lost = (a.tail_bound() - rho.tail_bound()).max(0.0)
            + (b.tail_bound() - down.tail_bound()).max(0.0);
        let sa = a.matrix() * C64::new(k, 0.0);
        let sb = b.matrix() * C64::new(k, 0.0);
        for &f in fs {
            let lhs = linalg::trace_fn(&sa, f);
            let rhs = linalg::trace_fn(&sb, f);
            out.push(
                VerificationReport::upper_bound(
                    "majorization_channel",
                    lhs,
                    rhs,
                    truncation_charge(f, k * lost) + SLACK,
                )
                .input("f", f.name())
                .input("kappa", k)
                .input("state", describe(rho))
                .detail("lost_trace", lost)
                .flag("passive", passive),
            );
        }
    }
    Ok(out)
}
