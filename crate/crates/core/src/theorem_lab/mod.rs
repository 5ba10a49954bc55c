//! Executable checks of the inequalities and identities, each producing a
//! [`VerificationReport`](crate::report::VerificationReport).
//!
//! Inequality budgets are additive: truncation charge + quadrature error
//! estimate + [`SLACK`]. Identity checks between two constructions (channel
//! identities) use their stated tolerance as the budget. Checks that test
//! an unproven case of the p→q conjecture are tagged as conjecture
//! evidence and never count as failures.

mod channel_checks;
mod entropy;
mod ha;
mod lemmas;
mod majorization;
mod pq;
mod suite;

pub use channel_checks::{
    check_amplifier_coherent_dual, check_amplifier_thermal, check_attenuator_coherent,
    check_attenuator_semigroup, check_displacement_trend, check_duality, check_factorization,
    check_operator_bound, check_trace_preservation,
};
pub use entropy::{check_entropy_bound, check_epni, SATURATION_LEVEL};
pub use ha::{check_ha_limit, ha_value};
pub use lemmas::{
    check_bound_f_shape, check_g_shape, check_klein, check_lemma_q, lemma_q_endpoint, lemma_q_grid,
};
pub use majorization::{check_majorization, CHANNEL_KAPPAS};
pub use pq::{check_pq_bound, pq_supremum, PqSupremum};
pub use suite::{run_suite, Suite, SuiteConfig};

use crate::convex::ConvexFn;
use crate::fock::DensityOperator;

/// Slack added to every inequality budget.
pub const SLACK: f64 = 1e-9;

/// Change of `Tr f(X)` (or `∫ f(Q)`) when trace `δ` is added or removed:
/// `sup|f′|·δ` for C¹ functions, `δ(1 + |ln δ|)` for `x ln x`.
pub fn truncation_charge(f: ConvexFn, delta: f64) -> f64 {
    if delta <= 0.0 {
        return 0.0;
    }
    match f.derivative_sup() {
        Some(l) => l * delta,
        None => delta * (1.0 + delta.ln().abs()),
    }
}

/// Entropy change when trace `δ` spread over at most `levels` levels is
/// added or removed.
pub fn entropy_charge(delta: f64, levels: usize) -> f64 {
    if delta <= 0.0 {
        return 0.0;
    }
    delta * (1.0 + delta.ln().abs() + (levels.max(1) as f64).ln())
}

/// Short label for a state in report inputs.
pub(crate) fn describe(rho: &DensityOperator) -> serde_json::Value {
    serde_json::json!({
        "modes": rho.modes(),
        "dim": rho.cutoff().dim(),
        "diagonal": rho.is_diagonal(),
        "tail_bound": rho.tail_bound(),
    })
}
