use serde::{Deserialize, Serialize};

use super::{describe, SLACK};
use crate::error::{Error, Result};
use crate::fock::{schatten_norm_of, DensityOperator};
use crate::optimizer::{golden_section_sup, thermal_norm_ratio};
use crate::phase_space::{estimate_functionals, power_fn, q_root, IntegrationOptions};
use crate::report::VerificationReport;

/// Points of the coarse `z` grid on `[0, 0.999]`.
const GRID_POINTS: usize = 1000;
const GRID_END: f64 = 0.999;

/// Supremum over `z ∈ [0, 1)` of the single-mode thermal ratio
/// `(1−z^p)^{1/p} / (q^{1/q}(1−z)^{1/q})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PqSupremum {
    /// The supremum: the refined grid maximum, or the limit at `z → 1`
    /// when that is larger (`p = q`: 1; `p > q`: ∞).
    pub value: f64,
    pub argmax: f64,
    /// Largest value attained at a finite `z` (grid plus refinement).
    pub grid_value: f64,
    pub divergent: bool,
    /// Limit of the ratio as `z → 1`, when finite and nonzero.
    pub limit_at_one: Option<f64>,
}

pub fn pq_supremum(p: f64, q: f64) -> Result<PqSupremum> {
    if !(p >= 1.0 && q >= 1.0) || !p.is_finite() || !q.is_finite() {
        return Err(Error::domain(format!(
            "need finite p, q ≥ 1, got p = {p}, q = {q}"
        )));
    }
    let h = |z: f64| thermal_norm_ratio(z, p, q);
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| GRID_END * i as f64 / (GRID_POINTS - 1) as f64)
        .collect();
    let (imax, _) = grid
        .iter()
        .enumerate()
        .map(|(i, &z)| (i, h(z)))
        .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
    let lo = grid[imax.saturating_sub(1)];
    let hi = grid[(imax + 1).min(GRID_POINTS - 1)];
    let (argmax, grid_value) = golden_section_sup(h, lo, hi, 1e-12)?;
    let limit_at_one = if p == q { Some(1.0) } else { None };
    let divergent = p > q;
    let value = if divergent {
        f64::INFINITY
    } else {
        limit_at_one.map_or(grid_value, |l| grid_value.max(l))
    };
    Ok(PqSupremum {
        value,
        argmax: if value > grid_value { 1.0 } else { argmax },
        grid_value,
        divergent,
        limit_at_one,
    })
}

/// `‖Q(ρ)‖_q / ‖ρ‖_p ≤ sup^M`. The ratio is scale invariant and the bound
/// holds for every positive trace-class operator, so the compressed state is
/// tested as is, without a truncation charge. Two-mode checks with
/// `p ∉ {1, q}` are conjecture evidence.
pub fn check_pq_bound(
    rho: &DensityOperator,
    p: f64,
    q: f64,
    opts: &IntegrationOptions,
) -> Result<VerificationReport> {
    let sup = pq_supremum(p, q)?;
    let m = rho.modes();
    let i = estimate_functionals(rho, &[power_fn(q)], opts)?[0];
    let qn = q_root(i, q);
    let pn = schatten_norm_of(&rho.eigenvalues(), p)?;
    if pn <= 0.0 {
        return Err(Error::domain("zero operator has no norm ratio"));
    }
    let lhs = qn.value / pn;
    let rhs = sup.value.powi(m as i32);
    let mut r = VerificationReport::upper_bound("pq_bound", lhs, rhs, qn.error / pn + SLACK)
        .input("p", p)
        .input("q", q)
        .input("state", describe(rho))
        .detail("husimi_q_norm", qn.value)
        .detail("schatten_p_norm", pn)
        .detail("sup_argmax_z", sup.argmax)
        .detail("sup_grid_value", sup.grid_value)
        .flag("divergent", sup.divergent);
    if sup.divergent {
        r = r.note("p > q: the thermal ratio grows without bound as z → 1; the norm is infinite");
    }
    if m >= 2 && p != 1.0 && p != q {
        r = r.conjecture_evidence();
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{thermal_state, FockCutoff};

    #[test]
    fn p_one_is_attained_at_vacuum() {
        for q in [1.0, 2.0, 3.0] {
            let s = pq_supremum(1.0, q).unwrap();
            if q > 1.0 {
                assert_eq!(s.argmax, 0.0);
            }
            assert!((s.value - q.powf(-1.0 / q)).abs() < 1e-15);
        }
    }

    #[test]
    fn p_equal_q_approaches_one_from_below() {
        let s = pq_supremum(2.0, 2.0).unwrap();
        assert_eq!(s.value, 1.0);
        assert!(s.grid_value < 1.0 && s.grid_value > 0.99);
    }

    #[test]
    fn p_above_q_diverges() {
        let s = pq_supremum(2.0, 1.0).unwrap();
        assert!(s.divergent && s.value.is_infinite());
    }

    #[test]
    fn interior_maximum_matches_fine_scan() {
        let s = pq_supremum(1.5, 2.0).unwrap();
        let scan = (0..=1_000_000)
            .map(|i| thermal_norm_ratio(0.999 * i as f64 / 1e6, 1.5, 2.0))
            .fold(0.0, f64::max);
        assert!(s.argmax > 0.0 && s.argmax < 0.999);
        assert!((s.value - scan).abs() < 1e-9);
    }

    #[test]
    fn thermal_half_at_p_equal_q_two() {
        let rho = thermal_state(0.5, FockCutoff::for_thermal(0.5, 1e-15).unwrap()).unwrap();
        let r = check_pq_bound(&rho, 2.0, 2.0, &IntegrationOptions::default()).unwrap();
        assert!((r.lhs - 0.5 / (1.0f64 / 3.0).sqrt()).abs() < 1e-6);
        assert!(r.pass);
    }
}
