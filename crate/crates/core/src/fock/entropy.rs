//! Spectral entropies, Schatten norms and the thermal entropy function `g`.

use super::DensityOperator;
use crate::error::{Error, Result};

/// Eigenvalues below this are a genuine failure of positivity, not noise.
const NOT_A_STATE_TOL: f64 = 1e-9;

pub(crate) fn clamp_eigenvalues(vals: &[f64]) -> Result<Vec<f64>> {
    vals.iter()
        .map(|&x| {
            if x < -NOT_A_STATE_TOL {
                Err(Error::NotAState(format!("eigenvalue {x:.3e} < −1e−9")))
            } else {
                Ok(x.max(0.0))
            }
        })
        .collect()
}

/// Entropy of the thermal state with mean photon number `e`:
/// `g(E) = (E+1) ln(E+1) − E ln E`, `g(0) = 0`.
pub fn g(e: f64) -> Result<f64> {
    if !(e >= 0.0) {
        return Err(Error::domain(format!("g needs E ≥ 0, got {e}")));
    }
    Ok(g_unchecked(e))
}

#[inline]
fn g_unchecked(e: f64) -> f64 {
    if e == 0.0 {
        0.0
    } else {
        (e + 1.0) * e.ln_1p() - e * e.ln()
    }
}

/// `g'(E) = ln(1 + 1/E)`.
#[inline]
fn g_prime(e: f64) -> f64 {
    (1.0 / e).ln_1p()
}

/// Inverse of `g` on `[0, ∞)`: bracketed bisection on `[0, e^S]` followed by
/// Newton polish.
pub fn g_inv(s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::domain(format!("g⁻¹ needs S ≥ 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    // g(E) ≥ ln(E + 1), so g(e^S) > S.
    let mut lo = 0.0_f64;
    let mut hi = s.exp();
    if !hi.is_finite() {
        return Err(Error::domain(format!("g⁻¹({s}) overflows")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g_unchecked(mid) < s {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    let mut e = 0.5 * (lo + hi);
    for _ in 0..4 {
        if e <= 0.0 {
            break;
        }
        let step = (g_unchecked(e) - s) / g_prime(e);
        let next = e - step;
        if !(next > 0.0) {
            break;
        }
        e = next;
        if step.abs() <= 1e-16 * e {
            break;
        }
    }
    Ok(e)
}

/// Minimum single-mode Wehrl entropy at von Neumann entropy `x`:
/// `ln(g⁻¹(x) + 1) + 1`.
pub fn bound_f(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("bound needs x ≥ 0, got {x}")));
    }
    Ok(g_inv(x)?.ln_1p() + 1.0)
}

/// `−Σ p ln p` with `0 ln 0 = 0`.
pub fn entropy_of_probs(probs: &[f64]) -> f64 {
    -probs.iter().map(|&p| crate::convex::xlogx(p)).sum::<f64>()
}

/// `−Σ λ ln λ` from a list of eigenvalues, clamping noise in `[−1e−9, 0)`.
/// Rounding can push a pure state's entropy just below zero; it is clamped.
pub fn von_neumann_entropy_of(eigenvalues: &[f64]) -> Result<f64> {
    Ok(entropy_of_probs(&clamp_eigenvalues(eigenvalues)?).max(0.0))
}

/// `S(ρ) = −Tr ρ ln ρ`.
pub fn von_neumann_entropy(rho: &DensityOperator) -> Result<f64> {
    von_neumann_entropy_of(&rho.eigenvalues())
}

/// `(Σ λ^p)^{1/p}` from eigenvalues.
pub fn schatten_norm_of(eigenvalues: &[f64], p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::domain(format!("Schatten norm needs p ≥ 1, got {p}")));
    }
    let vals = clamp_eigenvalues(eigenvalues)?;
    if p.is_infinite() {
        return Ok(vals.iter().copied().fold(0.0, f64::max));
    }
    // factor out the largest eigenvalue so large p does not underflow
    let top = vals.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0.0);
    }
    let s: f64 = vals.iter().map(|&x| (x / top).powf(p)).sum();
    Ok(top * s.powf(1.0 / p))
}

/// Schatten `p`-norm of a state.
pub fn schatten_norm(rho: &DensityOperator, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::domain(format!("Schatten norm needs p ≥ 1, got {p}")));
    }
    schatten_norm_of(&rho.eigenvalues(), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn g_values() {
        assert_eq!(g(0.0).unwrap(), 0.0);
        assert!((g(1.0).unwrap() - 2.0 * LN_2).abs() < 1e-15);
        // g(x) = ln x + 1 + O(1/x)
        let x = 10.0;
        let err = g(x).unwrap() - (x.ln() + 1.0);
        assert!(err > 0.0 && err < 1.0 / x);
        assert!(g(-1e-3).is_err());
    }

    #[test]
    fn g_inv_round_trips() {
        assert_eq!(g_inv(0.0).unwrap(), 0.0);
        assert!((g_inv(2.0 * LN_2).unwrap() - 1.0).abs() < 1e-12);
        assert!((g_inv(g(5.0).unwrap()).unwrap() - 5.0).abs() < 1e-10);
        for &e in &[1e-8, 1e-3, 0.3, 2.0, 40.0, 1e4] {
            let back = g_inv(g(e).unwrap()).unwrap();
            assert!(((back - e) / e).abs() < 1e-10, "E={e} back={back}");
        }
        assert!(g_inv(-0.1).is_err());
    }

    #[test]
    fn bound_f_values() {
        assert!((bound_f(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((bound_f(2.0 * LN_2).unwrap() - (LN_2 + 1.0)).abs() < 1e-12);
        assert!(bound_f(-1.0).is_err());
    }

    #[test]
    fn schatten_domain_and_values() {
        assert!(schatten_norm_of(&[1.0], 0.5).is_err());
        let v = [0.5, 0.25, 0.25];
        assert!((schatten_norm_of(&v, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let two = (0.25f64 + 0.0625 + 0.0625).sqrt();
        assert!((schatten_norm_of(&v, 2.0).unwrap() - two).abs() < 1e-15);
        assert!(von_neumann_entropy_of(&[1.0, -1e-6]).is_err());
        assert_eq!(von_neumann_entropy_of(&[1.0, -1e-13]).unwrap(), 0.0);
    }
}
