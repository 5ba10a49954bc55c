use std::f64::consts::TAU;

use rayon::prelude::*;

use super::functional::estimate_functionals;
use super::scheme::radial_breaks;
use super::{IntegrationOptions, QuadratureScheme};
use crate::convex::ConvexFn;
use crate::error::{Error, Result};
use crate::fock::{BoundedOperator, FockCutoff};
use crate::linalg;
use crate::quadrature::{composite_legendre, Rule};
use crate::report::VerificationReport;
use crate::special::{poisson_pmf_table, poisson_upper_tail};
use crate::{CMatrix, C64};

/// Slack added to every Berezin–Lieb budget on top of the error estimates.
const SLACK: f64 = 1e-9;

/// `∫ f(⟨z|A|z⟩) d^{2M}z/π^M ≤ Tr f(A)` for `0 ≤ A ≤ I`.
pub fn berezin_lieb_lower_check(
    a: &BoundedOperator,
    f: ConvexFn,
    opts: &IntegrationOptions,
) -> Result<VerificationReport> {
    let lhs = estimate_functionals(a, &[f], opts)?[0];
    let rhs = linalg::trace_fn(a.matrix(), f);
    let mut r =
        VerificationReport::upper_bound("berezin_lieb_lower", lhs.value, rhs, lhs.error + SLACK)
            .input("f", f.name())
            .input("dim", a.cutoff().dim())
            .input("modes", a.cutoff().modes())
            .detail("quadrature_error", lhs.error);
    if !f.is_c1() {
        r = r.note("f is not C¹ at 0; the inequality itself only needs convexity");
    }
    Ok(r)
}

/// Resolution for building `∫ φ(z)|z⟩⟨z| d²z/π`: composite Gauss–Legendre
/// in `t = |z|²` times an equispaced angular grid, at a fine and a coarse
/// level whose disagreement is the error estimate.
#[derive(Debug, Clone)]
pub struct UpperCheckGrid {
    fine: (Rule, usize),
    coarse: (Rule, usize),
}

impl UpperCheckGrid {
    /// Grids on `|z|² ≤ t_max`.
    pub fn new(t_max: f64) -> Result<Self> {
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::domain(format!(
                "grid extent {t_max} must be positive"
            )));
        }
        Ok(Self {
            fine: (composite_legendre(&radial_breaks(t_max, 1.0), 20), 160),
            coarse: (composite_legendre(&radial_breaks(t_max, 1.5), 12), 112),
        })
    }

    /// The fine level as an explicit node list.
    pub fn fine_scheme(&self) -> Result<QuadratureScheme> {
        QuadratureScheme::radial_from_rule(&self.fine.0, self.fine.1)
    }
}

/// Per-level result: the compressed operator, the dropped weight and
/// `∫ f(φ)` on the same nodes.
struct Smoothed {
    op: CMatrix,
    dropped: f64,
    integral: f64,
}

/// `Φ_{m,m+k} = ∫ dt a_m(t) a_{m+k}(t) φ̂_k(t)`, where `φ̂_k(t)` is the k-th
/// angular Fourier coefficient of φ on the circle `|z|² = t`.
fn smooth_on<F>(phi: &F, f: ConvexFn, dim: usize, rule: &Rule, angular: usize) -> Result<Smoothed>
where
    F: Fn(C64) -> f64 + Sync + ?Sized,
{
    let harmonics = dim.min(angular);
    let phases: Vec<Vec<C64>> = (0..angular)
        .map(|j| {
            let theta = TAU * j as f64 / angular as f64;
            (0..harmonics)
                .map(|k| C64::from_polar(1.0, -(k as f64) * theta))
                .collect()
        })
        .collect();
    let per_node: Vec<Result<(CMatrix, f64, f64)>> = rule
        .nodes
        .par_iter()
        .zip(rule.weights.par_iter())
        .map(|(&t, &w)| {
            let r = t.sqrt();
            let mut coef = vec![C64::new(0.0, 0.0); harmonics];
            let mut f_mean = 0.0;
            for (j, row) in phases.iter().enumerate() {
                let z = C64::from_polar(r, TAU * j as f64 / angular as f64);
                let p = phi(z);
                if !(-1e-12..=1.0 + 1e-12).contains(&p) {
                    return Err(Error::Precondition(format!(
                        "φ({z}) = {p} is outside [0, 1]"
                    )));
                }
                f_mean += f.eval(p.clamp(0.0, 1.0));
                for (c, e) in coef.iter_mut().zip(row) {
                    *c += e * p;
                }
            }
            let scale = w / angular as f64;
            let a: Vec<f64> = poisson_pmf_table(t, dim)
                .into_iter()
                .map(f64::sqrt)
                .collect();
            let mut m = CMatrix::zeros(dim, dim);
            for (k, &ck) in coef.iter().enumerate() {
                let ck = ck * scale;
                for i in 0..dim - k {
                    m[(i, i + k)] += ck * (a[i] * a[i + k]);
                }
            }
            let dropped = coef[0].re * scale * poisson_upper_tail(t, dim);
            Ok((m, dropped, f_mean * scale))
        })
        .collect();
    let mut op = CMatrix::zeros(dim, dim);
    let (mut dropped, mut integral) = (0.0, 0.0);
    for r in per_node {
        let (m, d, i) = r?;
        op += m;
        dropped += d;
        integral += i;
    }
    for j in 0..dim {
        op[(j, j)].im = 0.0;
        for i in j + 1..dim {
            op[(i, j)] = op[(j, i)].conj();
        }
    }
    Ok(Smoothed {
        op,
        dropped,
        integral,
    })
}

/// `P (∫ φ(z)|z⟩⟨z| d²z/π) P` on the first `dim` levels, with the weight of
/// `φ` that the projection drops (`∫ φ ⟨z|(1−P)|z⟩`), at the fine level.
pub fn coherent_smoothing<F>(phi: &F, dim: usize, grid: &UpperCheckGrid) -> Result<(CMatrix, f64)>
where
    F: Fn(C64) -> f64 + Sync + ?Sized,
{
    let s = smooth_on(phi, ConvexFn::Identity, dim, &grid.fine.0, grid.fine.1)?;
    Ok((s.op, s.dropped))
}

/// `Tr f(∫ φ(z)|z⟩⟨z| d²z/π) ≤ ∫ f(φ) d²z/π` for `0 ≤ φ ≤ 1` (single mode).
/// The operator is built on `cutoff`; its trace uses the compression to the
/// cutoff, and the weight dropped by the compression is reported and
/// charged to the budget.
pub fn berezin_lieb_upper_check<F>(
    phi: &F,
    f: ConvexFn,
    cutoff: FockCutoff,
    grid: &UpperCheckGrid,
) -> Result<VerificationReport>
where
    F: Fn(C64) -> f64 + Sync + ?Sized,
{
    if cutoff.modes() != 1 {
        return Err(Error::domain("the upper Berezin–Lieb check is single-mode"));
    }
    let dim = cutoff.dim();
    let fine = smooth_on(phi, f, dim, &grid.fine.0, grid.fine.1)?;
    let coarse = smooth_on(phi, f, dim, &grid.coarse.0, grid.coarse.1)?;
    let lhs = linalg::trace_fn(&fine.op, f);
    let lhs_c = linalg::trace_fn(&coarse.op, f);
    let quad = (lhs - lhs_c).abs() + (fine.integral - coarse.integral).abs();
    let dropped = fine.dropped;
    // moving weight δ between the compression and its complement changes
    // Tr f by at most sup|f'|·δ; x ln x is charged δ(1 + |ln δ|)
    let trunc = match f.derivative_sup() {
        Some(l) => l * dropped,
        None if dropped > 0.0 => dropped * (1.0 + dropped.ln().abs()),
        None => 0.0,
    };
    Ok(VerificationReport::upper_bound(
        "berezin_lieb_upper",
        lhs,
        fine.integral,
        quad + trunc + SLACK,
    )
    .input("f", f.name())
    .input("dim", dim)
    .detail("quadrature_error", quad)
    .detail("dropped_weight", dropped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::thermal_state;

    #[test]
    fn lower_check_on_thermal_square() {
        let c = FockCutoff::for_thermal(0.5, 1e-15).unwrap();
        let w = thermal_state(0.5, c).unwrap();
        let a = BoundedOperator::from_state(&w).unwrap();
        let r =
            berezin_lieb_lower_check(&a, ConvexFn::Square, &IntegrationOptions::default()).unwrap();
        assert!(r.pass);
        assert!((r.lhs - 0.25).abs() < 1e-9);
        assert!((r.rhs - 1.0 / 3.0).abs() < 1e-9);
        let r = berezin_lieb_lower_check(&a, ConvexFn::Identity, &IntegrationOptions::default())
            .unwrap();
        assert!(r.pass && r.margin.abs() < 1e-9);
    }

    #[test]
    fn lower_check_on_projector() {
        let c = FockCutoff::single(6).unwrap();
        let mut m = CMatrix::zeros(6, 6);
        m[(1, 1)] = C64::new(1.0, 0.0);
        m[(3, 3)] = C64::new(1.0, 0.0);
        let a = BoundedOperator::new(c, m).unwrap();
        let r =
            berezin_lieb_lower_check(&a, ConvexFn::Square, &IntegrationOptions::default()).unwrap();
        assert!(r.pass && r.lhs < r.rhs && (r.rhs - 2.0).abs() < 1e-14);
    }

    #[test]
    fn upper_check_on_vacuum_husimi() {
        // ∫ e^{−|z|²}|z⟩⟨z| d²z/π = Σ 2^{−(n+1)}|n⟩⟨n|
        let grid = UpperCheckGrid::new(45.0).unwrap();
        let phi = |z: C64| (-z.norm_sqr()).exp();
        let c = FockCutoff::single(48).unwrap();
        let (op, dropped) = coherent_smoothing(&phi, 48, &grid).unwrap();
        for n in 0..10 {
            assert!((op[(n, n)].re - 0.5f64.powi(n as i32 + 1)).abs() < 1e-12);
        }
        assert!(dropped < 1e-12);
        let r = berezin_lieb_upper_check(&phi, ConvexFn::Square, c, &grid).unwrap();
        assert!(r.pass);
        assert!((r.lhs - 1.0 / 3.0).abs() < 1e-9 && (r.rhs - 0.5).abs() < 1e-9);
        let zero = |_: C64| 0.0;
        let r = berezin_lieb_upper_check(&zero, ConvexFn::XLogX, c, &grid).unwrap();
        assert!(r.pass && r.lhs == 0.0 && r.rhs == 0.0);
    }

    #[test]
    fn fourier_construction_matches_rank_one_sum() {
        let grid = UpperCheckGrid::new(30.0).unwrap();
        let phi = |z: C64| 0.7 * (-(z - C64::new(0.6, -0.3)).norm_sqr() / 0.8).exp();
        let (op, _) = coherent_smoothing(&phi, 20, &grid).unwrap();
        let scheme = grid.fine_scheme().unwrap();
        let mut brute = CMatrix::zeros(20, 20);
        for (z, &w) in scheme.nodes().iter().zip(scheme.weights()) {
            let v = crate::fock::coherent_amplitudes(z.components()[0], 20);
            let p = w * phi(z.components()[0]);
            for i in 0..20 {
                for j in 0..20 {
                    brute[(i, j)] += v[i] * v[j].conj() * p;
                }
            }
        }
        assert!((op - brute).norm() < 1e-12);
    }

    #[test]
    fn upper_check_rejects_out_of_range_phi() {
        let grid = UpperCheckGrid::new(10.0).unwrap();
        let phi = |_: C64| 2.0;
        let c = FockCutoff::single(8).unwrap();
        assert!(matches!(
            berezin_lieb_upper_check(&phi, ConvexFn::Square, c, &grid),
            Err(Error::Precondition(_))
        ));
    }
}
