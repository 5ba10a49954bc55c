//! Adaptive integration of `∫ f(⟨z|A|z⟩) d^{2M}z/π^M`.
//!
//! Single mode: with `z = √t e^{iθ}` the Husimi function is a trigonometric
//! polynomial in θ whose coefficients are
//! `C_k(t) = Σ_m A_{m,m+k} a_m(t) a_{m+k}(t)`, `a_n(t)² = e^{−t}tⁿ/n!`.
//! The angular mean of `f(Q)` uses the trapezoid rule on a nested grid
//! (doubling until two levels agree); the radial integral uses composite
//! Gauss–Legendre panels of orders 12 and 24, splitting panels whose two
//! estimates disagree. Fock-diagonal operators skip the angular step.
//!
//! Two modes: a tensor product of the single-mode construction at two
//! resolutions, with the error estimated from their difference.

use rayon::prelude::*;

use super::scheme::{radial_breaks, radial_extent};
use crate::convex::ConvexFn;
use crate::error::{Error, Result};
use crate::fock::{coherent_amplitudes, FockOperator};
use crate::linalg;
use crate::quadrature::{composite_legendre, gauss_legendre, Rule};
use crate::special::{poisson_cdf_table, poisson_pmf_table};
use crate::{CMatrix, C64};

/// A quadrature value and its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

impl Integral {
    pub fn negate(self) -> Self {
        Self {
            value: -self.value,
            error: self.error,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationOptions {
    /// Requested absolute accuracy.
    pub tol: f64,
    /// Husimi mass (relative to the trace) allowed outside the radial extent.
    pub tail_mass: f64,
    /// Cap on the angular grid.
    pub max_angular: usize,
    /// Cap on panel-splitting rounds.
    pub max_refinements: usize,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            tail_mass: 1e-16,
            max_angular: 4096,
            max_refinements: 10,
        }
    }
}

impl IntegrationOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// `∫ f(⟨z|A|z⟩) d^{2M}z/π^M`; fails with an accuracy error when the error
/// estimate exceeds `opts.tol`.
pub fn convex_functional<O: FockOperator + ?Sized + Sync>(
    op: &O,
    f: ConvexFn,
    opts: &IntegrationOptions,
) -> Result<Integral> {
    Ok(convex_functionals(op, &[f], opts)?[0])
}

/// Several functionals over one set of Husimi evaluations.
pub fn convex_functionals<O: FockOperator + ?Sized + Sync>(
    op: &O,
    fs: &[ConvexFn],
    opts: &IntegrationOptions,
) -> Result<Vec<Integral>> {
    let out = estimate_functionals(op, fs, opts)?;
    if let Some(worst) = out.iter().map(|i| i.error).reduce(f64::max) {
        if worst > opts.tol {
            return Err(Error::Accuracy(format!(
                "phase-space quadrature error estimate {worst:.3e} exceeds tolerance {:.3e}",
                opts.tol
            )));
        }
    }
    Ok(out)
}

/// As [`convex_functionals`], but returns the estimate whatever its error;
/// callers fold `error` into a tolerance budget.
pub fn estimate_functionals<O: FockOperator + ?Sized + Sync>(
    op: &O,
    fs: &[ConvexFn],
    opts: &IntegrationOptions,
) -> Result<Vec<Integral>> {
    let cutoff = op.cutoff();
    let m = op.matrix();
    if linalg::hermiticity_defect(m) > 1e-10 {
        return Err(Error::Precondition(
            "Husimi functionals need a Hermitian operator".into(),
        ));
    }
    match cutoff.modes() {
        1 => Ok(single_mode(m, fs, opts)),
        2 => Ok(two_mode(m, cutoff.dim(), fs, opts)),
        k => Err(Error::domain(format!(
            "phase-space integration is implemented for 1 or 2 modes, not {k}"
        ))),
    }
}

/// Wehrl entropy `−∫ Q ln Q d^{2M}z/π^M`.
pub fn wehrl_entropy<O: FockOperator + ?Sized + Sync>(op: &O) -> Result<Integral> {
    wehrl_entropy_with(op, &IntegrationOptions::default())
}

pub fn wehrl_entropy_with<O: FockOperator + ?Sized + Sync>(
    op: &O,
    opts: &IntegrationOptions,
) -> Result<Integral> {
    Ok(convex_functional(op, ConvexFn::XLogX, opts)?.negate())
}

/// The power function matching `q`, using the integer fast paths.
pub fn power_fn(q: f64) -> ConvexFn {
    if q == 1.0 {
        ConvexFn::Identity
    } else if q == 2.0 {
        ConvexFn::Square
    } else if q == 3.0 {
        ConvexFn::Cube
    } else {
        ConvexFn::Power(q)
    }
}

/// `‖Q‖_q = (∫ Q^q d^{2M}z/π^M)^{1/q}`.
pub fn husimi_q_norm<O: FockOperator + ?Sized + Sync>(op: &O, q: f64) -> Result<Integral> {
    husimi_q_norm_with(op, q, &IntegrationOptions::default())
}

pub fn husimi_q_norm_with<O: FockOperator + ?Sized + Sync>(
    op: &O,
    q: f64,
    opts: &IntegrationOptions,
) -> Result<Integral> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::domain(format!(
            "Husimi norm exponent q = {q} must be ≥ 1"
        )));
    }
    let i = convex_functional(op, power_fn(q), opts)?;
    Ok(q_root(i, q))
}

pub(crate) fn q_root(i: Integral, q: f64) -> Integral {
    let value = i.value.max(0.0).powf(1.0 / q);
    let error = if i.value > 0.0 {
        value * i.error / (q * i.value)
    } else {
        i.error.powf(1.0 / q)
    };
    Integral { value, error }
}

/// Crude bound for `|∫_{|z|²>T} f(Q)|` given the Husimi mass out there.
fn tail_error(f: ConvexFn, mass: f64, t_max: f64) -> f64 {
    match f {
        // convex with f(0) = 0 and f(1) = 1 ⇒ 0 ≤ f(x) ≤ x on [0, 1]
        ConvexFn::XLogX => mass * (2.0 * t_max + 50.0),
        _ => mass,
    }
}

struct PanelResult {
    fine: Vec<f64>,
    error: f64,
}

fn unit_rule(order: usize) -> Rule {
    gauss_legendre(order)
}

/// Composite-panel adaptive integration of a vector-valued integrand in
/// `t`; the integrand also returns its own (angular) error estimate.
fn adaptive_radial<G>(
    t_max: f64,
    nf: usize,
    opts: &IntegrationOptions,
    integrand: G,
) -> (Vec<f64>, f64)
where
    G: Fn(f64) -> (Vec<f64>, f64) + Sync,
{
    let coarse = unit_rule(12);
    let fine = unit_rule(24);
    let panel = |a: f64, b: f64| -> PanelResult {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut lo = vec![0.0; nf];
        let mut hi = vec![0.0; nf];
        let mut ang = 0.0;
        for (x, w) in coarse.nodes.iter().zip(&coarse.weights) {
            let (v, e) = integrand(mid + half * x);
            for (acc, vi) in lo.iter_mut().zip(&v) {
                *acc += half * w * vi;
            }
            ang += half * w * e;
        }
        for (x, w) in fine.nodes.iter().zip(&fine.weights) {
            let (v, e) = integrand(mid + half * x);
            for (acc, vi) in hi.iter_mut().zip(&v) {
                *acc += half * w * vi;
            }
            ang += half * w * e;
        }
        let diff = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        PanelResult {
            fine: hi,
            error: diff + 0.5 * ang,
        }
    };

    let breaks = radial_breaks(t_max, 1.0);
    let mut panels: Vec<(f64, f64)> = breaks.windows(2).map(|w| (w[0], w[1])).collect();
    let mut results: Vec<PanelResult> = panels.par_iter().map(|&(a, b)| panel(a, b)).collect();
    for _ in 0..opts.max_refinements {
        let total: f64 = results.iter().map(|r| r.error).sum();
        if total <= 0.25 * opts.tol {
            break;
        }
        let split: Vec<bool> = panels
            .iter()
            .zip(&results)
            .map(|(&(a, b), r)| r.error > 0.25 * opts.tol * (b - a) / t_max && b - a > 1e-6)
            .collect();
        if !split.iter().any(|&s| s) {
            break;
        }
        let mut new_panels = Vec::with_capacity(panels.len() * 2);
        let mut keep: Vec<Option<PanelResult>> = Vec::with_capacity(panels.len() * 2);
        for ((&(a, b), r), s) in panels.iter().zip(results).zip(&split) {
            if *s {
                let m = 0.5 * (a + b);
                new_panels.push((a, m));
                keep.push(None);
                new_panels.push((m, b));
                keep.push(None);
            } else {
                new_panels.push((a, b));
                keep.push(Some(r));
            }
        }
        let fresh: Vec<Option<PanelResult>> = new_panels
            .par_iter()
            .zip(keep.par_iter())
            .map(|(&(a, b), k)| if k.is_none() { Some(panel(a, b)) } else { None })
            .collect();
        results = keep
            .into_iter()
            .zip(fresh)
            .map(|(k, f)| k.or(f).expect("every panel evaluated"))
            .collect();
        panels = new_panels;
    }
    let mut sum = vec![0.0; nf];
    let mut err = 0.0;
    for r in &results {
        for (s, v) in sum.iter_mut().zip(&r.fine) {
            *s += v;
        }
        err += r.error;
    }
    (sum, err)
}

/// Angular means of `f(Q(θ))` for `Q(θ) = C_0 + 2 Re Σ_{k≥1} C_k e^{ikθ}`.
fn angular_means(c: &[C64], fs: &[ConvexFn], max_angular: usize) -> (Vec<f64>, f64) {
    let band = c.len() - 1;
    if band == 0 || c[1..].iter().all(|x| *x == C64::new(0.0, 0.0)) {
        return (fs.iter().map(|f| f.eval(c[0].re)).collect(), 0.0);
    }
    let eval_q = |theta: f64| -> f64 {
        let step = C64::from_polar(1.0, theta);
        let mut e = step;
        let mut s = 0.0;
        for ck in &c[1..] {
            s += (ck * e).re;
            e *= step;
        }
        c[0].re + 2.0 * s
    };
    let mut n = (2 * band + 2).next_power_of_two().max(8);
    let mut sums = vec![0.0; fs.len()];
    for j in 0..n {
        let q = eval_q(std::f64::consts::TAU * j as f64 / n as f64);
        for (s, f) in sums.iter_mut().zip(fs) {
            *s += f.eval(q);
        }
    }
    let mut means: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
    loop {
        let mut extra = vec![0.0; fs.len()];
        for j in 0..n {
            let q = eval_q(std::f64::consts::TAU * (j as f64 + 0.5) / n as f64);
            for (s, f) in extra.iter_mut().zip(fs) {
                *s += f.eval(q);
            }
        }
        for (s, e) in sums.iter_mut().zip(&extra) {
            *s += e;
        }
        n *= 2;
        let refined: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
        let diff = refined
            .iter()
            .zip(&means)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let scale = refined.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        means = refined;
        if diff <= 1e-16 + 1e-13 * scale || n >= max_angular {
            return (means, diff);
        }
    }
}

fn single_mode(m: &CMatrix, fs: &[ConvexFn], opts: &IntegrationOptions) -> Vec<Integral> {
    let dim = m.nrows();
    let diag: Vec<f64> = m.diagonal().iter().map(|d| d.re).collect();
    let trace: f64 = diag.iter().sum();
    if trace <= 0.0 && m.iter().all(|x| x.norm() == 0.0) {
        return fs
            .iter()
            .map(|_| Integral {
                value: 0.0,
                error: 0.0,
            })
            .collect();
    }
    let t_max = radial_extent(&diag, opts.tail_mass * trace.abs().max(1e-300));
    let outside: f64 = poisson_cdf_table(t_max, dim)
        .iter()
        .zip(&diag)
        .map(|(c, d)| c * d.max(0.0))
        .sum();
    let band = linalg::bandwidth(m);
    let nf = fs.len();

    let (values, err) = if band == 0 {
        adaptive_radial(t_max, nf, opts, |t| {
            let pmf = poisson_pmf_table(t, dim);
            let q: f64 = pmf.iter().zip(&diag).map(|(p, d)| p * d).sum();
            (fs.iter().map(|f| f.eval(q)).collect(), 0.0)
        })
    } else {
        // keep only the (m, m+k) entries with k ≤ band
        let rows: Vec<Vec<C64>> = (0..=band)
            .map(|k| (0..dim - k).map(|i| m[(i, i + k)]).collect())
            .collect();
        adaptive_radial(t_max, nf, opts, |t| {
            let amp: Vec<f64> = poisson_pmf_table(t, dim)
                .into_iter()
                .map(f64::sqrt)
                .collect();
            let c: Vec<C64> = rows
                .iter()
                .enumerate()
                .map(|(k, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(i, x)| x * (amp[i] * amp[i + k]))
                        .sum()
                })
                .collect();
            angular_means(&c, fs, opts.max_angular)
        })
    };
    values
        .into_iter()
        .zip(fs)
        .map(|(v, &f)| Integral {
            value: v,
            error: err + tail_error(f, outside, t_max),
        })
        .collect()
}

/// Single-mode nodes `(z, weight)` for the two-mode product rule.
fn mode_nodes(t_max: f64, order: usize, scale: f64, angular: usize) -> Vec<(C64, f64)> {
    let rule = composite_legendre(&radial_breaks(t_max, scale), order);
    let mut out = Vec::with_capacity(rule.len() * angular.max(1));
    for (i, (&t, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        if angular == 0 {
            out.push((C64::new(t.sqrt(), 0.0), w));
            continue;
        }
        let offset = if i % 2 == 1 { 0.5 } else { 0.0 };
        for j in 0..angular {
            let theta = std::f64::consts::TAU * (j as f64 + offset) / angular as f64;
            out.push((C64::from_polar(t.sqrt(), theta), w / angular as f64));
        }
    }
    out
}

fn two_mode(m: &CMatrix, d: usize, fs: &[ConvexFn], opts: &IntegrationOptions) -> Vec<Integral> {
    let n = d * d;
    let mut marg = [vec![0.0; d], vec![0.0; d]];
    for i in 0..n {
        let (a, b) = (i / d, i % d);
        marg[0][a] += m[(i, i)].re;
        marg[1][b] += m[(i, i)].re;
    }
    let trace: f64 = marg[0].iter().sum();
    if m.iter().all(|x| x.norm() == 0.0) {
        return fs
            .iter()
            .map(|_| Integral {
                value: 0.0,
                error: 0.0,
            })
            .collect();
    }
    let mass = opts.tail_mass * trace.abs().max(1e-300);
    let t1 = radial_extent(&marg[0], mass);
    let t2 = radial_extent(&marg[1], mass);
    let outside = poisson_cdf_table(t1, d)
        .iter()
        .zip(&marg[0])
        .chain(poisson_cdf_table(t2, d).iter().zip(&marg[1]))
        .map(|(c, x)| c * x.max(0.0))
        .sum::<f64>();
    let diagonal = linalg::is_diagonal(m, 0.0);

    let level = |order: usize, scale: f64, angular: usize| -> Vec<f64> {
        let ang = if diagonal { 0 } else { angular };
        let n1 = mode_nodes(t1, order, scale, ang);
        let n2 = mode_nodes(t2, order, scale, ang);
        let v2: Vec<Vec<C64>> = n2.iter().map(|(z, _)| coherent_amplitudes(*z, d)).collect();
        n1.par_iter()
            .map(|(z1, w1)| {
                let u = coherent_amplitudes(*z1, d);
                // R = (u† ⊗ I) A (u ⊗ I)
                let mut r = CMatrix::zeros(d, d);
                for a in 0..d {
                    let ua = u[a].conj();
                    if ua == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for c in 0..d {
                        let coef = ua * u[c];
                        if coef == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for b in 0..d {
                            for e in 0..d {
                                r[(b, e)] += coef * m[(a * d + b, c * d + e)];
                            }
                        }
                    }
                }
                let mut acc = vec![0.0; fs.len()];
                for ((_, w2), v) in n2.iter().zip(&v2) {
                    let mut q = 0.0;
                    for b in 0..d {
                        let mut row = C64::new(0.0, 0.0);
                        for e in 0..d {
                            row += r[(b, e)] * v[e];
                        }
                        q += (v[b].conj() * row).re;
                    }
                    for (s, f) in acc.iter_mut().zip(fs) {
                        *s += w2 * f.eval(q);
                    }
                }
                acc.into_iter().map(|x| w1 * x).collect::<Vec<f64>>()
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(vec![0.0; fs.len()], |mut s, v| {
                for (a, b) in s.iter_mut().zip(v) {
                    *a += b;
                }
                s
            })
    };
    let base = (2 * d + 4).max(8);
    let coarse = level(8, 2.0, base);
    let fine = level(12, 1.5, base + base / 2);
    fine.into_iter()
        .zip(coarse)
        .zip(fs)
        .map(|((v, c), &f)| Integral {
            value: v,
            error: (v - c).abs() + tail_error(f, outside, t1.max(t2)),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fock_state, thermal_product, thermal_state, vacuum, FockCutoff};
    use crate::special::EULER_GAMMA;

    #[test]
    fn vacuum_values() {
        let c = FockCutoff::single(4).unwrap();
        let opts = IntegrationOptions::default();
        let v = vacuum(c);
        let one = convex_functional(&v, ConvexFn::Identity, &opts).unwrap();
        assert!((one.value - 1.0).abs() < 1e-12);
        let sq = convex_functional(&v, ConvexFn::Square, &opts).unwrap();
        assert!((sq.value - 0.5).abs() < 1e-12);
        let w = wehrl_entropy(&v).unwrap();
        assert!((w.value - 1.0).abs() < 1e-10);
        let n2 = husimi_q_norm(&v, 2.0).unwrap();
        assert!((n2.value - 0.5f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn fock_one_wehrl() {
        let c = FockCutoff::single(3).unwrap();
        let w = wehrl_entropy(&fock_state(1, c).unwrap()).unwrap();
        assert!((w.value - (1.0 + EULER_GAMMA)).abs() < 1e-9, "{}", w.value);
    }

    #[test]
    fn thermal_values() {
        let c = FockCutoff::for_thermal(0.5, 1e-14).unwrap();
        let w = thermal_state(0.5, c).unwrap();
        let s = wehrl_entropy(&w).unwrap();
        assert!((s.value - (1.0 + std::f64::consts::LN_2)).abs() < 1e-9);
        let n = husimi_q_norm(&w, 2.0).unwrap();
        assert!((n.value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn off_diagonal_state_is_normalised() {
        let c = FockCutoff::single(6).unwrap();
        let spec = crate::fock::Spectrum::new(vec![0.6, 0.3, 0.1]).unwrap();
        let rho = crate::fock::random_isospectral_state(&spec, c, 5).unwrap();
        let opts = IntegrationOptions::default();
        let r = convex_functionals(&rho, &[ConvexFn::Identity, ConvexFn::XLogX], &opts).unwrap();
        assert!((r[0].value - 1.0).abs() < 1e-10);
        assert!(-r[1].value >= 1.0);
    }

    #[test]
    fn two_mode_thermal_product() {
        let c = FockCutoff::new(6, 2).unwrap();
        let rho = thermal_product(0.2, c).unwrap();
        let opts = IntegrationOptions::with_tol(1e-6);
        let w = wehrl_entropy_with(&rho, &opts).unwrap();
        let exact = 2.0 * (1.0 - (0.8f64).ln());
        assert!(
            (w.value - exact).abs() < 1e-6 + rho.tail_bound() * 100.0,
            "{} vs {exact}",
            w.value
        );
    }

    #[test]
    fn rejects_three_modes() {
        let c = FockCutoff::new(2, 3).unwrap();
        assert!(wehrl_entropy(&vacuum(c)).is_err());
    }
}
