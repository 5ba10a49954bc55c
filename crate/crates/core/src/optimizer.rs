//! Derivative-free extremality searches.
//!
//! The isospectral searches move along the unitary orbit `{UρU†}`, so the
//! spectrum is preserved exactly. Proposals are two-level rotations, either
//! of a pair of Fock levels or of a pair of eigenvectors of the current
//! state, with a three-point parabolic line search in the angle. The
//! objective is evaluated on a fixed radial scheme and updated
//! incrementally: with `R = ρV` and `C = U†V` (`V` the coherent vectors of
//! the nodes, `U` the eigenvectors) a rotation touches two rows of one of
//! them, so a proposal costs one pass over the nodes.
//!
//! Minimisers are only defined up to a displacement, and on a truncated
//! space displaced optima pay a small cutoff penalty that pair rotations
//! remove very slowly; every so often the search therefore tries to
//! recentre `⟨a⟩` with a (truncated) displacement. Only strictly improving
//! moves are accepted; the step shrinks after runs of rejections, and the
//! search stops after [`STAGNATION`] consecutive rejections at the minimum
//! step.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, TAU};

use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::convex::ConvexFn;
use crate::error::{Error, Result};
use crate::fock::{
    bound_f, conjugate_spectrum, format::write_density, haar_unitary_with, schatten_norm_of,
    DensityOperator, FockCutoff, Spectrum,
};
use crate::linalg;
use crate::phase_space::{estimate_functionals, power_fn, IntegrationOptions, QuadratureScheme};
use crate::quadrature::composite_legendre;
use crate::sampling;
use crate::{CMatrix, C64};

/// Consecutive rejections at the minimum step that end a search.
pub const STAGNATION: usize = 200;

/// Improvements smaller than this are treated as rounding noise.
const MIN_IMPROVEMENT: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Cap on objective evaluations.
    pub budget: usize,
    pub initial_step: f64,
    pub min_step: f64,
    /// Rejections in a row before the step is halved.
    pub patience: usize,
    /// Probability of a large-angle proposal, whatever the current step.
    pub jump_rate: f64,
    /// Fraction of rotations that mix two eigenvectors rather than two
    /// Fock levels.
    pub eigen_rate: f64,
    /// Every this many proposals, try to recentre `⟨a⟩`; 0 disables.
    pub recenter_every: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            budget: 50_000,
            initial_step: 0.5,
            min_step: 1e-4,
            patience: 40,
            jump_rate: 0.1,
            eigen_rate: 0.8,
            recenter_every: 300,
        }
    }
}

impl SearchOptions {
    pub fn with_budget(budget: usize) -> Self {
        Self {
            budget,
            ..Self::default()
        }
    }
}

/// Outcome of one search.
#[derive(Debug, Clone)]
pub struct OptimizationTrace {
    /// Objective after the start and after every accepted move (the
    /// fixed-scheme value the search compares).
    pub objective_history: Vec<f64>,
    pub best_state: DensityOperator,
    /// Best objective, recomputed with the adaptive quadrature.
    pub best_value: f64,
    pub best_value_error: f64,
    /// Theoretical bound the search is compared with.
    pub target: f64,
    /// `best_value − target` for minimisations, `target − best_value` for
    /// maximisations: never below `−tolerance` if the bound holds.
    pub gap: f64,
    /// Accepted moves.
    pub iterations: usize,
    pub evaluations: usize,
    pub seed: u64,
    /// The stagnation criterion fired; `false` means the budget ran out first.
    pub stagnated: bool,
    /// The objective has no finite optimum (`p > q`).
    pub divergent: bool,
    pub details: BTreeMap<String, f64>,
}

impl OptimizationTrace {
    /// The budget ran out before the search stagnated.
    pub fn is_partial(&self) -> bool {
        !self.stagnated && !self.divergent
    }

    /// `iteration,objective` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,objective\n");
        for (i, v) in self.objective_history.iter().enumerate() {
            out.push_str(&format!("{i},{}\n", crate::report::format_sig(*v, 9)));
        }
        out
    }

    /// The best state in the density-matrix text format.
    pub fn best_state_text(&self) -> String {
        write_density(&self.best_state)
    }

    /// Everything except the state and the history, as JSON.
    pub fn summary_json(&self) -> String {
        let v = json!({
            "best_value": self.best_value,
            "best_value_error": self.best_value_error,
            "target": self.target,
            "gap": self.gap,
            "iterations": self.iterations,
            "evaluations": self.evaluations,
            "seed": self.seed,
            "stagnated": self.stagnated,
            "divergent": self.divergent,
            "partial": self.is_partial(),
            "details": self.details,
        });
        serde_json::to_string_pretty(&v).expect("summaries always serialise")
    }
}

/// `(argmax, value)` of `f` on `[lo, hi]` by golden-section search until
/// the bracket is narrower than `tol`. The value is never below either
/// endpoint's.
pub fn golden_section_sup<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    if !(lo <= hi) || !(tol > 0.0) {
        return Err(Error::domain(format!(
            "bad bracket [{lo}, {hi}] or tolerance {tol}"
        )));
    }
    let eval = |x: f64| -> Result<f64> {
        let v = f(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::domain(format!("objective is {v} at {x}")))
        }
    };
    let (f_lo, f_hi) = (eval(lo)?, eval(hi)?);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, eval(mid)?);
    for cand in [(c, fc), (d, fd), (lo, f_lo), (hi, f_hi)] {
        if cand.1 > best.1 {
            best = cand;
        }
    }
    Ok(best)
}

/// Fixed radial scheme for the orbit searches on `dim` levels: covers all
/// but `1e−14` of the Husimi mass of any such state, with `4·dim` angles.
fn orbit_scheme(dim: usize) -> Result<QuadratureScheme> {
    let mut top = vec![0.0; dim];
    top[dim - 1] = 1.0;
    let t_max = crate::phase_space::radial_extent(&top, 1e-14);
    let rule = composite_legendre(&crate::phase_space::radial_breaks(t_max, 3.0), 6);
    QuadratureScheme::radial_from_rule(&rule, (4 * dim).max(16))
}

/// Descent state over the orbit of one density matrix.
struct OrbitSearch {
    rho: CMatrix,
    /// Eigenvectors (columns) and eigenvalues of `ρ`, and `C = U†V`.
    u: CMatrix,
    p: Vec<f64>,
    c: CMatrix,
    v: CMatrix,
    r: CMatrix,
    q: Vec<f64>,
    weights: Vec<f64>,
    /// Per-node integrand; the search minimises `Σ w h(Q)`.
    h: fn(f64, f64) -> f64,
    h_param: f64,
    value: f64,
}

impl OrbitSearch {
    fn new(
        rho: CMatrix,
        scheme: &QuadratureScheme,
        h: fn(f64, f64) -> f64,
        h_param: f64,
    ) -> Result<Self> {
        let v = scheme.coherent_matrix(rho.nrows())?;
        let r = &rho * &v;
        let q: Vec<f64> = (0..v.ncols())
            .map(|i| {
                v.column(i)
                    .iter()
                    .zip(r.column(i).iter())
                    .map(|(a, b)| (a.conj() * b).re)
                    .sum()
            })
            .collect();
        let weights = scheme.weights().to_vec();
        let value = q
            .iter()
            .zip(&weights)
            .map(|(&x, &w)| w * h(x, h_param))
            .sum();
        let (p, u) = linalg::hermitian_eigh(&rho);
        let c = u.adjoint() * &v;
        Ok(Self {
            rho,
            u,
            p,
            c,
            v,
            r,
            q,
            weights,
            h,
            h_param,
            value,
        })
    }

    /// `G†` restricted to levels `(j, k)`.
    fn rotation(theta: f64, phi: f64) -> [[C64; 2]; 2] {
        let (s, c) = theta.sin_cos();
        let e = C64::from_polar(1.0, phi);
        [[C64::new(c, 0.0), e * s], [-e.conj() * s, C64::new(c, 0.0)]]
    }

    /// Husimi values after `ρ → GρG†`, and the objective there.
    fn propose(&self, j: usize, k: usize, g: &[[C64; 2]; 2], out: &mut Vec<f64>) -> f64 {
        let (rjj, rjk, rkj, rkk) = (
            self.rho[(j, j)],
            self.rho[(j, k)],
            self.rho[(k, j)],
            self.rho[(k, k)],
        );
        out.clear();
        let mut total = 0.0;
        for i in 0..self.q.len() {
            let (vj, vk) = (self.v[(j, i)], self.v[(k, i)]);
            let dj = g[0][0] * vj + g[0][1] * vk - vj;
            let dk = g[1][0] * vj + g[1][1] * vk - vk;
            let cross = dj.conj() * self.r[(j, i)] + dk.conj() * self.r[(k, i)];
            let quad = dj.conj() * (rjj * dj + rjk * dk) + dk.conj() * (rkj * dj + rkk * dk);
            let qi = self.q[i] + 2.0 * cross.re + quad.re;
            out.push(qi);
            total += self.weights[i] * (self.h)(qi, self.h_param);
        }
        total
    }

    fn accept(&mut self, j: usize, k: usize, g: &[[C64; 2]; 2], q: &mut Vec<f64>, value: f64) {
        // R' = G ρ (G†V): first ρ(G†V) = R + ρ[:, j]Δ_j + ρ[:, k]Δ_k
        let n = self.rho.nrows();
        for i in 0..self.q.len() {
            let (vj, vk) = (self.v[(j, i)], self.v[(k, i)]);
            let dj = g[0][0] * vj + g[0][1] * vk - vj;
            let dk = g[1][0] * vj + g[1][1] * vk - vk;
            for a in 0..n {
                let add = self.rho[(a, j)] * dj + self.rho[(a, k)] * dk;
                self.r[(a, i)] += add;
            }
        }
        // C' = U†(G†V)
        for i in 0..self.q.len() {
            let (vj, vk) = (self.v[(j, i)], self.v[(k, i)]);
            let dj = g[0][0] * vj + g[0][1] * vk - vj;
            let dk = g[1][0] * vj + g[1][1] * vk - vk;
            for m in 0..n {
                let add = self.u[(j, m)].conj() * dj + self.u[(k, m)].conj() * dk;
                self.c[(m, i)] += add;
            }
        }
        // G = (G†)† acts on rows j, k
        let gm = [
            [g[0][0].conj(), g[1][0].conj()],
            [g[0][1].conj(), g[1][1].conj()],
        ];
        for m in 0..n {
            let (a, b) = (self.u[(j, m)], self.u[(k, m)]);
            self.u[(j, m)] = gm[0][0] * a + gm[0][1] * b;
            self.u[(k, m)] = gm[1][0] * a + gm[1][1] * b;
        }
        for i in 0..self.q.len() {
            let (a, b) = (self.r[(j, i)], self.r[(k, i)]);
            self.r[(j, i)] = gm[0][0] * a + gm[0][1] * b;
            self.r[(k, i)] = gm[1][0] * a + gm[1][1] * b;
        }
        // ρ' = GρG†: rows then columns
        for c in 0..n {
            let (a, b) = (self.rho[(j, c)], self.rho[(k, c)]);
            self.rho[(j, c)] = gm[0][0] * a + gm[0][1] * b;
            self.rho[(k, c)] = gm[1][0] * a + gm[1][1] * b;
        }
        for rrow in 0..n {
            let (a, b) = (self.rho[(rrow, j)], self.rho[(rrow, k)]);
            self.rho[(rrow, j)] = a * gm[0][0].conj() + b * gm[0][1].conj();
            self.rho[(rrow, k)] = a * gm[1][0].conj() + b * gm[1][1].conj();
        }
        std::mem::swap(&mut self.q, q);
        self.value = value;
    }

    /// Husimi values after rotating eigenvectors `(j, k)`: `U → UH`, so
    /// rows `j, k` of `C` become `H†` applied to them.
    fn propose_eigen(&self, j: usize, k: usize, h: &[[C64; 2]; 2], out: &mut Vec<f64>) -> f64 {
        let (pj, pk) = (self.p[j], self.p[k]);
        out.clear();
        let mut total = 0.0;
        for i in 0..self.q.len() {
            let (cj, ck) = (self.c[(j, i)], self.c[(k, i)]);
            let nj = h[0][0].conj() * cj + h[1][0].conj() * ck;
            let nk = h[0][1].conj() * cj + h[1][1].conj() * ck;
            let qi = self.q[i]
                + pj * (nj.norm_sqr() - cj.norm_sqr())
                + pk * (nk.norm_sqr() - ck.norm_sqr());
            out.push(qi);
            total += self.weights[i] * (self.h)(qi, self.h_param);
        }
        total
    }

    fn accept_eigen(
        &mut self,
        j: usize,
        k: usize,
        h: &[[C64; 2]; 2],
        q: &mut Vec<f64>,
        value: f64,
    ) {
        let n = self.rho.nrows();
        let (pj, pk) = (self.p[j], self.p[k]);
        let old_j = self.u.column(j).into_owned();
        let old_k = self.u.column(k).into_owned();
        let new_j = &old_j * h[0][0] + &old_k * h[1][0];
        let new_k = &old_j * h[0][1] + &old_k * h[1][1];
        for i in 0..self.q.len() {
            let (cj, ck) = (self.c[(j, i)], self.c[(k, i)]);
            let nj = h[0][0].conj() * cj + h[1][0].conj() * ck;
            let nk = h[0][1].conj() * cj + h[1][1].conj() * ck;
            for a in 0..n {
                self.r[(a, i)] +=
                    (new_j[a] * nj - old_j[a] * cj) * pj + (new_k[a] * nk - old_k[a] * ck) * pk;
            }
            self.c[(j, i)] = nj;
            self.c[(k, i)] = nk;
        }
        self.rho += (&new_j * new_j.adjoint() - &old_j * old_j.adjoint()) * C64::new(pj, 0.0)
            + (&new_k * new_k.adjoint() - &old_k * old_k.adjoint()) * C64::new(pk, 0.0);
        self.u.set_column(j, &new_j);
        self.u.set_column(k, &new_k);
        std::mem::swap(&mut self.q, q);
        self.value = value;
    }

    /// `e^{βa† − β̄a}` on the truncated space (unitary, but only
    /// approximately a displacement near the cutoff).
    fn truncated_displacement(n: usize, beta: C64) -> CMatrix {
        let mut gen = CMatrix::zeros(n, n);
        for m in 1..n {
            let s = (m as f64).sqrt();
            gen[(m, m - 1)] = beta * s;
            gen[(m - 1, m)] = -beta.conj() * s;
        }
        // gen = iH with H Hermitian
        let (ev, vecs) = linalg::hermitian_eigh(&(gen * C64::new(0.0, -1.0)));
        let phases = crate::CVector::from_iterator(n, ev.iter().map(|&e| C64::from_polar(1.0, e)));
        &vecs * CMatrix::from_diagonal(&phases) * vecs.adjoint()
    }

    /// `⟨a⟩` of the current state.
    fn mean_field(&self) -> C64 {
        (1..self.rho.nrows())
            .map(|m| self.rho[(m, m - 1)] * (m as f64).sqrt())
            .sum()
    }

    /// Objective after `ρ → DρD†`, from scratch.
    fn propose_unitary(&self, d: &CMatrix, out: &mut Vec<f64>) -> f64 {
        let w = d.adjoint() * &self.v;
        let r = &self.rho * &w;
        out.clear();
        let mut total = 0.0;
        for i in 0..self.q.len() {
            let qi: f64 = w
                .column(i)
                .iter()
                .zip(r.column(i).iter())
                .map(|(a, b)| (a.conj() * b).re)
                .sum();
            out.push(qi);
            total += self.weights[i] * (self.h)(qi, self.h_param);
        }
        total
    }

    fn accept_unitary(&mut self, d: &CMatrix) {
        self.u = d * &self.u;
        self.refresh();
    }

    /// Recomputes `R` and `Q` from `ρ` to stop rounding drift.
    fn refresh(&mut self) {
        let p = CMatrix::from_diagonal(&crate::CVector::from_iterator(
            self.p.len(),
            self.p.iter().map(|&x| C64::new(x, 0.0)),
        ));
        self.rho = linalg::hermitize(&(&self.u * p * self.u.adjoint()));
        self.c = self.u.adjoint() * &self.v;
        self.r = &self.rho * &self.v;
        for i in 0..self.q.len() {
            self.q[i] = self
                .v
                .column(i)
                .iter()
                .zip(self.r.column(i).iter())
                .map(|(a, b)| (a.conj() * b).re)
                .sum();
        }
        self.value = self
            .q
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * (self.h)(x, self.h_param))
            .sum();
    }

    /// One recentring attempt: `ρ → DρD†` with `D` the truncated
    /// displacement by `−s⟨a⟩`, `s ∈ {½, 1}`. Two evaluations.
    fn try_recenter(&mut self, buf: &mut Vec<f64>) -> bool {
        let n = self.rho.nrows();
        let mean = self.mean_field();
        let mut best: Option<(f64, CMatrix)> = None;
        for s in [0.5, 1.0] {
            let d = Self::truncated_displacement(n, -mean * s);
            let v = self.propose_unitary(&d, buf);
            if v < self.value - MIN_IMPROVEMENT && best.as_ref().is_none_or(|b| v < b.0) {
                best = Some((v, d));
            }
        }
        match best {
            Some((_, d)) => {
                self.accept_unitary(&d);
                true
            }
            None => false,
        }
    }

    /// Runs the descent; returns (history, accepted, evaluations, stagnated).
    fn run<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        opts: &SearchOptions,
    ) -> (Vec<f64>, usize, usize, bool) {
        let n = self.rho.nrows();
        let mut history = vec![self.value];
        if n < 2 {
            return (history, 0, 0, true);
        }
        let mut step = opts.initial_step;
        let (mut rejected, mut at_min, mut accepted, mut evals) = (0usize, 0usize, 0usize, 0usize);
        let mut bufs: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(self.q.len()));
        let mut proposals = 0usize;
        // a proposal costs up to three evaluations; never overrun the budget
        while evals + 3 <= opts.budget {
            proposals += 1;
            if opts.recenter_every > 0 && proposals.is_multiple_of(opts.recenter_every) {
                evals += 2;
                if self.try_recenter(&mut bufs[0]) {
                    accepted += 1;
                    history.push(self.value);
                }
                continue;
            }
            let eigen = rng.random_bool(opts.eigen_rate);
            let (j, k) = if eigen {
                weighted_pair(&self.p, rng)
            } else {
                let pops: Vec<f64> = (0..n).map(|i| self.rho[(i, i)].re).collect();
                weighted_pair(&pops, rng)
            };
            let phi = rng.random_range(0.0..TAU);
            let propose = |s: &Self, theta: f64, buf: &mut Vec<f64>| {
                if eigen {
                    s.propose_eigen(j, k, &Self::rotation(theta, phi), buf)
                } else {
                    s.propose(j, k, &Self::rotation(theta, phi), buf)
                }
            };
            let f0 = self.value;
            // (angle, objective, buffer index) of the best candidate
            let mut best = (0.0, f0, usize::MAX);
            if rng.random_bool(opts.jump_rate) {
                let theta = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
                let v = propose(self, theta, &mut bufs[0]);
                evals += 1;
                if v < best.1 {
                    best = (theta, v, 0);
                }
            } else {
                // ±step, then the vertex of the parabola through the three values
                let fp = propose(self, step, &mut bufs[0]);
                let fm = propose(self, -step, &mut bufs[1]);
                evals += 2;
                for (theta, v, b) in [(step, fp, 0), (-step, fm, 1)] {
                    if v < best.1 {
                        best = (theta, v, b);
                    }
                }
                let curv = fp + fm - 2.0 * f0;
                if curv > 0.0 {
                    let vertex = (0.5 * step * (fm - fp) / curv).clamp(-2.0 * step, 2.0 * step);
                    if (vertex.abs() - step).abs() > 1e-3 * step && vertex != 0.0 {
                        let v = propose(self, vertex, &mut bufs[2]);
                        evals += 1;
                        if v < best.1 {
                            best = (vertex, v, 2);
                        }
                    }
                }
            }
            if best.2 != usize::MAX && best.1 < f0 - MIN_IMPROVEMENT {
                let g = Self::rotation(best.0, phi);
                if eigen {
                    self.accept_eigen(j, k, &g, &mut bufs[best.2], best.1);
                } else {
                    self.accept(j, k, &g, &mut bufs[best.2], best.1);
                }
                accepted += 1;
                if accepted % 500 == 0 {
                    self.refresh();
                }
                history.push(self.value);
                rejected = 0;
                at_min = 0;
                step = (step * 1.5).min(opts.initial_step);
            } else {
                rejected += 1;
                if step <= opts.min_step {
                    at_min += 1;
                    if at_min >= STAGNATION {
                        return (history, accepted, evals, true);
                    }
                } else if rejected % opts.patience == 0 {
                    step = (step * 0.5).max(opts.min_step);
                }
            }
        }
        (history, accepted, evals, false)
    }
}

/// A pair `j ≠ k`; each index is drawn uniformly or, half the time, with
/// probability proportional to `w`, so heavily weighted levels come up
/// more often.
fn weighted_pair<R: Rng + ?Sized>(w: &[f64], rng: &mut R) -> (usize, usize) {
    let n = w.len();
    let total: f64 = w.iter().map(|x| x.max(0.0)).sum();
    let draw = |rng: &mut R| {
        if total <= 0.0 || rng.random_bool(0.5) {
            return rng.random_range(0..n);
        }
        let u = rng.random_range(0.0..total);
        let mut acc = 0.0;
        for (i, &x) in w.iter().enumerate() {
            acc += x.max(0.0);
            if acc > u {
                return i;
            }
        }
        n - 1
    };
    let j = draw(rng);
    loop {
        let k = draw(rng);
        if k != j {
            return (j, k);
        }
    }
}

fn neg_xlogx(x: f64, _: f64) -> f64 {
    -crate::convex::xlogx(x)
}

fn neg_power(x: f64, q: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x.powf(q)
    }
}

fn wehrl_adaptive(rho: &DensityOperator) -> Result<(f64, f64)> {
    let i = estimate_functionals(rho, &[ConvexFn::XLogX], &IntegrationOptions::default())?[0];
    Ok((-i.value, i.error))
}

/// Minimises the Wehrl entropy over `{UρU†}` starting from a Haar-random
/// point of the orbit of `diag(spec)`. The target is the bound `f(S)`.
pub fn minimize_wehrl_isospectral(
    spec: &Spectrum,
    cutoff: FockCutoff,
    seed: u64,
    opts: &SearchOptions,
) -> Result<OptimizationTrace> {
    if cutoff.modes() != 1 {
        return Err(Error::domain("orbit searches are single-mode"));
    }
    if spec.len() > cutoff.dim() {
        return Err(Error::shape("spectrum longer than the cutoff"));
    }
    let mut rng = sampling::rng(seed);
    let u = haar_unitary_with(cutoff.dim(), &mut rng);
    let start = conjugate_spectrum(spec, &u, cutoff);
    minimize_from(&start, spec, seed, &mut rng, opts)
}

/// As [`minimize_wehrl_isospectral`] from a given state; its spectrum
/// fixes the orbit.
pub fn minimize_wehrl_from(
    start: &DensityOperator,
    seed: u64,
    opts: &SearchOptions,
) -> Result<OptimizationTrace> {
    if start.modes() != 1 {
        return Err(Error::domain("orbit searches are single-mode"));
    }
    let spec = start.spectrum()?;
    let mut rng = sampling::rng(seed);
    minimize_from(start, &spec, seed, &mut rng, opts)
}

fn minimize_from<R: Rng + ?Sized>(
    start: &DensityOperator,
    spec: &Spectrum,
    seed: u64,
    rng: &mut R,
    opts: &SearchOptions,
) -> Result<OptimizationTrace> {
    let cutoff = start.cutoff();
    let scheme = orbit_scheme(cutoff.dim())?;
    let mut search = OrbitSearch::new(start.matrix().clone(), &scheme, neg_xlogx, 0.0)?;
    let (history, iterations, evaluations, stagnated) = search.run(rng, opts);
    let best =
        DensityOperator::from_parts(cutoff, linalg::hermitize(&search.rho), start.tail_bound());
    let (best_value, best_value_error) = wehrl_adaptive(&best)?;
    let target = bound_f(spec.entropy())?;
    let mut details = BTreeMap::new();
    // proximity to the passive (thermal-like) arrangement, recorded only
    let passive = crate::fock::passive_rearrangement(&best)?;
    details.insert(
        "passive_trace_distance".into(),
        0.5 * linalg::trace_norm(&(best.matrix() - passive.matrix())),
    );
    let populations: f64 = best
        .matrix()
        .diagonal()
        .iter()
        .zip(passive.matrix().diagonal().iter())
        .map(|(a, b)| (a.re - b.re).abs())
        .sum();
    details.insert("population_distance".into(), populations);
    details.insert("start_value".into(), history[0]);
    Ok(OptimizationTrace {
        objective_history: history,
        best_state: best,
        best_value,
        best_value_error,
        target,
        gap: best_value - target,
        iterations,
        evaluations,
        seed,
        stagnated,
        divergent: false,
        details,
    })
}

/// Independent restarts, one per seed, run in parallel; results in seed order.
pub fn minimize_wehrl_restarts(
    spec: &Spectrum,
    cutoff: FockCutoff,
    seeds: &[u64],
    opts: &SearchOptions,
) -> Result<Vec<OptimizationTrace>> {
    seeds
        .par_iter()
        .map(|&s| minimize_wehrl_isospectral(spec, cutoff, s, opts))
        .collect()
}

/// `‖Q(ω_z)‖_q / ‖ω_z‖_p = (1−z^p)^{1/p} / (q^{1/q}(1−z)^{1/q})` for the
/// untruncated thermal state.
pub fn thermal_norm_ratio(z: f64, p: f64, q: f64) -> f64 {
    let one_minus_zp = if z == 0.0 {
        1.0
    } else {
        -(p * z.ln()).exp_m1()
    };
    one_minus_zp.powf(1.0 / p) / (q.powf(1.0 / q) * (1.0 - z).powf(1.0 / q))
}

fn truncated_thermal(z: f64, cutoff: FockCutoff) -> Result<DensityOperator> {
    let d = cutoff.dim();
    let raw: Vec<f64> = (0..d).map(|n| (1.0 - z) * z.powi(n as i32)).collect();
    let s: f64 = raw.iter().sum();
    DensityOperator::from_diagonal(cutoff, &raw.iter().map(|x| x / s).collect::<Vec<_>>(), 0.0)
}

fn norm_ratio(rho: &DensityOperator, p: f64, q: f64) -> Result<(f64, f64)> {
    let i = estimate_functionals(rho, &[power_fn(q)], &IntegrationOptions::default())?[0];
    let qn = crate::phase_space::q_root(i, q);
    let pn = schatten_norm_of(&rho.eigenvalues(), p)?;
    Ok((qn.value / pn, qn.error / pn))
}

/// Maximises `‖Q(ρ)‖_q / ‖ρ‖_p` over (renormalised) thermal states on the
/// cutoff, then perturbs the best one along its unitary orbit (where only
/// `‖Q‖_q` changes). For `p > q` no maximiser exists: the trace records the
/// closed-form ratio along `z ∈ {0.9, 0.99, 0.999}` and sets `divergent`.
pub fn maximize_norm_ratio(
    p: f64,
    q: f64,
    cutoff: FockCutoff,
    seed: u64,
    opts: &SearchOptions,
) -> Result<OptimizationTrace> {
    if !(p >= 1.0 && q >= 1.0) {
        return Err(Error::domain(format!(
            "need p, q ≥ 1, got p = {p}, q = {q}"
        )));
    }
    if cutoff.modes() != 1 {
        return Err(Error::domain("orbit searches are single-mode"));
    }
    if p > q {
        let path = [0.9, 0.99, 0.999];
        let history: Vec<f64> = path.iter().map(|&z| thermal_norm_ratio(z, p, q)).collect();
        let mut details = BTreeMap::new();
        for (z, v) in path.iter().zip(&history) {
            details.insert(format!("ratio_at_z={z}"), *v);
        }
        return Ok(OptimizationTrace {
            best_value: *history.last().unwrap(),
            objective_history: history,
            best_state: truncated_thermal(0.9, cutoff)?,
            best_value_error: 0.0,
            target: f64::INFINITY,
            gap: f64::INFINITY,
            iterations: 0,
            evaluations: path.len(),
            seed,
            stagnated: false,
            divergent: true,
            details,
        });
    }
    let target = crate::theorem_lab::pq_supremum(p, q)?.value;
    // thermal family: coarse grid, then golden-section around the best point
    let ratio_at = |z: f64| norm_ratio(&truncated_thermal(z, cutoff)?, p, q).map(|r| r.0);
    let grid: Vec<f64> = (0..=40).map(|i| 0.999 * i as f64 / 40.0).collect();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&z| ratio_at(z))
        .collect::<Result<_>>()?;
    let (imax, _) =
        values.iter().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |b, (i, &v)| if v > b.1 { (i, v) } else { b },
        );
    let lo = grid[imax.saturating_sub(1)];
    let hi = grid[(imax + 1).min(grid.len() - 1)];
    let (z_best, _) = golden_section_sup(|z| ratio_at(z).unwrap_or(f64::NAN), lo, hi, 1e-6)?;
    let thermal = truncated_thermal(z_best, cutoff)?;
    let (thermal_value, _) = norm_ratio(&thermal, p, q)?;
    // isospectral perturbations of the best thermal state
    let mut rng = sampling::rng(seed);
    let scheme = orbit_scheme(cutoff.dim())?;
    let mut search = OrbitSearch::new(thermal.matrix().clone(), &scheme, neg_power, q)?;
    let (history, iterations, evaluations, stagnated) = search.run(&mut rng, opts);
    let best = DensityOperator::from_parts(cutoff, linalg::hermitize(&search.rho), 0.0);
    let (best_value, best_value_error) = norm_ratio(&best, p, q)?;
    let pn = schatten_norm_of(&thermal.eigenvalues(), p)?;
    let mut details = BTreeMap::new();
    details.insert("argmax_z".into(), z_best);
    details.insert("thermal_value".into(), thermal_value);
    Ok(OptimizationTrace {
        // the orbit search minimises −∫Q^q; report the ratio itself
        objective_history: history
            .iter()
            .map(|v| (-v).max(0.0).powf(1.0 / q) / pn)
            .collect(),
        best_state: best,
        best_value,
        best_value_error,
        target,
        gap: target - best_value,
        iterations,
        evaluations,
        seed,
        stagnated,
        divergent: false,
        details,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::thermal_state;

    #[test]
    fn golden_section_examples() {
        let (x, v) =
            golden_section_sup(|z| (1.0 - z).sqrt() / 2f64.sqrt(), 0.0, 0.999, 1e-8).unwrap();
        assert_eq!(x, 0.0);
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let (_, v) = golden_section_sup(|_| 3.5, 0.0, 1.0, 1e-6).unwrap();
        assert_eq!(v, 3.5);
        let (x, _) = golden_section_sup(|z| -(z - 0.3f64).powi(2), 0.0, 1.0, 1e-9).unwrap();
        assert!((x - 0.3).abs() < 1e-8);
        assert!(golden_section_sup(|z| 1.0 / (z - 0.5), 0.5, 1.0, 1e-6).is_err());
    }

    #[test]
    fn incremental_updates_match_recomputation() {
        let c = FockCutoff::single(6).unwrap();
        let rho = sampling::random_state(&mut sampling::rng(5), c).unwrap();
        let scheme = orbit_scheme(6).unwrap();
        let mut s = OrbitSearch::new(rho.matrix().clone(), &scheme, neg_xlogx, 0.0).unwrap();
        let mut buf = Vec::new();
        let g = OrbitSearch::rotation(0.4, 1.1);
        let v = s.propose(1, 4, &g, &mut buf);
        s.accept(1, 4, &g, &mut buf, v);
        let (q_inc, r_inc) = (s.q.clone(), s.r.clone());
        s.refresh();
        assert!((s.value - v).abs() < 1e-12);
        assert!((s.r.clone() - r_inc).norm() < 1e-12);
        assert!(s.q.iter().zip(&q_inc).all(|(a, b)| (a - b).abs() < 1e-13));
        let eig = linalg::hermitian_eigenvalues(&s.rho);
        let orig = rho.eigenvalues();
        assert!(eig.iter().zip(&orig).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn eigenvector_rotations_and_recentring_match_recomputation() {
        let c = FockCutoff::single(6).unwrap();
        let rho = sampling::random_state(&mut sampling::rng(8), c).unwrap();
        let scheme = orbit_scheme(6).unwrap();
        let mut s = OrbitSearch::new(rho.matrix().clone(), &scheme, neg_xlogx, 0.0).unwrap();
        let mut buf = Vec::new();
        let g = OrbitSearch::rotation(0.7, -0.4);
        let v = s.propose_eigen(0, 3, &g, &mut buf);
        s.accept_eigen(0, 3, &g, &mut buf, v);
        let (rho_inc, r_inc) = (s.rho.clone(), s.r.clone());
        s.refresh();
        assert!((s.value - v).abs() < 1e-12);
        assert!((s.rho.clone() - rho_inc).norm() < 1e-12);
        assert!((s.r.clone() - r_inc).norm() < 1e-12);
        let d = OrbitSearch::truncated_displacement(6, C64::new(0.2, -0.1));
        assert!((d.adjoint() * &d - CMatrix::identity(6, 6)).norm() < 1e-12);
        let v = s.propose_unitary(&d, &mut buf);
        let expected = &d * &s.rho * d.adjoint();
        s.accept_unitary(&d);
        assert!((s.value - v).abs() < 1e-12);
        assert!((s.rho.clone() - expected).norm() < 1e-12);
    }

    #[test]
    fn pure_spectrum_converges_to_a_coherent_state() {
        let spec = Spectrum::new(vec![1.0]).unwrap();
        let c = FockCutoff::single(6).unwrap();
        let t =
            minimize_wehrl_isospectral(&spec, c, 3, &SearchOptions::with_budget(20_000)).unwrap();
        assert!(t.objective_history.windows(2).all(|w| w[1] <= w[0]));
        assert!(t.gap > -1e-6);
        assert!(t.gap < 1e-3, "gap {}", t.gap);
    }

    #[test]
    fn thermal_start_needs_no_moves() {
        let c = FockCutoff::single(14).unwrap();
        let rho = thermal_state(0.3, c).unwrap();
        let t = minimize_wehrl_from(&rho, 1, &SearchOptions::default()).unwrap();
        assert_eq!(t.iterations, 0);
        assert!(t.stagnated);
        assert!(t.gap.abs() < 1e-4, "gap {}", t.gap);
    }

    #[test]
    fn norm_ratio_thermal_family() {
        let c = FockCutoff::single(10).unwrap();
        let t = maximize_norm_ratio(1.0, 2.0, c, 2, &SearchOptions::with_budget(2_000)).unwrap();
        assert!(t.details["argmax_z"] < 1e-6);
        assert!((t.best_value - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-8);
        let d = maximize_norm_ratio(2.0, 1.0, c, 2, &SearchOptions::default()).unwrap();
        assert!(d.divergent);
        assert!(d.objective_history.windows(2).all(|w| w[1] > w[0]));
    }
}
