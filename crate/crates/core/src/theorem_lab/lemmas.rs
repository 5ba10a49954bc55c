use super::SLACK;
use crate::convex::ConvexFn;
use crate::error::{Error, Result};
use crate::fock::{bound_f, g, BoundedOperator};
use crate::linalg;
use crate::report::VerificationReport;

/// `Tr f(B) ≤ Tr f(A) + ‖B − A‖₁ · sup|f′|` for `0 ≤ A, B ≤ I`.
pub fn check_klein(
    a: &BoundedOperator,
    b: &BoundedOperator,
    f: ConvexFn,
) -> Result<VerificationReport> {
    let lip = f
        .derivative_sup()
        .ok_or_else(|| Error::Precondition(format!("{} is not C¹ on [0, 1]", f.name())))?;
    if a.cutoff() != b.cutoff() {
        return Err(Error::shape("operators live on different cutoffs"));
    }
    let dist = linalg::trace_norm(&(b.matrix() - a.matrix()));
    let ta = linalg::trace_fn(a.matrix(), f);
    let tb = linalg::trace_fn(b.matrix(), f);
    Ok(
        VerificationReport::upper_bound("klein", tb, ta + dist * lip, SLACK)
            .input("f", f.name())
            .input("dim", a.cutoff().total_dim())
            .detail("trace_distance", dist)
            .detail("lipschitz", lip),
    )
}

/// `x_r = 1 − (r/q)^{1/(q−1)}`, the right end of the range where
/// `(1 − x)^q ≤ 1 − r x`.
pub fn lemma_q_endpoint(r: f64, q: f64) -> Result<f64> {
    if !(1.0 <= r && r < q) || !q.is_finite() {
        return Err(Error::Precondition(format!(
            "need 1 ≤ r < q, got r = {r}, q = {q}"
        )));
    }
    Ok(1.0 - (r / q).powf(1.0 / (q - 1.0)))
}

/// `n + 1` equally spaced points on `[0, x_r]`, both ends included.
pub fn lemma_q_grid(r: f64, q: f64, n: usize) -> Result<Vec<f64>> {
    let xr = lemma_q_endpoint(r, q)?;
    let n = n.max(1);
    Ok((0..=n)
        .map(|i| if i == n { xr } else { xr * i as f64 / n as f64 })
        .collect())
}

/// `(1 − x)^q ≤ 1 − r x` at every grid point; the report carries the worst
/// point and no budget.
pub fn check_lemma_q(r: f64, q: f64, xs: &[f64]) -> Result<VerificationReport> {
    let xr = lemma_q_endpoint(r, q)?;
    if xs.is_empty() {
        return Err(Error::domain("empty grid"));
    }
    if let Some(x) = xs.iter().find(|&&x| !(0.0..=xr).contains(&x)) {
        return Err(Error::Precondition(format!("x = {x} outside [0, {xr}]")));
    }
    let (x, lhs, rhs) = xs
        .iter()
        .map(|&x| (x, (1.0 - x).powf(q), 1.0 - r * x))
        .min_by(|a, b| (a.2 - a.1).total_cmp(&(b.2 - b.1)))
        .expect("nonempty");
    Ok(VerificationReport::upper_bound("lemma_q", lhs, rhs, 0.0)
        .input("r", r)
        .input("q", q)
        .input("points", xs.len())
        .detail("x_r", xr)
        .detail("worst_x", x))
}

/// Finite-difference shape checks on `h, 2h, …, n·h`: first differences
/// (sign `dir` = +1 for increasing) and second differences (sign `curv`).
fn shape_reports(
    name: &str,
    func: impl Fn(f64) -> Result<f64>,
    h: f64,
    n: usize,
    dir: f64,
    curv: f64,
) -> Result<Vec<VerificationReport>> {
    let xs: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| func(x)).collect::<Result<_>>()?;
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let budget = 64.0 * f64::EPSILON * scale;
    let first = ys
        .windows(2)
        .map(|w| dir * (w[1] - w[0]))
        .fold(f64::INFINITY, f64::min);
    let second = ys
        .windows(3)
        .map(|w| curv * (w[2] - 2.0 * w[1] + w[0]))
        .fold(f64::INFINITY, f64::min);
    let range = (xs[0], xs[n - 1]);
    let monotone = if dir > 0.0 {
        "increasing"
    } else {
        "decreasing"
    };
    let shape = if curv > 0.0 { "convex" } else { "concave" };
    Ok(vec![
        VerificationReport::with_margin(format!("{name}_{monotone}"), first, 0.0, first, budget)
            .input("range", range)
            .input("step", h),
        VerificationReport::with_margin(format!("{name}_{shape}"), second, 0.0, second, budget)
            .input("range", range)
            .input("step", h),
    ])
}

/// `f(x) = ln(g⁻¹(x) + 1) + 1` is increasing and convex on `(0, 10]`.
pub fn check_bound_f_shape() -> Result<Vec<VerificationReport>> {
    shape_reports("bound_f", bound_f, 0.01, 1000, 1.0, 1.0)
}

/// `g` is increasing and concave on `(0, 10]`.
pub fn check_g_shape() -> Result<Vec<VerificationReport>> {
    shape_reports("g", g, 0.01, 1000, 1.0, -1.0)
}
