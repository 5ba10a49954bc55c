//! One-dimensional Gauss rules.
//!
//! Legendre nodes come from Newton iteration on the three-term recurrence;
//! Laguerre nodes start from the Golub–Welsch eigenvalues and are polished
//! the same way, with weights from the closed form so that the smallest
//! weights keep relative accuracy.

use nalgebra::DMatrix;
use std::f64::consts::PI;

/// A one-dimensional rule: `∫ g ≈ Σ wᵢ g(xᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule with `n` points on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss–Legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
        let (_, dp) = legendre(n, 0.0);
        weights[n / 2] = 2.0 / (dp * dp);
    }
    Rule { nodes, weights }
}

/// Composite Gauss–Legendre rule over consecutive `breaks`.
pub fn composite_legendre(breaks: &[f64], order: usize) -> Rule {
    let base = gauss_legendre(order);
    let mut nodes = Vec::with_capacity(order * breaks.len().saturating_sub(1));
    let mut weights = Vec::with_capacity(nodes.capacity());
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (&x, &w) in base.nodes.iter().zip(&base.weights) {
            nodes.push(mid + half * x);
            weights.push(half * w);
        }
    }
    Rule { nodes, weights }
}

/// Laguerre polynomial `L_n(x)` and `L_{n-1}(x)`.
fn laguerre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 1.0;
    let mut cur = 1.0 - x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Gauss–Laguerre rule: `∫₀^∞ e^{-x} g(x) dx ≈ Σ wᵢ g(xᵢ)`, exact for
/// polynomials of degree `≤ 2n − 1`.
pub fn gauss_laguerre(n: usize) -> Rule {
    assert!(n >= 1, "Gauss–Laguerre needs at least one node");
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        jacobi[(i, i)] = 2.0 * i as f64 + 1.0;
        if i + 1 < n {
            jacobi[(i, i + 1)] = (i + 1) as f64;
            jacobi[(i + 1, i)] = (i + 1) as f64;
        }
    }
    let mut guesses: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
    guesses.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for mut x in guesses {
        for _ in 0..50 {
            let (ln, ln1) = laguerre_pair(n, x);
            // x L_n'(x) = n (L_n − L_{n−1})
            let d = n as f64 * (ln - ln1) / x;
            let dx = ln / d;
            x -= dx;
            if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        let (ln1, _) = laguerre_pair(n + 1, x);
        let w = x / (((n + 1) * (n + 1)) as f64 * ln1 * ln1);
        nodes.push(x);
        weights.push(w);
    }
    Rule { nodes, weights }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(7);
        // degree 13 is the top exact degree for 7 points
        let exact = 2.0 / 13.0;
        assert!((rule.integrate(|x| x.powi(12) + x.powi(13)) - exact).abs() < 1e-14);
        assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn composite_rule_on_exponential() {
        let breaks: Vec<f64> = (0..=20).map(|k| k as f64).collect();
        let rule = composite_legendre(&breaks, 10);
        let v = rule.integrate(|x| (-x).exp());
        assert!((v - (1.0 - (-20.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn laguerre_moments() {
        let rule = gauss_laguerre(30);
        // ∫ e^{-x} x^k dx = k!
        let mut fact = 1.0;
        for k in 0..40 {
            if k > 0 {
                fact *= k as f64;
            }
            let v = rule.integrate(|x| x.powi(k));
            assert!(((v - fact) / fact).abs() < 1e-11, "k={k} v={v} fact={fact}");
        }
    }
}
