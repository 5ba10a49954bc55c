//! Log-factorials and Poisson / negative-binomial tails.
//!
//! Coherent-state amplitudes are Poisson amplitudes and the amplifier spreads
//! a Fock state into a negative-binomial distribution, so these two families
//! control every truncation decision in the crate.

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `[ln 0!, ln 1!, …, ln n!]`.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0_f64;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// ln of the Poisson probability `e^{-t} t^n / n!`; `t = 0` is handled exactly.
#[inline]
pub fn poisson_ln_pmf(n: usize, t: f64, ln_fact: &[f64]) -> f64 {
    if t == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -t + n as f64 * t.ln() - ln_fact[n]
}

/// Poisson probabilities `P(X = n)` for `n < len`, computed from the mode
/// outwards so that no term underflows prematurely.
pub fn poisson_pmf_table(t: f64, len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    if len == 0 {
        return out;
    }
    if t == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let mode = (t.floor() as usize).min(len - 1);
    let ln_fact = ln_factorials(mode);
    let start = poisson_ln_pmf(mode, t, &ln_fact).exp();
    out[mode] = start;
    let mut p = start;
    for (n, slot) in out.iter_mut().enumerate().skip(mode + 1) {
        p *= t / n as f64;
        *slot = p;
        if p == 0.0 {
            break;
        }
    }
    p = start;
    for n in (0..mode).rev() {
        p *= (n + 1) as f64 / t;
        out[n] = p;
        if p == 0.0 {
            break;
        }
    }
    out
}

/// `P(X ≥ n)` for `X ~ Poisson(t)`, accurate for tiny tails.
pub fn poisson_upper_tail(t: f64, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if t == 0.0 {
        return 0.0;
    }
    if (n as f64) > t {
        let ln_fact = ln_factorials(n);
        let mut p = poisson_ln_pmf(n, t, &ln_fact).exp();
        let mut sum = 0.0;
        let mut k = n;
        while p > 0.0 && p > sum * 1e-18 {
            sum += p;
            k += 1;
            p *= t / k as f64;
        }
        sum
    } else {
        let lower: f64 = poisson_pmf_table(t, n).iter().sum();
        (1.0 - lower).max(0.0)
    }
}

/// Cumulative probabilities `P(X ≤ k)` for `k < len`, summed from below so
/// that small values (large `t`) keep full relative precision.
pub fn poisson_cdf_table(t: f64, len: usize) -> Vec<f64> {
    let pmf = poisson_pmf_table(t, len);
    let mut acc = 0.0;
    pmf.into_iter()
        .map(|p| {
            acc += p;
            acc.min(1.0)
        })
        .collect()
}

/// Probability that the amplifier with gain `kappa` maps `|n⟩` to a level
/// `≥ n + extra`, i.e. `P(L ≥ extra)` for `L ~ NegBin(n + 1, 1/κ)`.
pub fn amplifier_excess_tail(kappa: f64, n: usize, extra: usize) -> f64 {
    if kappa <= 1.0 {
        return if extra == 0 { 1.0 } else { 0.0 };
    }
    let r = 1.0 - 1.0 / kappa;
    // pmf(l) = C(n+l, l) κ^{-(n+1)} r^l ; pmf(l+1)/pmf(l) = r (n+l+1)/(l+1)
    let mut p = (-(n as f64 + 1.0) * kappa.ln()).exp();
    let mut below = 0.0;
    let mut l = 0usize;
    while l < extra {
        below += p;
        p *= r * (n + l + 1) as f64 / (l + 1) as f64;
        l += 1;
    }
    // Direct upper sum once past the mode keeps precision for tiny tails.
    let mode_passed = (l as f64) * (1.0 - r) >= r * (n as f64 + 1.0);
    if mode_passed {
        let mut sum = 0.0;
        let mut q = p;
        let mut k = l;
        while q > 0.0 && q > sum * 1e-18 {
            sum += q;
            q *= r * (n + k + 1) as f64 / (k + 1) as f64;
            k += 1;
        }
        sum
    } else {
        (1.0 - below).max(0.0)
    }
}

/// ln of the binomial coefficient C(n, k).
pub fn ln_binomial(n: usize, k: usize, ln_fact: &[f64]) -> f64 {
    ln_fact[n] - ln_fact[k] - ln_fact[n - k]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_table_sums_to_one() {
        for &t in &[0.0, 0.3, 5.0, 80.0] {
            let s: f64 = poisson_pmf_table(t, 400).iter().sum();
            assert!((s - 1.0).abs() < 1e-13, "t={t} sum={s}");
        }
    }

    #[test]
    fn upper_tail_matches_complement() {
        let t = 4.0;
        let pmf = poisson_pmf_table(t, 200);
        for n in [0usize, 1, 3, 8, 20] {
            let direct: f64 = pmf[n..].iter().sum();
            assert!((poisson_upper_tail(t, n) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn amplifier_tail_at_zero_extra_is_one() {
        assert!((amplifier_excess_tail(2.0, 3, 0) - 1.0).abs() < 1e-15);
        // vacuum input: geometric with ratio 1 - 1/κ
        let t = amplifier_excess_tail(2.0, 0, 5);
        assert!((t - 0.5_f64.powi(5)).abs() < 1e-15);
        let t = amplifier_excess_tail(4.0, 0, 40);
        assert!((t - 0.75_f64.powi(40)).abs() < 1e-18);
    }
}
