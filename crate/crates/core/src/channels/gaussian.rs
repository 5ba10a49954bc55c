use super::{ChannelKind, KrausChannel, KrausOperator};
use crate::error::{Error, Result};
use crate::fock::FockCutoff;
use crate::special::{amplifier_excess_tail, ln_binomial, ln_factorials};
use crate::C64;

/// Kraus operators whose total weight `Tr K†K` is below this are dropped.
const DROP_WEIGHT: f64 = 1e-14;

/// Mass the amplifier may push above its default output cutoff, per input level.
const AMPLIFIER_LOSS: f64 = 1e-12;

/// `k ln x` with `0 · ln 0 = 0`.
fn ln_pow(x: f64, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        k as f64 * x.ln()
    }
}

/// Default output cutoff of the amplifier: at least `⌈κ·d⌉ + 8`, enlarged
/// until every input level `n < d` loses at most `1e−12` above it (the
/// level shift is negative binomial, so `⌈κ·d⌉ + 8` alone is not enough at
/// large κ).
pub fn amplifier_output_dim(kappa: f64, in_dim: usize) -> usize {
    if kappa == 1.0 {
        return in_dim;
    }
    let mut out = (kappa * in_dim as f64).ceil() as usize + 8;
    let top = in_dim - 1;
    while amplifier_excess_tail(kappa, top, out - top) > AMPLIFIER_LOSS {
        out += 1 + out / 16;
    }
    out
}

/// Quantum-limited amplifier of gain κ with the default output cutoff.
pub fn amplifier(kappa: f64, in_cutoff: FockCutoff) -> Result<KrausChannel> {
    let out = FockCutoff::new(
        amplifier_output_dim(kappa.max(1.0), in_cutoff.dim()),
        in_cutoff.modes(),
    )?;
    amplifier_between(kappa, in_cutoff, out)
}

/// Amplifier with explicit cutoffs. `⟨n+l|K_l|n⟩ =
/// √C(n+l, l) κ^{−(n+1)/2} ((κ−1)/κ)^{l/2}`; the compressed output is exact,
/// whatever the output cutoff.
pub fn amplifier_between(
    kappa: f64,
    in_cutoff: FockCutoff,
    out_cutoff: FockCutoff,
) -> Result<KrausChannel> {
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(Error::domain(format!(
            "amplifier gain κ = {kappa} must be ≥ 1"
        )));
    }
    if in_cutoff.modes() != out_cutoff.modes() {
        return Err(Error::shape(
            "input and output cutoffs have different mode counts",
        ));
    }
    let (d, big) = (in_cutoff.dim(), out_cutoff.dim());
    let ln_fact = ln_factorials(d + big);
    let ln_k = kappa.ln();
    let ln_gain = if kappa == 1.0 {
        f64::NEG_INFINITY
    } else {
        (1.0 - 1.0 / kappa).ln()
    };
    let mut kraus = Vec::new();
    for l in 0..big {
        let entries: Vec<(usize, usize, C64)> = (0..d)
            .filter(|n| n + l < big)
            .filter_map(|n| {
                let ln_gain_l = if l == 0 { 0.0 } else { l as f64 * ln_gain };
                let ln_v =
                    0.5 * (ln_binomial(n + l, l, &ln_fact) - (n + 1) as f64 * ln_k + ln_gain_l);
                let v = ln_v.exp();
                (v > 0.0).then_some((n + l, n, C64::new(v, 0.0)))
            })
            .collect();
        let weight: f64 = entries.iter().map(|e| e.2.norm_sqr()).sum();
        if entries.is_empty() || weight < DROP_WEIGHT {
            continue;
        }
        kraus.push(KrausOperator::Sparse {
            rows: big,
            cols: d,
            entries,
        });
    }
    let single_in = FockCutoff::single(d)?;
    let single_out = FockCutoff::single(big)?;
    let ch = KrausChannel::from_parts(
        ChannelKind::Amplifier,
        kappa,
        single_in,
        single_out,
        kraus,
        0.0,
    )?;
    if in_cutoff.modes() == 1 {
        Ok(ch)
    } else {
        ch.tensor_power(in_cutoff.modes())
    }
}

/// Pure-loss channel of transmissivity λ:
/// `⟨n−l|B_l|n⟩ = √(C(n, l) λ^{n−l} (1−λ)^l)`.
pub fn attenuator(lambda: f64, in_cutoff: FockCutoff) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain(format!(
            "transmissivity λ = {lambda} not in [0, 1]"
        )));
    }
    let d = in_cutoff.dim();
    let ln_fact = ln_factorials(d);
    let mut kraus = Vec::new();
    for l in 0..d {
        let entries: Vec<(usize, usize, C64)> = (l..d)
            .filter_map(|n| {
                let ln_v = 0.5
                    * (ln_binomial(n, l, &ln_fact)
                        + ln_pow(lambda, n - l)
                        + ln_pow(1.0 - lambda, l));
                let v = ln_v.exp();
                (v > 0.0).then_some((n - l, n, C64::new(v, 0.0)))
            })
            .collect();
        let weight: f64 = entries.iter().map(|e| e.2.norm_sqr()).sum();
        if entries.is_empty() || weight < DROP_WEIGHT {
            continue;
        }
        kraus.push(KrausOperator::Sparse {
            rows: d,
            cols: d,
            entries,
        });
    }
    let single = FockCutoff::single(d)?;
    let ch = KrausChannel::from_parts(ChannelKind::Attenuator, lambda, single, single, kraus, 0.0)?;
    if in_cutoff.modes() == 1 {
        Ok(ch)
    } else {
        ch.tensor_power(in_cutoff.modes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fock_state, thermal_state, vacuum};
    use crate::CMatrix;

    #[test]
    fn unit_gain_and_full_transmission_are_identities() {
        let c = FockCutoff::single(7).unwrap();
        let rho = thermal_state(0.4, c).unwrap();
        let a = amplifier(1.0, c).unwrap();
        assert_eq!(a.kraus().len(), 1);
        assert_eq!(a.apply(&rho).unwrap().matrix(), rho.matrix());
        let e = attenuator(1.0, c).unwrap();
        assert_eq!(e.kraus().len(), 1);
        assert_eq!(e.apply(&rho).unwrap().matrix(), rho.matrix());
    }

    #[test]
    fn full_loss_maps_to_vacuum() {
        let c = FockCutoff::single(6).unwrap();
        let e = attenuator(0.0, c).unwrap();
        let out = e.apply(&fock_state(4, c).unwrap()).unwrap();
        assert!((out.matrix() - vacuum(c).matrix()).norm() < 1e-15);
    }

    #[test]
    fn single_photon_loss() {
        let c = FockCutoff::single(4).unwrap();
        let out = attenuator(0.5, c)
            .unwrap()
            .apply(&fock_state(1, c).unwrap())
            .unwrap();
        assert!((out.matrix()[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((out.matrix()[(1, 1)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn amplified_vacuum_is_thermal() {
        let c = FockCutoff::single(3).unwrap();
        let a = amplifier(2.0, c).unwrap();
        let out = a.apply(&vacuum(c)).unwrap();
        for n in 0..10 {
            assert!((out.matrix()[(n, n)].re - 0.5f64.powi(n as i32 + 1)).abs() < 1e-15);
        }
        assert!(out.tail_bound() < 1e-12);
        assert!(a.trace_defect() < 1e-11);
    }

    #[test]
    fn output_cutoff_grows_past_the_linear_rule() {
        assert!(amplifier_output_dim(2.0, 10) >= 28);
        let d = amplifier_output_dim(32.0, 4);
        assert!(d > 32 * 4 + 8);
        assert!(amplifier_excess_tail(32.0, 3, d - 3) <= 1e-12);
    }

    #[test]
    fn both_channels_are_trace_preserving() {
        let c = FockCutoff::single(10).unwrap();
        assert!(amplifier(3.0, c).unwrap().trace_defect() < 1e-11);
        assert!(attenuator(0.3, c).unwrap().trace_defect() < 1e-13);
        let g = attenuator(0.3, c).unwrap().gram();
        assert!((g - CMatrix::identity(10, 10)).norm() < 1e-13);
    }

    #[test]
    fn domain_errors() {
        let c = FockCutoff::single(4).unwrap();
        assert!(amplifier(0.5, c).is_err());
        assert!(attenuator(1.5, c).is_err());
        assert!(attenuator(-0.1, c).is_err());
    }
}
