use super::{CoherentAmplitude, FockCutoff};
use crate::error::{Error, Result};
use crate::special::{ln_factorials, poisson_upper_tail};
use crate::{CMatrix, CVector, C64};

/// Truncated coherent vector and the norm² it is missing.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentVector {
    pub amplitudes: CVector,
    /// `1 − ‖P|z⟩‖²`, the Poisson mass above the cutoff.
    pub tail: f64,
}

/// Single-mode amplitudes `e^{−|z|²/2} zⁿ/√n!` for `n < len`, in log form so
/// that large `|z|` does not underflow the prefactor.
pub(crate) fn coherent_amplitudes(z: C64, len: usize) -> Vec<C64> {
    let t = z.norm_sqr();
    if t == 0.0 {
        let mut v = vec![C64::new(0.0, 0.0); len];
        if len > 0 {
            v[0] = C64::new(1.0, 0.0);
        }
        return v;
    }
    let ln_fact = ln_factorials(len.max(1));
    let ln_r = z.norm().ln();
    let phase = z.arg();
    (0..len)
        .map(|n| {
            let ln_mag = -0.5 * t + n as f64 * ln_r - 0.5 * ln_fact[n];
            C64::from_polar(ln_mag.exp(), n as f64 * phase)
        })
        .collect()
}

/// `P|z⟩` on the cutoff, with the tail reported. Fails when more than half
/// of the norm lies above the cutoff.
pub fn coherent_vector(z: &CoherentAmplitude, cutoff: FockCutoff) -> Result<CoherentVector> {
    if z.modes() != cutoff.modes() {
        return Err(Error::shape(format!(
            "{}-mode point on a {}-mode cutoff",
            z.modes(),
            cutoff.modes()
        )));
    }
    let dim = cutoff.dim();
    let mut kept = 1.0_f64;
    let mut ln_kept = 0.0_f64;
    let mut vec: Option<CVector> = None;
    for &zi in z.components() {
        let tail_i = poisson_upper_tail(zi.norm_sqr(), dim);
        kept *= 1.0 - tail_i;
        ln_kept += (-tail_i).ln_1p();
        let v = CVector::from_vec(coherent_amplitudes(zi, dim));
        vec = Some(match vec {
            None => v,
            Some(acc) => acc.kronecker(&v),
        });
    }
    let tail = if z.modes() == 1 {
        poisson_upper_tail(z.norm_sqr(), dim)
    } else {
        -ln_kept.exp_m1()
    };
    if tail > 0.5 || kept < 0.5 {
        return Err(Error::Truncation(format!(
            "coherent state at |z|² = {:.3} loses {tail:.3} of its norm at cutoff {dim}",
            z.norm_sqr()
        )));
    }
    Ok(CoherentVector {
        amplitudes: vec.expect("at least one mode"),
        tail,
    })
}

/// Rows `< rows`, columns `< cols` of the single-mode displacement operator
/// `D(z)`. Column `n` is `D(z)|n⟩ = (a† − z̄)ⁿ|z⟩/√n!`; the raising operator
/// only reads lower rows, so every returned entry is exact.
pub fn displacement_block(z: C64, rows: usize, cols: usize) -> CMatrix {
    let mut out = CMatrix::zeros(rows, cols);
    if cols == 0 || rows == 0 {
        return out;
    }
    let mut col: Vec<C64> = coherent_amplitudes(z, rows);
    let zc = z.conj();
    let sqrt: Vec<f64> = (0..rows.max(cols) + 1).map(|k| (k as f64).sqrt()).collect();
    for n in 0..cols {
        for (m, v) in col.iter().enumerate() {
            out[(m, n)] = *v;
        }
        if n + 1 == cols {
            break;
        }
        let mut next = vec![C64::new(0.0, 0.0); rows];
        for m in 0..rows {
            let raised = if m > 0 {
                col[m - 1] * sqrt[m]
            } else {
                C64::new(0.0, 0.0)
            };
            next[m] = (raised - zc * col[m]) / sqrt[n + 1];
        }
        col = next;
    }
    out
}

/// Truncated matrix of `D(z)` on the cutoff (tensor product across modes).
pub fn displacement_matrix(z: &CoherentAmplitude, cutoff: FockCutoff) -> Result<CMatrix> {
    if z.modes() != cutoff.modes() {
        return Err(Error::shape(
            "displacement amplitude and cutoff disagree on modes",
        ));
    }
    let dim = cutoff.dim();
    let mut acc: Option<CMatrix> = None;
    for &zi in z.components() {
        let block = displacement_block(zi, dim, dim);
        acc = Some(match acc {
            None => block,
            Some(m) => m.kronecker(&block),
        });
    }
    Ok(acc.expect("at least one mode"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_vector() {
        let c = FockCutoff::single(6).unwrap();
        let v = coherent_vector(&CoherentAmplitude::single(C64::new(0.0, 0.0)), c).unwrap();
        assert_eq!(v.amplitudes[0], C64::new(1.0, 0.0));
        assert!(v.amplitudes.iter().skip(1).all(|x| x.norm() == 0.0));
        assert_eq!(v.tail, 0.0);
    }

    #[test]
    fn overlap_matches_closed_form() {
        let c = FockCutoff::single(60).unwrap();
        let z = C64::new(0.7, -0.4);
        let w = C64::new(-0.2, 0.9);
        let vz = coherent_vector(&CoherentAmplitude::single(z), c).unwrap();
        let vw = coherent_vector(&CoherentAmplitude::single(w), c).unwrap();
        let overlap = vz.amplitudes.dotc(&vw.amplitudes);
        let exact = (z.conj() * w - 0.5 * (z.norm_sqr() + w.norm_sqr())).exp();
        assert!((overlap - exact).norm() < 1e-13);
        let one = coherent_vector(&CoherentAmplitude::single(C64::new(1.0, 0.0)), c).unwrap();
        let vac = coherent_vector(&CoherentAmplitude::single(C64::new(0.0, 0.0)), c).unwrap();
        let p = one.amplitudes.dotc(&vac.amplitudes).norm_sqr();
        assert!((p - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn too_large_amplitude_is_a_truncation_error() {
        let c = FockCutoff::single(4).unwrap();
        let err = coherent_vector(&CoherentAmplitude::single(C64::new(3.0, 0.0)), c);
        assert!(matches!(err, Err(Error::Truncation(_))));
    }

    #[test]
    fn displacement_of_vacuum_is_coherent() {
        let c = FockCutoff::single(32).unwrap();
        let z = CoherentAmplitude::single(C64::new(0.5, 0.0));
        let d = displacement_matrix(&z, c).unwrap();
        let v = coherent_vector(&z, c).unwrap();
        for m in 0..32 {
            assert!((d[(m, 0)] - v.amplitudes[m]).norm() < 1e-14);
        }
        let id = displacement_matrix(&CoherentAmplitude::single(C64::new(0.0, 0.0)), c).unwrap();
        assert!((id - CMatrix::identity(32, 32)).norm() < 1e-15);
    }

    #[test]
    fn displacement_is_unitary_on_low_levels() {
        let z = C64::new(0.8, 0.6);
        let d = displacement_block(z, 80, 10);
        let gram = d.adjoint() * &d;
        assert!((gram - CMatrix::identity(10, 10)).norm() < 1e-12);
    }

    #[test]
    fn displacement_phase_on_coherent_states() {
        // ⟨z + w| D(z) |w⟩ = e^{(w̄ z − z̄ w)/2} has unit modulus
        let c = FockCutoff::single(48).unwrap();
        let z = C64::new(0.4, 0.3);
        let w = C64::new(-0.5, 0.2);
        let d = displacement_matrix(&CoherentAmplitude::single(z), c).unwrap();
        let vw = coherent_vector(&CoherentAmplitude::single(w), c).unwrap();
        let vzw = coherent_vector(&CoherentAmplitude::single(z + w), c).unwrap();
        let amp = vzw.amplitudes.dotc(&(&d * &vw.amplitudes));
        let expected = ((w.conj() * z - z.conj() * w) * 0.5).exp();
        assert!((amp - expected).norm() < 1e-12);
        assert!((amp.norm() - 1.0).abs() < 1e-12);
    }
}
