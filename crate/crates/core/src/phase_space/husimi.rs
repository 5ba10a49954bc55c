use std::fmt::Write as _;

use rayon::prelude::*;

use super::QuadratureScheme;
use crate::error::{Error, Result};
use crate::fock::{
    coherent_amplitudes, coherent_vector, CoherentAmplitude, DensityOperator, FockOperator,
};
use crate::special::poisson_upper_tail;
use crate::{CMatrix, CVector, C64};

/// Point values above this error bound are flagged.
pub const HUSIMI_WARNING_LEVEL: f64 = 1e-6;

/// `Q(z) = ⟨z|ρ|z⟩` together with a bound on its truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HusimiSample {
    pub value: f64,
    /// Bound on `|⟨z|ρ|z⟩ − ⟨z|PρP|z⟩|`, from whichever of the coherent tail
    /// and the state's tail is smaller (`2√m + m`).
    pub error: f64,
    /// `error` exceeds [`HUSIMI_WARNING_LEVEL`].
    pub warning: bool,
}

pub fn husimi_eval<O: FockOperator + ?Sized>(
    op: &O,
    z: &CoherentAmplitude,
) -> Result<HusimiSample> {
    // far out the coherent tail is useless as a bound, but the state's own
    // tail may still make the value exact
    let (amplitudes, tail) = match coherent_vector(z, op.cutoff()) {
        Ok(v) => (v.amplitudes, v.tail),
        Err(Error::Truncation(_)) => (node_vector(z, op.cutoff().dim()), 1.0),
        Err(e) => return Err(e),
    };
    let value = quadratic_form(op.matrix(), &amplitudes);
    let m = tail.min(op.tail_bound());
    let error = if m > 0.0 { 2.0 * m.sqrt() + m } else { 0.0 };
    Ok(HusimiSample {
        value,
        error,
        warning: error > HUSIMI_WARNING_LEVEL,
    })
}

#[inline]
pub(crate) fn quadratic_form(m: &CMatrix, v: &CVector) -> f64 {
    let mv = m * v;
    v.iter()
        .zip(mv.iter())
        .map(|(a, b)| (a.conj() * b).re)
        .sum()
}

/// Truncated coherent vector of a (possibly multimode) node, without the
/// tail check of [`coherent_vector`].
pub(crate) fn node_vector(z: &CoherentAmplitude, dim: usize) -> CVector {
    let mut acc: Option<CVector> = None;
    for &zi in z.components() {
        let v = CVector::from_vec(coherent_amplitudes(zi, dim));
        acc = Some(match acc {
            None => v,
            Some(a) => a.kronecker(&v),
        });
    }
    acc.expect("at least one mode")
}

/// Husimi values at every node of a scheme.
pub fn husimi_values<O: FockOperator + ?Sized + Sync>(
    op: &O,
    scheme: &QuadratureScheme,
) -> Result<Vec<f64>> {
    let cutoff = op.cutoff();
    if scheme.modes() != cutoff.modes() {
        return Err(Error::shape(format!(
            "{}-mode scheme for a {}-mode operator",
            scheme.modes(),
            cutoff.modes()
        )));
    }
    let m = op.matrix();
    if cutoff.modes() == 1 {
        let v = scheme.coherent_matrix(cutoff.dim())?;
        let mv = m * &v;
        return Ok((0..v.ncols())
            .map(|j| {
                v.column(j)
                    .iter()
                    .zip(mv.column(j).iter())
                    .map(|(a, b)| (a.conj() * b).re)
                    .sum()
            })
            .collect());
    }
    Ok(scheme
        .nodes()
        .par_iter()
        .map(|z| quadratic_form(m, &node_vector(z, cutoff.dim())))
        .collect())
}

/// Sampled Husimi function of a state on a fixed scheme.
#[derive(Debug, Clone)]
pub struct HusimiField {
    pub source: DensityOperator,
    pub scheme: QuadratureScheme,
    pub values: Vec<f64>,
}

impl HusimiField {
    pub fn sample(source: DensityOperator, scheme: QuadratureScheme) -> Result<Self> {
        let values = husimi_values(&source, &scheme)?;
        Ok(Self {
            source,
            scheme,
            values,
        })
    }

    /// `Σ w_i Q(z_i)`.
    pub fn normalization(&self) -> f64 {
        self.scheme
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, q)| w * q)
            .sum()
    }

    /// Smallest and largest sampled value.
    pub fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &q| {
                (lo.min(q), hi.max(q))
            })
    }

    /// Mass of the source state that the scheme's disc cannot see, as a
    /// normalisation tolerance: scheme calibration plus state tail plus the
    /// Poisson mass beyond the scheme radius.
    pub fn normalization_tolerance(&self) -> f64 {
        let r2 = self.scheme.radius().powi(2);
        let outside: f64 = self
            .source
            .matrix()
            .diagonal()
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let n = self.source.cutoff().photon_number(i);
                d.re.max(0.0) * (1.0 - poisson_upper_tail(r2, n + 1))
            })
            .sum();
        self.scheme.calibration_error() + self.source.tail_bound() + outside
    }

    /// Comma-separated table with one row per node: coordinates, weight, Q.
    pub fn to_csv(&self) -> String {
        let modes = self.scheme.modes();
        let mut out = String::new();
        let header: Vec<String> = if modes == 1 {
            vec!["z_re".into(), "z_im".into()]
        } else {
            (1..=modes)
                .flat_map(|i| [format!("z{i}_re"), format!("z{i}_im")])
                .collect()
        };
        let _ = writeln!(out, "{},weight,Q", header.join(","));
        for ((z, w), q) in self
            .scheme
            .nodes()
            .iter()
            .zip(self.scheme.weights())
            .zip(&self.values)
        {
            let coords: Vec<String> = z
                .components()
                .iter()
                .flat_map(|c: &C64| [format!("{:.9e}", c.re), format!("{:.9e}", c.im)])
                .collect();
            let _ = writeln!(out, "{},{w:.9e},{q:.9e}", coords.join(","));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{fock_state, thermal_state, vacuum, FockCutoff};

    #[test]
    fn point_values() {
        let c = FockCutoff::single(40).unwrap();
        let z = CoherentAmplitude::single(C64::new(0.6, -0.8));
        let v = husimi_eval(&vacuum(c), &z).unwrap();
        assert!((v.value - (-1.0f64).exp()).abs() < 1e-14);
        assert_eq!(v.error, 0.0);
        let origin = CoherentAmplitude::single(C64::new(0.0, 0.0));
        assert_eq!(husimi_eval(&vacuum(c), &origin).unwrap().value, 1.0);
        let w = thermal_state(0.5, c).unwrap();
        let q = husimi_eval(&w, &origin).unwrap();
        assert!((q.value - 0.5).abs() < 1e-15);
        let one = fock_state(1, c).unwrap();
        let q = husimi_eval(&one, &z).unwrap();
        assert!((q.value - (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn truncated_state_far_out_is_flagged() {
        let c = FockCutoff::single(10).unwrap();
        let w = thermal_state(0.9, c).unwrap();
        let far = CoherentAmplitude::single(C64::new(2.5, 0.0));
        let s = husimi_eval(&w, &far).unwrap();
        assert!(s.warning && s.error > 1e-6);
        let near = CoherentAmplitude::single(C64::new(0.1, 0.0));
        assert!(!husimi_eval(&w, &near).unwrap().warning);
    }

    #[test]
    fn field_normalization_and_csv() {
        let c = FockCutoff::single(60).unwrap();
        let w = thermal_state(0.5, c).unwrap();
        let scheme = QuadratureScheme::radial(90.0, 12, 8).unwrap();
        let field = HusimiField::sample(w, scheme).unwrap();
        assert!((field.normalization() - 1.0).abs() < 1e-8 + field.normalization_tolerance());
        let (lo, hi) = field.range();
        assert!(lo >= -1e-12 && hi <= 0.5 + 1e-12);
        let csv = field.to_csv();
        assert!(csv.starts_with("z_re,z_im,weight,Q\n"));
        assert_eq!(csv.lines().count(), field.values.len() + 1);
    }
}
