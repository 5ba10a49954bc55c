use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::CoherentAmplitude;
use crate::quadrature::{composite_legendre, gauss_laguerre, Rule};
use crate::special::poisson_cdf_table;
use crate::{CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureMode {
    /// Polar grid in `t = |z|²` and angle, single mode.
    Radial,
    /// Tensor Gauss–Legendre on the box `[−R, R]^{2M}`.
    Cartesian,
}

/// Nodes and weights for `∫ · d^{2M}z/π^M`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureScheme {
    mode: QuadratureMode,
    modes: usize,
    nodes: Vec<CoherentAmplitude>,
    weights: Vec<f64>,
    radius: f64,
}

/// Radial panel breakpoints on `[0, t_max]`: widths grow like `√t`, which
/// matches the spread of the Poisson weights `e^{−t}tⁿ/n!` near `t ≈ n`.
pub(crate) fn radial_breaks(t_max: f64, scale: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let mut t = 0.0;
    while t < t_max {
        let h = scale * (0.5 + 0.25 * t.sqrt());
        t = (t + h).min(t_max);
        if t_max - t < 0.25 * h {
            t = t_max;
        }
        breaks.push(t);
    }
    breaks
}

/// Smallest `T` with `Σ_n d_n P(Pois(T) ≤ n) ≤ mass`: the part of
/// `∫ Q d²z/π` lying outside `|z|² ≤ T` for populations `d_n`.
pub(crate) fn radial_extent(diag: &[f64], mass: f64) -> f64 {
    let outside = |t: f64| -> f64 {
        let cdf = poisson_cdf_table(t, diag.len());
        diag.iter().zip(&cdf).map(|(d, c)| d.max(0.0) * c).sum()
    };
    let mut hi = 8.0_f64.max(2.0 * diag.len() as f64);
    while outside(hi) > mass {
        hi *= 1.5;
    }
    let mut lo = 0.0;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if outside(mid) > mass {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi.max(1.0)
}

impl QuadratureScheme {
    /// Product of a radial rule in `t = |z|²` and `angular` equispaced
    /// angles. The measure `d²z/π` becomes `dt dθ/(2π)`.
    pub fn radial_from_rule(rule: &Rule, angular: usize) -> Result<Self> {
        if angular == 0 || rule.is_empty() {
            return Err(Error::domain(
                "radial scheme needs nodes in both directions",
            ));
        }
        if rule.nodes.iter().any(|&t| t < 0.0) {
            return Err(Error::domain("radial nodes must be nonnegative"));
        }
        let mut nodes = Vec::with_capacity(rule.len() * angular);
        let mut weights = Vec::with_capacity(rule.len() * angular);
        // stagger odd rings by half a step so near-origin nodes do not line up
        for (i, (&t, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            let offset = if i % 2 == 1 { 0.5 } else { 0.0 };
            for j in 0..angular {
                let theta = TAU * (j as f64 + offset) / angular as f64;
                nodes.push(CoherentAmplitude::from_polar(t.sqrt(), theta));
                weights.push(w / angular as f64);
            }
        }
        let radius = rule.nodes.iter().cloned().fold(0.0, f64::max).sqrt();
        Ok(Self {
            mode: QuadratureMode::Radial,
            modes: 1,
            nodes,
            weights,
            radius,
        })
    }

    /// Composite Gauss–Legendre in `t` on `[0, t_max]` (graded panels, given
    /// order per panel) times `angular` angles.
    pub fn radial(t_max: f64, order: usize, angular: usize) -> Result<Self> {
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::domain(format!(
                "radial extent {t_max} must be positive"
            )));
        }
        let rule = composite_legendre(&radial_breaks(t_max, 1.0), order);
        Self::radial_from_rule(&rule, angular)
    }

    /// Radial scheme sized for states living on the first `dim` levels:
    /// covers all but `1e−16` of any such state's Husimi mass and resolves
    /// angular harmonics up to `dim − 1`.
    pub fn radial_for_dim(dim: usize) -> Result<Self> {
        let mut top = vec![0.0; dim.max(1)];
        top[dim.max(1) - 1] = 1.0;
        let t_max = radial_extent(&top, 1e-16);
        let angular = (4 * dim).max(16).next_power_of_two();
        Self::radial(t_max, 12, angular)
    }

    /// Scheme exact for integrands `e^{−rate·|z|²} × polynomial(|z|²)` of
    /// degree `< 2·radial` and angular harmonics `< angular`: Gauss–Laguerre
    /// in `rate·t`. Its weights include the compensating `e^{rate·t}`, so
    /// it does not satisfy the plain Gaussian calibration identity unless
    /// `rate = 1`.
    pub fn gauss_laguerre(rate: f64, radial: usize, angular: usize) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(Error::domain("Laguerre rate must be positive"));
        }
        let base = gauss_laguerre(radial);
        let rule = Rule {
            nodes: base.nodes.iter().map(|x| x / rate).collect(),
            weights: base
                .nodes
                .iter()
                .zip(&base.weights)
                .map(|(x, w)| w * x.exp() / rate)
                .collect(),
        };
        Self::radial_from_rule(&rule, angular)
    }

    /// Tensor Gauss–Legendre with `per_axis` nodes on each of the `2M` real
    /// axes of `[−radius, radius]^{2M}`.
    pub fn cartesian(modes: usize, radius: f64, per_axis: usize) -> Result<Self> {
        if modes == 0 || modes > 2 {
            return Err(Error::domain(
                "Cartesian schemes are supported for 1 or 2 modes",
            ));
        }
        if !(radius > 0.0) || per_axis == 0 {
            return Err(Error::domain(
                "Cartesian scheme needs a positive radius and nodes",
            ));
        }
        // panels of width ≈ 3.4 with a high order beat many narrow panels here
        let panels = ((2.0 * radius / 3.4).ceil() as usize).max(1);
        let breaks: Vec<f64> = (0..=panels)
            .map(|i| -radius + 2.0 * radius * i as f64 / panels as f64)
            .collect();
        let order = per_axis.div_ceil(panels).max(2);
        let axis = composite_legendre(&breaks, order);
        let mut single_nodes = Vec::new();
        let mut single_weights = Vec::new();
        for (&x, &wx) in axis.nodes.iter().zip(&axis.weights) {
            for (&y, &wy) in axis.nodes.iter().zip(&axis.weights) {
                single_nodes.push(C64::new(x, y));
                single_weights.push(wx * wy / PI);
            }
        }
        let (nodes, weights) = if modes == 1 {
            (
                single_nodes
                    .into_iter()
                    .map(CoherentAmplitude::single)
                    .collect(),
                single_weights,
            )
        } else {
            let mut nodes = Vec::with_capacity(single_nodes.len().pow(2));
            let mut weights = Vec::with_capacity(single_nodes.len().pow(2));
            for (a, wa) in single_nodes.iter().zip(&single_weights) {
                for (b, wb) in single_nodes.iter().zip(&single_weights) {
                    nodes.push(CoherentAmplitude::new(vec![*a, *b])?);
                    weights.push(wa * wb);
                }
            }
            (nodes, weights)
        };
        Ok(Self {
            mode: QuadratureMode::Cartesian,
            modes,
            nodes,
            weights,
            radius,
        })
    }

    /// `M`-fold tensor power of a single-mode scheme.
    pub fn tensor_power(&self, modes: usize) -> Result<Self> {
        if self.modes != 1 || modes == 0 {
            return Err(Error::domain(
                "tensor powers start from a single-mode scheme",
            ));
        }
        let mut nodes: Vec<Vec<C64>> = vec![Vec::new()];
        let mut weights = vec![1.0];
        for _ in 0..modes {
            let mut nn = Vec::with_capacity(nodes.len() * self.len());
            let mut ww = Vec::with_capacity(nodes.len() * self.len());
            for (prefix, wp) in nodes.iter().zip(&weights) {
                for (z, w) in self.nodes.iter().zip(&self.weights) {
                    let mut v = prefix.clone();
                    v.push(z.components()[0]);
                    nn.push(v);
                    ww.push(wp * w);
                }
            }
            nodes = nn;
            weights = ww;
        }
        Ok(Self {
            mode: self.mode,
            modes,
            nodes: nodes
                .into_iter()
                .map(CoherentAmplitude::new)
                .collect::<Result<_>>()?,
            weights,
            radius: self.radius * (modes as f64).sqrt(),
        })
    }

    pub fn mode(&self) -> QuadratureMode {
        self.mode
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn nodes(&self) -> &[CoherentAmplitude] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(&CoherentAmplitude) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(z, w)| w * f(z))
            .sum()
    }

    /// `|Σ w_i e^{−|z_i|²} − 1|`: the vacuum's Husimi function must
    /// integrate to one.
    pub fn calibration_error(&self) -> f64 {
        (self.integrate(|z| (-z.norm_sqr()).exp()) - 1.0).abs()
    }

    /// Columns are the truncated coherent vectors `P|z_i⟩` (single mode).
    pub fn coherent_matrix(&self, dim: usize) -> Result<CMatrix> {
        if self.modes != 1 {
            return Err(Error::domain(
                "coherent matrices are built for single-mode schemes",
            ));
        }
        let mut v = CMatrix::zeros(dim, self.len());
        for (j, z) in self.nodes.iter().enumerate() {
            let amps = crate::fock::coherent_amplitudes(z.components()[0], dim);
            for (i, a) in amps.into_iter().enumerate() {
                v[(i, j)] = a;
            }
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_scheme_is_calibrated() {
        let s = QuadratureScheme::radial(40.0, 12, 16).unwrap();
        assert!(s.calibration_error() < 1e-10, "{}", s.calibration_error());
        assert!(s.weights().iter().all(|&w| w > 0.0));
        let s = QuadratureScheme::radial_for_dim(20).unwrap();
        assert!(s.calibration_error() < 1e-10);
    }

    #[test]
    fn cartesian_scheme_is_calibrated() {
        let s = QuadratureScheme::cartesian(1, 6.5, 70).unwrap();
        assert!(s.calibration_error() < 1e-10, "{}", s.calibration_error());
        let s2 = QuadratureScheme::cartesian(2, 5.0, 36).unwrap();
        assert!(s2.calibration_error() < 1e-10, "{}", s2.calibration_error());
    }

    #[test]
    fn laguerre_scheme_integrates_weighted_polynomials() {
        // ∫ e^{−3t} t⁴ dt = 4!/3⁵
        let s = QuadratureScheme::gauss_laguerre(3.0, 8, 4).unwrap();
        let v = s.integrate(|z| {
            let t = z.norm_sqr();
            (-3.0 * t).exp() * t.powi(4)
        });
        assert!((v - 24.0 / 243.0).abs() < 1e-13);
        let unit = QuadratureScheme::gauss_laguerre(1.0, 8, 4).unwrap();
        assert!(unit.calibration_error() < 1e-13);
    }

    #[test]
    fn tensor_power_matches_product_integral() {
        let s = QuadratureScheme::radial(40.0, 12, 8).unwrap();
        let s2 = s.tensor_power(2).unwrap();
        assert_eq!(s2.len(), s.len() * s.len());
        assert!(s2.calibration_error() < 1e-10);
    }

    #[test]
    fn extent_covers_requested_mass() {
        let t = radial_extent(&[0.0, 0.0, 1.0], 1e-12);
        let outside: f64 = poisson_cdf_table(t, 3)[2];
        assert!(outside <= 1e-12 && outside > 1e-14);
    }
}
