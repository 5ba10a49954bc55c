//! Kraus representations of the bosonic channels.
//!
//! Every channel maps operators on `in_cutoff` to operators on `out_cutoff`.
//! The amplifier and attenuator only move weight between Fock levels in one
//! direction, so with the default output cutoffs the compressed output
//! depends only on the compressed input and no entry is approximate; the
//! only loss is the (reported) mass pushed above the output cutoff.

mod gaussian;
mod kraus;
mod phase;

pub use gaussian::{amplifier, amplifier_between, amplifier_output_dim, attenuator};
pub use kraus::KrausOperator;
pub use phase::{
    measure_reprepare, measure_reprepare_with, phase_scheme, random_displacement,
    random_displacement_with,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{DensityOperator, FockCutoff};
use crate::linalg;
use crate::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Amplifier,
    Attenuator,
    RandomDisplacement,
    MeasureReprepare,
}

impl std::str::FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "amplifier" => Ok(ChannelKind::Amplifier),
            "attenuator" => Ok(ChannelKind::Attenuator),
            "random_displacement" => Ok(ChannelKind::RandomDisplacement),
            "measure_reprepare" => Ok(ChannelKind::MeasureReprepare),
            other => Err(Error::Parse(format!("unknown channel kind `{other}`"))),
        }
    }
}

/// A channel as a list of Kraus operators between two cutoffs.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    kind: ChannelKind,
    parameter: f64,
    in_cutoff: FockCutoff,
    out_cutoff: FockCutoff,
    kraus: Vec<KrausOperator>,
    /// Error of the phase-space discretisation (zero for exact Kraus forms).
    quadrature_error: f64,
}

impl KrausChannel {
    pub(crate) fn from_parts(
        kind: ChannelKind,
        parameter: f64,
        in_cutoff: FockCutoff,
        out_cutoff: FockCutoff,
        kraus: Vec<KrausOperator>,
        quadrature_error: f64,
    ) -> Result<Self> {
        if in_cutoff.modes() != out_cutoff.modes() {
            return Err(Error::shape(
                "input and output cutoffs have different mode counts",
            ));
        }
        kraus::check_shapes(&kraus, out_cutoff.total_dim(), in_cutoff.total_dim())?;
        Ok(Self {
            kind,
            parameter,
            in_cutoff,
            out_cutoff,
            kraus,
            quadrature_error,
        })
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    /// κ for the amplifier and the phase-space channels, λ for the attenuator.
    pub fn parameter(&self) -> f64 {
        self.parameter
    }

    pub fn in_cutoff(&self) -> FockCutoff {
        self.in_cutoff
    }

    pub fn out_cutoff(&self) -> FockCutoff {
        self.out_cutoff
    }

    pub fn kraus(&self) -> &[KrausOperator] {
        &self.kraus
    }

    pub fn quadrature_error(&self) -> f64 {
        self.quadrature_error
    }

    /// `Σ K ρ K†` for a raw matrix on the input space.
    pub fn apply_matrix(&self, m: &CMatrix) -> Result<CMatrix> {
        let n = self.in_cutoff.total_dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::shape(format!(
                "operator is {}×{}, channel input is {n}×{n}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(kraus::sum_conjugations(
            &self.kraus,
            m,
            self.out_cutoff.total_dim(),
        ))
    }

    /// Output state on `out_cutoff`. The trace that leaves the output
    /// cutoff is added to the input's tail bound.
    pub fn apply(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        if rho.cutoff() != self.in_cutoff {
            return Err(Error::shape(format!(
                "state on {:?} does not match channel input {:?}",
                rho.cutoff(),
                self.in_cutoff
            )));
        }
        let out = linalg::hermitize(&self.apply_matrix(rho.matrix())?);
        let lost = (rho.trace() - out.trace().re).max(0.0);
        Ok(DensityOperator::from_parts(
            self.out_cutoff,
            out,
            rho.tail_bound() + lost,
        ))
    }

    /// Heisenberg picture `Σ K† X K`, `X` on the output space.
    pub fn dual_apply(&self, x: &CMatrix) -> Result<CMatrix> {
        let n = self.out_cutoff.total_dim();
        if x.nrows() != n || x.ncols() != n {
            return Err(Error::shape(format!(
                "operator is {}×{}, channel output is {n}×{n}",
                x.nrows(),
                x.ncols()
            )));
        }
        Ok(kraus::sum_dual_conjugations(
            &self.kraus,
            x,
            self.in_cutoff.total_dim(),
        ))
    }

    /// `Σ K†K`.
    pub fn gram(&self) -> CMatrix {
        kraus::gram(&self.kraus, self.in_cutoff.total_dim())
    }

    /// Largest entry of `Σ K†K − I` on the first `levels` input levels
    /// (per mode).
    pub fn trace_defect_on(&self, levels: usize) -> f64 {
        let g = self.gram();
        let c = self.in_cutoff;
        let keep: Vec<usize> = (0..c.total_dim())
            .filter(|&i| c.multi_index(i).iter().all(|&n| n < levels))
            .collect();
        let mut worst = 0.0_f64;
        for &i in &keep {
            for &j in &keep {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)].re - target).abs().max(g[(i, j)].im.abs()));
            }
        }
        worst
    }

    /// Largest entry of `Σ K†K − I` on the whole input space.
    pub fn trace_defect(&self) -> f64 {
        self.trace_defect_on(self.in_cutoff.dim())
    }

    /// `Φ^{⊗modes}` of a single-mode channel.
    pub fn tensor_power(&self, modes: usize) -> Result<Self> {
        if self.in_cutoff.modes() != 1 {
            return Err(Error::domain(
                "tensor powers start from a single-mode channel",
            ));
        }
        if modes == 0 {
            return Err(Error::domain("tensor power needs at least one mode"));
        }
        let in_cutoff = FockCutoff::new(self.in_cutoff.dim(), modes)?;
        let out_cutoff = FockCutoff::new(self.out_cutoff.dim(), modes)?;
        let mut ops = self.kraus.clone();
        for _ in 1..modes {
            let mut next = Vec::with_capacity(ops.len() * self.kraus.len());
            for a in &ops {
                for b in &self.kraus {
                    next.push(a.kron(b));
                }
            }
            ops = next;
        }
        Self::from_parts(
            self.kind,
            self.parameter,
            in_cutoff,
            out_cutoff,
            ops,
            self.quadrature_error * modes as f64,
        )
    }

    pub fn spec(&self) -> ChannelSpec {
        ChannelSpec {
            kind: self.kind,
            parameter: self.parameter,
            modes: self.in_cutoff.modes(),
            in_dim: self.in_cutoff.dim(),
            out_dim: self.out_cutoff.dim(),
        }
    }
}

/// Serialisable description of a channel; Kraus operators are rebuilt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    pub parameter: f64,
    pub modes: usize,
    pub in_dim: usize,
    pub out_dim: usize,
}

impl ChannelSpec {
    pub fn build(&self) -> Result<KrausChannel> {
        let input = FockCutoff::single(self.in_dim)?;
        let output = FockCutoff::single(self.out_dim)?;
        let single = match self.kind {
            ChannelKind::Amplifier => amplifier_between(self.parameter, input, output)?,
            ChannelKind::Attenuator => {
                if self.in_dim != self.out_dim {
                    return Err(Error::shape("the attenuator keeps its cutoff"));
                }
                attenuator(self.parameter, input)?
            }
            ChannelKind::RandomDisplacement => random_displacement(self.parameter, input, output)?,
            ChannelKind::MeasureReprepare => measure_reprepare(self.parameter, input, output)?,
        };
        if self.modes == 1 {
            Ok(single)
        } else {
            single.tensor_power(self.modes)
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("channel specs always serialise")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
