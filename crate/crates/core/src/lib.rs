//! Truncated Fock-space numerics for bosonic states, their Husimi Q
//! functions, Wehrl and von Neumann entropies, and the Gaussian
//! quantum-limited amplifier and attenuator.
//!
//! The crate is organised bottom-up:
//!
//! - [`fock`]: cutoffs, density operators, spectra, entropies, Schatten norms,
//!   coherent vectors and displacement matrices, and the scalar functions
//!   `g`, `g⁻¹` and the entropy bound `f(x) = ln(g⁻¹(x) + 1) + 1`.
//! - [`phase_space`]: quadrature over ℂ^M with measure d^{2M}z/π^M, Husimi
//!   evaluation, convex functionals of Q, Wehrl entropy and both
//!   Berezin–Lieb inequalities.
//! - [`channels`]: Kraus representations of the amplifier, the attenuator,
//!   the random-displacement channel and the measure-reprepare channel.
//! - [`theorem_lab`]: executable inequality checks that produce
//!   [`report::VerificationReport`]s.
//! - [`optimizer`]: extremality searches over unitary orbits and the thermal
//!   family.
//!
//! Every state carries a certified `tail_bound`: the probability mass of the
//! ideal (infinite-dimensional) state that the truncation dropped.

// `!(x >= a)` rejects NaN along with small values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channels;
pub mod convex;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod optimizer;
pub mod phase_space;
pub mod quadrature;
pub mod report;
pub mod sampling;
pub mod special;
pub mod theorem_lab;

pub use channels::{ChannelKind, ChannelSpec, KrausChannel, KrausOperator};
pub use convex::ConvexFn;
pub use error::{Error, Result};
pub use fock::{
    BoundedOperator, CoherentAmplitude, DensityOperator, FockCutoff, FockOperator, Spectrum,
};
pub use num_complex::Complex64 as C64;
pub use phase_space::{Integral, IntegrationOptions, QuadratureMode, QuadratureScheme};
pub use report::{CheckKind, VerificationReport};

/// Dense complex matrix used for every operator in the crate.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
