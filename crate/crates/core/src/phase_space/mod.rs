//! Phase-space integrals over ℂ^M with the measure `d^{2M}z/π^M`.

mod berezin;
mod functional;
mod husimi;
mod scheme;

pub use berezin::{
    berezin_lieb_lower_check, berezin_lieb_upper_check, coherent_smoothing, UpperCheckGrid,
};
pub use functional::{
    convex_functional, convex_functionals, estimate_functionals, husimi_q_norm, husimi_q_norm_with,
    power_fn, wehrl_entropy, wehrl_entropy_with, Integral, IntegrationOptions,
};
pub use husimi::{husimi_eval, husimi_values, HusimiField, HusimiSample, HUSIMI_WARNING_LEVEL};
pub use scheme::{QuadratureMode, QuadratureScheme};

pub(crate) use functional::q_root;
pub(crate) use scheme::{radial_breaks, radial_extent};
