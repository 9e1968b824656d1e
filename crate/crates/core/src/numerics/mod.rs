//! Special functions, branch-aware roots and quadrature.

pub mod airy;
pub mod branch;
pub mod gamma;
pub mod ode;
pub mod pcf;
pub mod quad;

pub use airy::{airy_ai, airy_ai_prime, airy_pair};
pub use branch::{chi, sqrt_cut};
pub use gamma::gamma_complex;
pub use pcf::{parabolic_cylinder_d, parabolic_cylinder_scaled, ExpScaled};
pub use quad::{
    integrate_cut, integrate_with_breaks, integrate_with_offsets, EndpointSingularity,
    QuadratureSpec,
};
