//! Quadrature rules and the few special functions not covered by `statrs`.

mod bessel;
mod quadrature;

pub use bessel::{bessel_i0e, bessel_i1e};
pub use quadrature::{gauss_legendre, gk15, integrate_adaptive, integrate_half_line, Integral};
