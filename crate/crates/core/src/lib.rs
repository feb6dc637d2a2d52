//! Enhanced dissipation of a shear-stretched vortex blob.
//!
//! The 3D Navier-Stokes flow `(u^L(t, x2), 0, u^S(t, x1, x2))` on the unit
//! torus reduces to a 1D heat equation for the shear `u^L` and a passively
//! advected, diffusing scalar `u^S`. This crate builds the explicit initial
//! data, integrates the reduced system and the comparison heat flow for
//! viscosities `nu = 2^(-2n)`, and measures the dissipation integrals
//! `nu * int_0^{t*} |grad u|^2 dt` over the horizon `t* = nu^(2 alpha / 3)`.
//!
//! The numerics are generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar to `f64`, which all documented tolerances assume.

pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod profiles;
pub mod quadrature;
pub mod real;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use real::Real;

pub type Triangle = profiles::MollifiedTriangle<f64>;
pub type Bump = profiles::BumpProfile<f64>;
