//! Exact conjugates of `f = r + I_P` where `r = ξ₁²/ξ₂ + ξ₀` is a bivariate
//! rational form and `P` a convex polygon.
//!
//! The domain of `f*` splits into parabolic regions (translated normal
//! cones, regions swept by edge normals along the gradient parabola, and
//! the region of the apex vertex where `ξ₁ = ξ₂ = 0`). On each region `f*`
//! is linear, quadratic, or of the form `ψ₁/(ζ₀₀√ψ½) + ψ₀`.

pub mod cli;
pub mod conjugate;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod subdiff;
pub mod symbolic;

pub use error::{Error, Result};
