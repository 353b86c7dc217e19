//! Numerical laboratory for circle-valued maps with topological singularities.
//!
//! The crate builds S¹-valued maps on planar disks (vortices, vortex-type maps
//! `φ(x/|x|)`, products of vortex powers, symmetric junctions), the explicit
//! Lipschitz recovery sequences that approximate them, and the quadrature
//! needed to check graph areas, Jacobian masses and strict-BV convergence
//! against closed-form relaxed values.
//!
//! Module map:
//! - [`field`]: structured grids, sampled fields, finite-difference gradients, quadrature, file IO.
//! - [`circle`]: circle maps, liftings, degree, variation, homotopies.
//! - [`maps`]: closed-form S¹-valued maps on disks.
//! - [`jacobian`]: pointwise and distributional Jacobians, defect detection, degree by preimages.
//! - [`area`]: graph area of sampled fields and the closed-form relaxed targets.
//! - [`recovery`]: recovery-sequence members with region-aligned quadrature.
//! - [`convergence`]: strict-BV metrics, circle inheritance and convergence studies.
//! - [`config`], [`report`]: run configuration and deterministic report writers.

pub mod area;
pub mod circle;
pub mod config;
pub mod convergence;
pub mod error;
pub mod field;
pub mod jacobian;
pub mod maps;
pub mod numerics;
pub mod recovery;
pub mod report;

pub use error::{Error, Result};

/// Points and vector values in the plane.
pub type Vec2 = nalgebra::Vector2<f64>;

/// Jacobian matrices, `m[(i, j)] = ∂v_i/∂x_j`.
pub type Mat2 = nalgebra::Matrix2<f64>;

/// Crate version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
