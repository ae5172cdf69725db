//! Numerical laboratory for drifting Laplacians `Δ_f = Δ - ∇f·∇` on
//! rotationally symmetric weighted manifolds and their collapsing warped
//! products `M × S^q`.
//!
//! Models are radial, so curvature, volumes and the operator reduce to
//! one-dimensional closed forms and Sturm–Liouville problems. Each module
//! pairs a computation with a verifier that returns a [`report::BoundReport`].

pub mod bundle;
pub mod catalog;
pub mod config;
pub mod error;
pub mod geometry;
pub mod heat;
pub mod model;
pub mod operator;
pub mod probe;
pub mod quadrature;
pub mod report;
pub mod spline;
pub mod suites;

pub use error::{Error, Result};
pub use model::{Boundary, RadialWarp, WarpedProductModel, Weight, WeightedModel};
