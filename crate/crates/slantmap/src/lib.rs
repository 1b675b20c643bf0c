//! Riemannian maps from Riemannian manifolds into Kenmotsu manifolds.
//!
//! The crate builds adapted frames for a Riemannian map at a point, measures
//! the slant angles of the almost-contact operator on the image of the
//! differential, and evaluates curvature inequalities (Chen-Ricci, DDVV and
//! Casorati type) together with the algebraic identities behind them.
//!
//! Numerical code is generic over [`Real`] (implemented for `f32` and `f64`);
//! the aliases below fix the scalar to `f64`, which is what the reports and
//! the command-line driver use.

// Negated comparisons are how NaN residuals fail their checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod descriptor;
pub mod error;
pub mod falsify;
pub mod fixtures;
pub mod frame;
pub mod gallery;
pub mod geometry;
pub mod inequalities;
pub mod kenmotsu;
pub mod linalg;
pub mod map;
pub mod report;
pub mod scalar;
pub mod slant;
pub mod tolerance;

pub use error::Error;
pub use scalar::Real;
pub use tolerance::Tolerances;

pub type Vector64 = linalg::Vector<f64>;
pub type Matrix64 = linalg::Matrix<f64>;
pub type Vector32 = linalg::Vector<f32>;
pub type Matrix32 = linalg::Matrix<f32>;
pub type Metric64 = frame::Metric<f64>;
pub type OrthonormalFrame64 = frame::OrthonormalFrame<f64>;
pub type AlmostContactStructure64 = kenmotsu::AlmostContactStructure<f64>;
pub type PointStructure64 = kenmotsu::PointStructure<f64>;
pub type MapInstance64 = map::RiemannianMapInstance<f64>;
pub type SffTensor64 = inequalities::SffTensor<f64>;
pub type BiSlantProfile64 = inequalities::BiSlantProfile<f64>;
pub type InequalityReport64 = report::InequalityReport<f64>;
