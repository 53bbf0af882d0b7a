//! Numerical laboratory for conformal-geometric knot functionals.
//!
//! The crate provides four layers, bottom to top:
//!
//! - [`curves`]: closed space curves as finite Fourier series with exact
//!   derivatives and Frenet data (curvature, torsion, `dκ/ds`).
//! - [`moebius`]: Möbius transformations of ℝ³ ∪ {∞} as chains of
//!   primitives (translation, scaling, orthogonal map, sphere inversion),
//!   with analytic conformal factors and pushforwards.
//! - [`transport`] and [`gaussforms`]: the two 1-form kernels a tangent
//!   vector generates — the conformally invariant transport kernel and the
//!   Gauss linking kernel — plus their knot-averaged fields.
//! - [`integrals`]: configuration-space integrals over K³ × ℝ³ and K⁴
//!   (`GI_X`, `GI_Y`, the Y-energies) driven by a deterministic,
//!   block-parallel Monte-Carlo engine with importance sampling.
//!
//! All estimators are bit-reproducible for a fixed seed regardless of the
//! number of worker threads.

pub mod curves;
pub mod error;
pub mod gaussforms;
pub mod integrals;
pub mod moebius;
pub mod quadrature;
pub mod transport;

pub use error::Error;

/// Points and vectors in ℝ³.
pub type Vec3 = nalgebra::Vector3<f64>;
/// 3×3 real matrices (Jacobians, orthogonal maps).
pub type Mat3 = nalgebra::Matrix3<f64>;

/// Convenience result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
