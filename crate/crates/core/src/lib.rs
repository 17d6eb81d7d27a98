//! Geometry of the cotangent bundle in local coordinates: nonlinear
//! connections, adapted tangent structures, regular vector fields and their
//! dynamical covariant derivative, and Legendre duality with semisprays on
//! the tangent bundle.
//!
//! Everything is built on a small symbolic engine ([`expr`]) so that
//! identities can be assembled exactly and only evaluated numerically at the
//! end. Point evaluation, dense kernels and the Newton solver are generic
//! over the scalar type ([`Scalar`]); the aliases below fix `f64` and `f32`.

pub mod cotangent;
pub mod dynamics;
mod error;
pub mod expr;
pub mod frame;
pub mod hamilton;
pub mod linalg;
pub mod sampling;
pub mod scalar;

pub use error::Error;
pub use scalar::Scalar;

/// Chart point with `f64` coordinates.
pub type Point = expr::ChartPoint<f64>;
/// Chart point with `f32` coordinates.
pub type Point32 = expr::ChartPoint<f32>;
/// Dense `f64` matrix.
pub type Matrix = linalg::Mat<f64>;
/// Dense `f32` matrix.
pub type Matrix32 = linalg::Mat<f32>;
/// Residual maximum in `f64`.
pub type Residual = sampling::Residual<f64>;
