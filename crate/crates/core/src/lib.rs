//! Okounkov bodies of graded semigroups, Chebyshev transforms of weights and
//! relative Monge–Ampère energies, computed along independent routes.

pub mod classical;
pub mod envelope;
pub mod error;
pub mod geometry;
pub mod gram;
pub mod semigroup;
pub mod linalg;
pub mod optimize;
pub mod toric;
pub mod quadrature;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub use scalar::Real;

/// Double-precision convex body.
pub type Body = geometry::ConvexBody<f64>;
/// Exact rational convex body (dimension ≤ 2).
pub type ExactBody = geometry::ConvexBody<num_rational::BigRational>;
