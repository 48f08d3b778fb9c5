//! Variable-curvature distortion coefficients and curvature-dimension
//! verifiers on one-dimensional metric measure spaces.
//!
//! The pipeline is: a curvature bound ([`curvature_field`]) restricted along a
//! geodesic gives a coefficient for `u'' + κu = 0` ([`sturm`]); its solutions
//! give distortion coefficients σ and τ ([`distortion`]); those weight the
//! entropy inequalities checked on explicit Wasserstein geodesics
//! ([`transport`], [`cd_check`]) over concrete spaces ([`spaces`]).

pub mod cd_check;
pub mod convexity;
pub mod curvature_field;
pub mod distortion;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod io;
pub mod sampled;
pub mod spaces;
pub mod suite;
pub mod sturm;
pub mod transport;

pub use error::{Error, Result};
