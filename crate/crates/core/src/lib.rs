//! Spherical harmonics, weight sequences and boundary values of harmonic
//! functions on the unit ball.
//!
//! Exact work (polynomials, harmonic bases, zonal kernels) uses rationals;
//! numeric evaluation is generic over [`scalar::Real`]; weights and
//! classification work in f64 log-space.

// NaN must fail range checks, so `!(x > 0.0)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod classify;
pub mod error;
pub mod expansion;
pub mod harmonics;
pub mod poisson;
pub mod quadrature;
pub mod scalar;
pub mod support;
pub mod symalg;
pub mod verdict;
pub mod weights;

pub use error::{Error, Result};
pub use expansion::{Degree, Expansion, Kind, Pole};
pub use verdict::{BoundVerdict, CampaignSummary, InequalityId};
pub use weights::WeightSequence;

/// Quadrature rule in double precision.
pub type Rule = quadrature::QuadratureRule<f64>;
/// Compiled polynomial in double precision.
pub type CompiledPoly = symalg::CompiledPoly<f64>;
/// Compiled radial form in double precision.
pub type CompiledRadial = symalg::CompiledRadial<f64>;
/// Compiled trigonometric form in double precision.
pub type CompiledTrig = symalg::CompiledTrig<f64>;

/// Version string echoed into reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
