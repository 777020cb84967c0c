//! Numerical laboratory for non-compact von Mangoldt surfaces of revolution.
//!
//! A model surface is the plane `(0, ∞) × S¹` with metric `dt² + f(t)²dθ²`
//! around a pole `p̃`. The crate integrates its geodesics, measures distances
//! by shooting (cross-checked against a graph oracle), locates cut loci,
//! builds comparison triangles with one vertex at the pole, and estimates
//! the mass of rays and Busemann functions of meridian rays.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod comparison;
pub mod cutlocus;
pub mod error;
pub mod geodesic;
pub mod ode;
pub mod oracle;
pub mod profile;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use profile::{Builtin, CurvatureProfile, ModelDocument, ModelKind, TotalCurvatureReport};
pub use scalar::Real;

/// Model surface in double precision.
pub type ProfileModel = profile::ProfileModel<f64>;
pub type PolarPoint = geodesic::PolarPoint<f64>;
pub type GeodesicState = geodesic::GeodesicState<f64>;
pub type GeodesicPath = geodesic::GeodesicPath<f64>;
pub type Distance = geodesic::Distance<f64>;
pub type CutLocusDescription = cutlocus::CutLocusDescription<f64>;
pub type ComparisonTriangle = comparison::ComparisonTriangle<f64>;
pub type GtctReport = comparison::GtctReport<f64>;
pub type RayMassReport = asymptotics::RayMassReport<f64>;
pub type BusemannValue = asymptotics::BusemannValue<f64>;
pub type BusemannField = asymptotics::BusemannField<f64>;
pub type MainTheoremReport = asymptotics::MainTheoremReport<f64>;
