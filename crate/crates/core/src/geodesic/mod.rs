//! Geodesics in geodesic polar coordinates: integration, the exponential
//! map, point-to-point distances by shooting, and angles between paths.

mod clairaut;
mod flow;
mod path;
mod point;
mod shooting;

pub use flow::{exp_map, exp_map_with, integrate, trace, DEFAULT_TOL};
pub use path::{angle_at, GeodesicPath, PathSample};
pub use point::{GeodesicState, PolarPoint};
pub use shooting::{
    distance, distance_with, shoot_to_meridian, Candidate, Distance, DistanceKind, DistanceOptions,
    COLLAPSE_TOL, DEFAULT_SAMPLES, TIE_TOL,
};
