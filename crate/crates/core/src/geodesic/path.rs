use std::io::Write;

use serde::{Deserialize, Serialize};

use super::point::{GeodesicState, PolarPoint};
use crate::error::{Error, Result};
use crate::profile::ProfileModel;
use crate::scalar::{wrap_pi, Real};

/// A state together with its arclength stamp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSample<T> {
    pub s: T,
    pub state: GeodesicState<T>,
}

/// Sampled unit-speed geodesic. θ is kept unwrapped along the path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicPath<T> {
    pub samples: Vec<PathSample<T>>,
    pub length: T,
    /// Arclengths where `dt/ds` changes sign.
    pub turning_points: Vec<T>,
}

impl<T: Real> GeodesicPath<T> {
    /// Degenerate path of length zero.
    pub fn constant(state: GeodesicState<T>) -> Self {
        GeodesicPath {
            samples: vec![PathSample { s: T::zero(), state }],
            length: T::zero(),
            turning_points: Vec::new(),
        }
    }

    pub fn start(&self) -> &GeodesicState<T> {
        &self.samples[0].state
    }

    pub fn end(&self) -> &GeodesicState<T> {
        &self.samples[self.samples.len() - 1].state
    }

    pub fn start_point(&self) -> PolarPoint<T> {
        self.start().point()
    }

    pub fn endpoint(&self) -> PolarPoint<T> {
        self.end().point()
    }

    pub fn nu(&self) -> T {
        self.start().nu
    }

    /// Initial heading from the outward meridian (see
    /// [`GeodesicState::heading`]).
    pub fn initial_heading(&self, model: &ProfileModel<T>) -> T {
        self.start().heading(model)
    }

    /// The same curve traversed from its end back to its start.
    pub fn reversed(&self) -> Self {
        let samples = self
            .samples
            .iter()
            .rev()
            .map(|p| PathSample {
                s: self.length - p.s,
                state: p.state.reversed(),
            })
            .collect();
        let turning_points = self.turning_points.iter().rev().map(|&s| self.length - s).collect();
        GeodesicPath {
            samples,
            length: self.length,
            turning_points,
        }
    }

    /// Rigid motion by a rotation `θ ↦ offset + sign·θ`, `sign = ±1`.
    pub(crate) fn transformed(mut self, offset: T, sign: T) -> Self {
        for p in &mut self.samples {
            p.state.theta = offset + sign * p.state.theta;
            p.state.v = sign * p.state.v;
            p.state.nu = sign * p.state.nu;
        }
        self
    }

    /// Largest speed defect `|u² + f²v² − 1|` over the samples.
    pub fn max_speed_defect(&self, model: &ProfileModel<T>) -> T {
        self.samples
            .iter()
            .map(|p| p.state.speed_defect(model))
            .fold(T::zero(), T::max)
    }

    /// Writes the samples as CSV with columns `s,t,theta,u,v,nu`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["s", "t", "theta", "u", "v", "nu"])?;
        for p in &self.samples {
            let st = &p.state;
            w.write_record(
                [p.s, st.t, st.theta, st.u, st.v, st.nu].map(|x| format!("{:e}", x.to_f64_lossy())),
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

const START_MATCH: f64 = 1e-8;

fn check_starts_at<T: Real>(model: &ProfileModel<T>, q: &PolarPoint<T>, path: &GeodesicPath<T>) -> Result<()> {
    let st = path.start();
    let offset = if q.is_pole() || st.t == T::zero() {
        (st.t - q.t).abs()
    } else {
        let f = model.f(q.t.max(st.t)).abs();
        (st.t - q.t).abs() + f * wrap_pi(st.theta - q.theta).abs()
    };
    if !(offset <= T::lit(START_MATCH)) {
        return Err(Error::PathMismatch {
            offset: offset.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Angle in `[0, π]` between the initial tangents of two paths leaving `q`.
pub fn angle_at<T: Real>(
    model: &ProfileModel<T>,
    q: &PolarPoint<T>,
    first: &GeodesicPath<T>,
    second: &GeodesicPath<T>,
) -> Result<T> {
    check_starts_at(model, q, first)?;
    check_starts_at(model, q, second)?;
    let a = first.initial_heading(model);
    let b = second.initial_heading(model);
    Ok(wrap_pi(a - b).abs())
}
