use serde::{Deserialize, Serialize};

use crate::profile::ProfileModel;
use crate::scalar::{wrap_pi, wrap_two_pi, Real};

/// Point in geodesic polar coordinates about the pole.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint<T> {
    pub t: T,
    pub theta: T,
}

impl<T: Real> PolarPoint<T> {
    /// Canonical representative: `θ ∈ [0, 2π)`, `θ = 0` at the pole, and a
    /// negative radius read as the antipodal direction.
    pub fn new(t: T, theta: T) -> Self {
        let (t, theta) = if t < T::zero() { (-t, theta + T::PI()) } else { (t, theta) };
        if t == T::zero() {
            return PolarPoint { t, theta: T::zero() };
        }
        PolarPoint { t, theta: wrap_two_pi(theta) }
    }

    pub fn pole() -> Self {
        PolarPoint { t: T::zero(), theta: T::zero() }
    }

    pub fn is_pole(&self) -> bool {
        self.t == T::zero()
    }

    /// Cheap bound on the metric separation of two points: a meridian leg
    /// plus a parallel leg at the smaller warp.
    pub fn separation_bound(&self, other: &Self, model: &ProfileModel<T>) -> T {
        let dt = (self.t - other.t).abs();
        if self.is_pole() || other.is_pole() {
            return self.t.max(other.t);
        }
        let dth = wrap_pi(self.theta - other.theta).abs();
        dt + dth * model.f(self.t).abs().min(model.f(other.t).abs())
    }
}

/// Unit-speed phase state of a geodesic with its Clairaut constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicState<T> {
    pub t: T,
    pub theta: T,
    /// `dt/ds`.
    pub u: T,
    /// `dθ/ds`.
    pub v: T,
    /// `f(t)²·dθ/ds`.
    pub nu: T,
}

impl<T: Real> GeodesicState<T> {
    /// State at `q` heading at angle `phi` from the outward meridian,
    /// measured toward increasing θ. At the pole `phi` is the θ of the
    /// meridian the geodesic leaves along.
    pub fn launch(model: &ProfileModel<T>, q: PolarPoint<T>, phi: T) -> Self {
        if q.is_pole() {
            return GeodesicState {
                t: T::zero(),
                theta: wrap_two_pi(phi),
                u: T::one(),
                v: T::zero(),
                nu: T::zero(),
            };
        }
        let f = model.f(q.t);
        let (sin, cos) = phi.sin_cos();
        let (nu, v) = if sin.abs() <= T::epsilon() * T::lit(4.0) { (T::zero(), T::zero()) } else { (f * sin, sin / f) };
        GeodesicState {
            t: q.t,
            theta: q.theta,
            u: cos,
            v,
            nu,
        }
    }

    /// Rebuilds the full state from `(t, θ, u)` and the Clairaut constant.
    pub fn from_phase(model: &ProfileModel<T>, t: T, theta: T, u: T, nu: T) -> Self {
        let v = if nu == T::zero() {
            T::zero()
        } else {
            let f = model.f(t);
            nu / f / f
        };
        GeodesicState { t, theta, u, v, nu }
    }

    pub fn point(&self) -> PolarPoint<T> {
        PolarPoint::new(self.t, self.theta)
    }

    /// Angular speed in the orthonormal frame, `f·dθ/ds = ν/f`.
    pub fn transverse(&self, model: &ProfileModel<T>) -> T {
        if self.nu == T::zero() {
            T::zero()
        } else {
            self.nu / model.f(self.t)
        }
    }

    /// Heading from the outward meridian in `(−π, π]`. At the pole this is
    /// the θ of the outgoing meridian.
    pub fn heading(&self, model: &ProfileModel<T>) -> T {
        if self.t == T::zero() {
            let dir = if self.u < T::zero() { self.theta + T::PI() } else { self.theta };
            return wrap_pi(dir);
        }
        self.transverse(model).atan2(self.u)
    }

    /// `|u² + f²v² − 1|`.
    pub fn speed_defect(&self, model: &ProfileModel<T>) -> T {
        let w = self.transverse(model);
        (self.u * self.u + w * w - T::one()).abs()
    }

    /// The same point travelled in the opposite direction.
    pub fn reversed(&self) -> Self {
        GeodesicState {
            t: self.t,
            theta: self.theta,
            u: -self.u,
            v: -self.v,
            nu: -self.nu,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn canonical_points() {
        let p = PolarPoint::new(0.0, 1.3);
        assert_eq!(p.theta, 0.0);
        let q = PolarPoint::new(-2.0, 0.5);
        assert_eq!(q.t, 2.0);
        assert!((q.theta - (0.5 + PI)).abs() < 1e-15);
        let r = PolarPoint::new(1.0, -0.5);
        assert!((r.theta - (2.0 * PI - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn launch_is_unit_speed() {
        let m = crate::ProfileModel::paraboloid();
        for k in 0..16 {
            let phi = -PI + k as f64 * 0.4;
            let s = GeodesicState::launch(&m, PolarPoint::new(2.0, 0.3), phi);
            assert!(s.speed_defect(&m) < 1e-14);
            assert!((s.nu - m.f(2.0) * phi.sin()).abs() < 1e-14);
            assert!((wrap_pi(s.heading(&m) - phi)).abs() < 1e-12);
        }
    }

    #[test]
    fn pole_heading_is_meridian_angle() {
        let m = crate::ProfileModel::plane();
        let s = GeodesicState::launch(&m, PolarPoint::pole(), 1.0);
        assert_eq!(s.heading(&m), 1.0);
        assert!((s.reversed().heading(&m) - (1.0 - PI)).abs() < 1e-15);
    }
}
