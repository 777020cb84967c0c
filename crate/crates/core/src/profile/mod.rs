//! Model surfaces `dt² + f(t)²dθ²` described by their warping function.

mod builtin;
mod document;
mod sampled;

pub use builtin::Builtin;
pub use document::{ModelDocument, ModelDocumentKind};
pub use sampled::SampledProfile;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature;
use crate::scalar::Real;

/// Below this radius the curvature is extrapolated instead of divided out.
pub const CURVATURE_SWITCH: f64 = 1e-4;
/// Default numerical domain cap of the closed-form models.
pub const DEFAULT_T_MAX: f64 = 40.0;
/// `|f'(t_max)|` beyond which the total curvature is reported non-finite.
pub const DIVERGENT_SLOPE: f64 = 1e3;
/// Allowed discrepancy between the two total-curvature routes.
pub const TOTAL_CURVATURE_AGREEMENT: f64 = 1e-3;
/// Monotonicity slack of the von Mangoldt test.
pub const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    ClosedForm,
    Sampled,
}

#[derive(Debug, Clone, Serialize)]
enum Shape<T> {
    Builtin(Builtin),
    Sampled(SampledProfile<T>),
}

/// A pointed surface of revolution `(M̃, p̃)` given by its warping function.
///
/// Immutable once built; every evaluation is a pure function of `t`.
/// Odd reflection `f(−t) = −f(t)` is used for arguments below zero, which
/// lets integrators take trial stages across the pole.
#[derive(Debug, Clone, Serialize)]
pub struct ProfileModel<T> {
    name: String,
    t_max: T,
    shape: Shape<T>,
}

/// Sampled radial curvature with the von Mangoldt verdict.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureProfile<T> {
    /// `(t, G(t))` on the evaluation grid, starting at `t = 0`.
    pub samples: Vec<(T, T)>,
    pub g0: T,
    pub von_mangoldt: bool,
    pub strictly_decreasing: bool,
    pub first_violation: Option<T>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TotalCurvatureReport<T> {
    /// `2π(1 − f'(t_max))`.
    pub c_limit: T,
    /// `2π ∫ G f dt` over `[0, t_max]`.
    pub c_integral: T,
    pub quadrature_error: T,
    pub finite: bool,
}

impl<T: Real> ProfileModel<T> {
    pub fn builtin(which: Builtin) -> Self {
        ProfileModel {
            name: which.name().to_owned(),
            t_max: T::lit(DEFAULT_T_MAX),
            shape: Shape::Builtin(which),
        }
    }

    pub fn plane() -> Self {
        Self::builtin(Builtin::Plane)
    }

    pub fn paraboloid() -> Self {
        Self::builtin(Builtin::Paraboloid)
    }

    pub fn hyperbolic() -> Self {
        Self::builtin(Builtin::Hyperbolic)
    }

    pub fn sinclair() -> Self {
        Self::builtin(Builtin::Sinclair)
    }

    /// Resolves a built-in model by name.
    pub fn by_name(name: &str) -> Result<Self> {
        Ok(Self::builtin(name.parse()?))
    }

    pub fn from_samples(name: impl Into<String>, samples: &[(T, T)], t_max: Option<T>) -> Result<Self> {
        let profile = SampledProfile::new(samples)?;
        let t_max = t_max.unwrap_or_else(|| profile.last_knot());
        if !(t_max > T::zero()) {
            return Err(Error::Schema(format!("t_max = {t_max} must be positive")));
        }
        let model = ProfileModel {
            name: name.into(),
            t_max,
            shape: Shape::Sampled(profile),
        };
        // positivity up to the domain cap, including any extrapolated tail
        let n = 1000;
        for i in 1..=n {
            let t = t_max * T::from_usize_lossy(i) / T::from_usize_lossy(n);
            if model.f(t) <= T::zero() {
                return Err(Error::Admissibility(format!(
                    "interpolated f({t}) = {} is not positive",
                    model.f(t)
                )));
            }
        }
        Ok(model)
    }

    /// Parses a model-definition JSON document.
    pub fn from_json(source: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(source)
            .map_err(|e| Error::Schema(e.to_string()))?;
        doc.build()
    }

    pub fn with_t_max(mut self, t_max: T) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn t_max(&self) -> T {
        self.t_max
    }

    pub fn kind(&self) -> ModelKind {
        match self.shape {
            Shape::Builtin(_) => ModelKind::ClosedForm,
            Shape::Sampled(_) => ModelKind::Sampled,
        }
    }

    pub fn builtin_kind(&self) -> Option<Builtin> {
        match self.shape {
            Shape::Builtin(b) => Some(b),
            Shape::Sampled(_) => None,
        }
    }

    fn eval_nonneg(&self, t: T) -> (T, T, T) {
        match &self.shape {
            Shape::Builtin(b) => (b.f(t), b.df(t), b.ddf(t)),
            Shape::Sampled(p) => p.eval(t),
        }
    }

    /// Warping function `f`.
    pub fn f(&self, t: T) -> T {
        match &self.shape {
            Shape::Builtin(b) => b.f(t),
            Shape::Sampled(p) => {
                if t < T::zero() {
                    -p.eval(-t).0
                } else {
                    p.eval(t).0
                }
            }
        }
    }

    pub fn df(&self, t: T) -> T {
        match &self.shape {
            Shape::Builtin(b) => b.df(t),
            Shape::Sampled(p) => p.eval(t.abs()).1,
        }
    }

    pub fn ddf(&self, t: T) -> T {
        match &self.shape {
            Shape::Builtin(b) => b.ddf(t),
            Shape::Sampled(p) => {
                let v = p.eval(t.abs()).2;
                if t < T::zero() {
                    -v
                } else {
                    v
                }
            }
        }
    }

    /// `f'(t)/f(t)`, finite wherever `f` itself underflows.
    pub fn log_derivative(&self, t: T) -> T {
        match &self.shape {
            Shape::Builtin(b) => b.log_derivative(t),
            Shape::Sampled(_) => self.df(t) / self.f(t),
        }
    }

    /// `(f(t), f'(t)/f(t))`, sharing work between the two.
    pub fn warp(&self, t: T) -> (T, T) {
        match &self.shape {
            Shape::Builtin(b) => b.warp(t),
            Shape::Sampled(_) => {
                let f = self.f(t);
                (f, self.df(t) / f)
            }
        }
    }

    /// `f''(t)/f(t)`.
    pub fn ddf_over_f(&self, t: T) -> T {
        match &self.shape {
            Shape::Builtin(b) => b.ddf_over_f(t),
            Shape::Sampled(p) => {
                let (f, _, ddf) = p.eval(t.abs());
                ddf / f
            }
        }
    }

    /// Curvature from the model's independent closed form, when it has one.
    pub fn closed_form_curvature(&self, t: T) -> Option<T> {
        match self.shape {
            Shape::Builtin(b) => Some(b.curvature(t)),
            Shape::Sampled(_) => None,
        }
    }

    /// `|f'' + G f|` with `G` from the closed form (closed-form models only).
    pub fn jacobi_residual(&self, t: T) -> Option<T> {
        let g = self.closed_form_curvature(t)?;
        let (f, _, ddf) = self.eval_nonneg(t);
        Some((ddf + g * f).abs())
    }

    fn check_domain(&self, t: T) -> Result<()> {
        if !(t >= T::zero() && t <= self.t_max) {
            return Err(Error::Domain {
                what: "t",
                value: t.to_f64_lossy(),
                lo: 0.0,
                hi: self.t_max.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// Radial curvature `G(t) = −f''(t)/f(t)`.
    ///
    /// For `t ≤ 1e−4` the quotient is replaced by the quadratic-in-`t²`
    /// Richardson fit through `t = ε₀, ε₀/2, ε₀/4`, which reproduces the
    /// quotient at `ε₀` and yields the `t → 0` limit at the pole.
    pub fn eval_curvature(&self, t: T) -> Result<T> {
        self.check_domain(t)?;
        let eps = T::lit(CURVATURE_SWITCH);
        if t > eps {
            return Ok(-self.ddf_over_f(t));
        }
        let nodes = [eps, eps / T::lit(2.0), eps / T::lit(4.0)];
        let x: Vec<T> = nodes.iter().map(|h| *h * *h).collect();
        let y: Vec<T> = nodes.iter().map(|&h| -self.ddf_over_f(h)).collect();
        let at = t * t;
        let mut value = T::zero();
        for i in 0..3 {
            let mut w = T::one();
            for j in 0..3 {
                if i != j {
                    w = w * (at - x[j]) / (x[i] - x[j]);
                }
            }
            value = value + w * y[i];
        }
        Ok(value)
    }

    /// Samples `G` on `t_i = i·t_max/grid_size` (plus `t = 0`) and tests
    /// whether it is non-increasing.
    pub fn check_von_mangoldt(&self, grid_size: usize) -> Result<CurvatureProfile<T>> {
        if grid_size < 2 {
            return Err(Error::Precondition(format!("grid_size = {grid_size} < 2")));
        }
        let g0 = self.eval_curvature(T::zero())?;
        let mut samples = Vec::with_capacity(grid_size + 1);
        samples.push((T::zero(), g0));
        for i in 1..=grid_size {
            let t = (self.t_max * T::from_usize_lossy(i) / T::from_usize_lossy(grid_size)).min(self.t_max);
            samples.push((t, self.eval_curvature(t)?));
        }
        let slack = T::lit(MONOTONE_SLACK);
        let first_violation = samples
            .windows(2)
            .find(|w| !(w[1].1 <= w[0].1 + slack))
            .map(|w| w[1].0);
        let strictly_decreasing = samples.windows(2).all(|w| w[1].1 < w[0].1);
        Ok(CurvatureProfile {
            samples,
            g0,
            von_mangoldt: first_violation.is_none(),
            strictly_decreasing,
            first_violation,
        })
    }

    /// Total curvature by the slope limit and by quadrature of `G f`.
    pub fn total_curvature(&self) -> TotalCurvatureReport<T> {
        let tau = T::TAU();
        let slope_end = self.df(self.t_max);
        let c_limit = tau * (T::one() - slope_end);
        let q = quadrature::integrate(
            |t: T| {
                let g = self.eval_curvature(t).unwrap_or_else(|_| T::nan());
                let f = self.f(t);
                // G·f with G finite and f underflowed is exactly zero
                if f == T::zero() {
                    T::zero()
                } else {
                    g * f
                }
            },
            T::zero(),
            self.t_max,
            T::lit(1e-11),
            T::lit(1e-11),
            4000,
        );
        let c_integral = tau * q.value;
        let finite = slope_end.abs() <= T::lit(DIVERGENT_SLOPE)
            && q.converged
            && c_limit.is_finite()
            && c_integral.is_finite();
        TotalCurvatureReport {
            c_limit,
            c_integral,
            quadrature_error: tau * q.error,
            finite,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sinclair_curvature_at_pole_is_eight() {
        let m = ProfileModel::<f64>::sinclair();
        let g0 = m.eval_curvature(0.0).unwrap();
        assert!((g0 - 8.0).abs() < 1e-3, "G(0+) = {g0}");
        assert!((m.eval_curvature(1e-9).unwrap() - 8.0).abs() < 1e-3);
    }

    #[test]
    fn sinclair_curvature_at_one() {
        let m = ProfileModel::<f64>::sinclair();
        let expected = 8.0 / (2.0f64).sinh() + 2.0 / (1.0f64).cosh().powi(2) - 2.0;
        assert!((m.eval_curvature(1.0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn plane_is_flat() {
        let m = ProfileModel::<f64>::plane();
        for &t in &[0.0, 1e-5, 0.5, 17.0] {
            assert_eq!(m.eval_curvature(t).unwrap(), 0.0);
        }
    }

    #[test]
    fn curvature_domain_errors() {
        let m = ProfileModel::<f64>::sinclair();
        assert!(matches!(m.eval_curvature(-0.1), Err(Error::Domain { .. })));
        assert!(matches!(m.eval_curvature(40.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn curvature_continuous_across_switch() {
        for m in [
            ProfileModel::<f64>::sinclair(),
            ProfileModel::paraboloid(),
            ProfileModel::hyperbolic(),
        ] {
            let lo = m.eval_curvature(CURVATURE_SWITCH * 0.9).unwrap();
            let hi = m.eval_curvature(CURVATURE_SWITCH * 1.1).unwrap();
            assert!((lo - hi).abs() <= 1e-4 * (1.0 + lo.abs()), "{}", m.name());
        }
    }

    #[test]
    fn von_mangoldt_verdicts() {
        assert!(ProfileModel::<f64>::sinclair().check_von_mangoldt(1000).unwrap().von_mangoldt);
        assert!(ProfileModel::<f64>::plane().check_von_mangoldt(100).unwrap().von_mangoldt);
        assert!(ProfileModel::<f64>::paraboloid().check_von_mangoldt(1000).unwrap().strictly_decreasing);
        assert!(ProfileModel::<f64>::plane().check_von_mangoldt(1).is_err());
    }

    #[test]
    fn bump_profile_violates_monotonicity() {
        // flat near the pole, then bending over like a sphere: G rises from 0
        let samples: Vec<(f64, f64)> = (0..=40)
            .map(|i| {
                let t = i as f64 * 0.05;
                let f = if t <= 1.0 { t } else { 1.0 + (t - 1.0).sin() * 0.6 + (t - 1.0) * 0.4 - (t - 1.0).powi(3) * 0.3 };
                (t, f)
            })
            .collect();
        let m = ProfileModel::from_samples("bump", &samples, None).unwrap();
        let report = m.check_von_mangoldt(400).unwrap();
        assert!(!report.von_mangoldt);
        assert!(report.first_violation.is_some());
        // the rise is real, not interpolation noise: G climbs well above its flat value
        let g_late = m.eval_curvature(1.3).unwrap();
        let g_flat = m.eval_curvature(0.5).unwrap();
        assert!(g_late > g_flat + 0.1, "{g_flat} -> {g_late}");
    }

    #[test]
    fn total_curvature_values() {
        let s = ProfileModel::<f64>::sinclair().total_curvature();
        assert!(s.finite);
        assert!((s.c_limit - 2.0 * PI).abs() < 1e-2);
        assert!((s.c_integral - 2.0 * PI).abs() < 1e-2);
        let p = ProfileModel::<f64>::plane().total_curvature();
        assert!(p.finite && p.c_limit.abs() < 1e-15 && p.c_integral.abs() < 1e-15);
        let h = ProfileModel::<f64>::hyperbolic().total_curvature();
        assert!(!h.finite);
        assert!(h.c_limit < 0.0);
    }

    #[test]
    fn jacobi_residual_small_for_closed_forms() {
        for b in Builtin::ALL {
            let m = ProfileModel::<f64>::builtin(b);
            for i in 1..=1000 {
                let t = 40.0 * i as f64 / 1000.0;
                let r = m.jacobi_residual(t).unwrap();
                assert!(r <= 1e-9 * m.ddf(t).abs().max(1.0), "{b} at {t}: {r}");
            }
        }
    }

    #[test]
    fn single_precision_profile() {
        let m = ProfileModel::<f32>::sinclair();
        assert!((m.eval_curvature(0.0).unwrap() - 8.0).abs() < 1e-2);
        assert!((m.f(1.0) - (-1.0f32).exp() * 1.0f32.tanh()).abs() < 1e-6);
    }
}
