//! Profiles given as samples `(t, f)`, interpolated by shape-preserving
//! cubic Hermite splines.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest tolerated departure of the fitted `f'(0)` from 1.
pub const SLOPE_AT_POLE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct SampledProfile<T> {
    knots: Vec<T>,
    values: Vec<T>,
    slopes: Vec<T>,
    /// `f''` at the last knot, continued as a constant beyond it.
    tail_curvature: T,
}

impl<T: Real> SampledProfile<T> {
    /// Fits the interpolant. The first knot must be `t = 0` (it is inserted
    /// when absent) and `f(0)` is forced to zero; the slope at the pole is
    /// set to 1 and must survive the monotonicity limiter.
    pub fn new(samples: &[(T, T)]) -> Result<Self> {
        let mut knots = Vec::with_capacity(samples.len() + 1);
        let mut values = Vec::with_capacity(samples.len() + 1);
        if samples.first().is_none_or(|s| s.0 > T::zero()) {
            knots.push(T::zero());
            values.push(T::zero());
        }
        for &(t, f) in samples {
            if !t.is_finite() || !f.is_finite() {
                return Err(Error::Schema("non-finite sample".into()));
            }
            if t < T::zero() {
                return Err(Error::Schema(format!("negative sample abscissa {t}")));
            }
            if let Some(&last) = knots.last() {
                if t <= last {
                    return Err(Error::Schema(format!(
                        "sample abscissae must increase strictly (at t = {t})"
                    )));
                }
            }
            knots.push(t);
            values.push(if t == T::zero() { T::zero() } else { f });
        }
        if knots.len() < 2 {
            return Err(Error::Schema("at least one sample with t > 0 is required".into()));
        }
        for (t, f) in knots.iter().zip(&values).skip(1) {
            if *f <= T::zero() {
                return Err(Error::Admissibility(format!("f({t}) = {f} is not positive")));
            }
        }

        let n = knots.len();
        let h: Vec<T> = knots.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<T> = (0..n - 1)
            .map(|k| (values[k + 1] - values[k]) / h[k])
            .collect();
        let mut slopes = vec![T::zero(); n];

        for k in 1..n - 1 {
            let (d0, d1) = (delta[k - 1], delta[k]);
            if d0 * d1 <= T::zero() {
                slopes[k] = T::zero();
            } else {
                let w1 = T::lit(2.0) * h[k] + h[k - 1];
                let w2 = h[k] + T::lit(2.0) * h[k - 1];
                slopes[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
            }
        }

        // Slope at the pole: the Jacobi initial condition f'(0) = 1, limited
        // like any other end slope so the first cell stays monotone.
        let mut d_pole = T::one();
        if delta[0] <= T::zero() {
            d_pole = T::zero();
        } else if d_pole > T::lit(3.0) * delta[0] {
            d_pole = T::lit(3.0) * delta[0];
        }
        if (d_pole - T::one()).abs() > T::lit(SLOPE_AT_POLE_TOL) {
            return Err(Error::Admissibility(format!(
                "samples force f'(0) = {d_pole}, not 1 (first secant {})",
                delta[0]
            )));
        }
        slopes[0] = d_pole;

        slopes[n - 1] = if n == 2 {
            delta[0]
        } else {
            let (h0, h1) = (h[n - 2], h[n - 3]);
            let (m0, m1) = (delta[n - 2], delta[n - 3]);
            let d = ((T::lit(2.0) * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
            if d.signum() != m0.signum() {
                T::zero()
            } else if m0.signum() != m1.signum() && d.abs() > T::lit(3.0) * m0.abs() {
                T::lit(3.0) * m0
            } else {
                d
            }
        };

        let mut profile = SampledProfile {
            knots,
            values,
            slopes,
            tail_curvature: T::zero(),
        };
        let last = profile.knots[n - 1];
        profile.tail_curvature = profile.eval_interior(n - 2, last).2;
        Ok(profile)
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn last_knot(&self) -> T {
        *self.knots.last().expect("non-empty")
    }

    fn eval_interior(&self, k: usize, t: T) -> (T, T, T) {
        let h = self.knots[k + 1] - self.knots[k];
        let s = (t - self.knots[k]) / h;
        let (f0, f1) = (self.values[k], self.values[k + 1]);
        let (d0, d1) = (self.slopes[k], self.slopes[k + 1]);
        let c = |x: f64| T::lit(x);
        let s2 = s * s;
        let s3 = s2 * s;
        let f = (c(2.0) * s3 - c(3.0) * s2 + T::one()) * f0
            + (s3 - c(2.0) * s2 + s) * h * d0
            + (c(-2.0) * s3 + c(3.0) * s2) * f1
            + (s3 - s2) * h * d1;
        let df = (c(6.0) * s2 - c(6.0) * s) * (f0 - f1) / h
            + (c(3.0) * s2 - c(4.0) * s + T::one()) * d0
            + (c(3.0) * s2 - c(2.0) * s) * d1;
        let ddf = (c(12.0) * s - c(6.0)) * (f0 - f1) / (h * h)
            + ((c(6.0) * s - c(4.0)) * d0 + (c(6.0) * s - c(2.0)) * d1) / h;
        (f, df, ddf)
    }

    /// `(f, f', f'')` at `t ≥ 0`.
    pub fn eval(&self, t: T) -> (T, T, T) {
        let n = self.knots.len();
        let last = self.knots[n - 1];
        if t >= last {
            let tau = t - last;
            let (fl, dl, c) = (self.values[n - 1], self.slopes[n - 1], self.tail_curvature);
            return (fl + dl * tau + c * tau * tau / T::lit(2.0), dl + c * tau, c);
        }
        let k = match self.knots.partition_point(|&x| x <= t) {
            0 => 0,
            i => (i - 1).min(n - 2),
        };
        self.eval_interior(k, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_knots() {
        let p = SampledProfile::<f64>::new(&[(0.0, 0.0), (1.0, 0.9), (2.0, 1.2)]).unwrap();
        assert_eq!(p.eval(1.0).0, 0.9);
        assert!((p.eval(2.0).0 - 1.2).abs() < 1e-15);
        assert_eq!(p.eval(0.0).0, 0.0);
        assert!((p.eval(0.0).1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pole_inserted_when_missing() {
        let p = SampledProfile::new(&[(1.0, 0.9), (2.0, 1.2)]).unwrap();
        assert_eq!(p.knots()[0], 0.0);
        assert_eq!(p.knots().len(), 3);
    }

    #[test]
    fn rejects_nonpositive_interior_value() {
        let err = SampledProfile::new(&[(0.0, 0.0), (1.0, 0.8), (2.0, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::Admissibility(_)));
    }

    #[test]
    fn rejects_slope_incompatible_with_unit_start() {
        // first secant 0.2 < 1/3: a monotone interpolant cannot leave the pole with slope 1
        let err = SampledProfile::new(&[(0.0, 0.0), (1.0, 0.2), (2.0, 0.5)]).unwrap_err();
        assert!(matches!(err, Error::Admissibility(_)));
    }

    #[test]
    fn rejects_unsorted() {
        let err = SampledProfile::new(&[(0.0, 0.0), (2.0, 0.8), (1.0, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn derivatives_consistent_with_values() {
        let p = SampledProfile::new(&[(0.0, 0.0), (0.5, 0.48), (1.0, 0.85), (2.0, 1.3)]).unwrap();
        for &t in &[0.1f64, 0.3, 0.7, 1.4, 2.5] {
            let h = 1e-6;
            let fd = (p.eval(t + h).0 - p.eval(t - h).0) / (2.0 * h);
            assert!((fd - p.eval(t).1).abs() < 1e-7, "t = {t}");
            let fd2 = (p.eval(t + h).1 - p.eval(t - h).1) / (2.0 * h);
            assert!((fd2 - p.eval(t).2).abs() < 1e-6, "t = {t}");
        }
    }

    #[test]
    fn tail_extrapolates_with_linear_slope() {
        let p = SampledProfile::<f64>::new(&[(0.0, 0.0), (1.0, 0.9), (2.0, 1.2)]).unwrap();
        let (_, d2, c2) = p.eval(2.0);
        let (_, d3, c3) = p.eval(3.0);
        assert!((d3 - (d2 + c2)).abs() < 1e-14);
        assert_eq!(c2, c3);
    }
}
