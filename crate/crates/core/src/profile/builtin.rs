//! Closed-form warping functions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::scalar::Real;

/// Built-in model surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    /// Euclidean plane, `f(t) = t`.
    Plane,
    /// The paraboloid `z = r²`, meridian parametrized by arclength.
    Paraboloid,
    /// Hyperbolic plane of curvature −1, `f(t) = sinh t`.
    Hyperbolic,
    /// `f(t) = exp(−t²)·tanh t`.
    Sinclair,
}

impl Builtin {
    pub const ALL: [Builtin; 4] = [
        Builtin::Plane,
        Builtin::Paraboloid,
        Builtin::Hyperbolic,
        Builtin::Sinclair,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Plane => "plane",
            Builtin::Paraboloid => "paraboloid",
            Builtin::Hyperbolic => "hyperbolic",
            Builtin::Sinclair => "sinclair",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Builtin::Plane => "f(t) = t, flat",
            Builtin::Paraboloid => "z = r^2 by arclength, G = 4/(1+4r^2)^2",
            Builtin::Hyperbolic => "f(t) = sinh t, G = -1",
            Builtin::Sinclair => "f(t) = exp(-t^2) tanh t, G decreasing from 8",
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::UnknownModel(s.to_owned()))
    }
}

/// `x / sinh x`, with the removable singularity at 0.
fn x_over_sinh<T: Real>(x: T) -> T {
    if x.abs() < T::lit(1e-4) {
        let x2 = x * x;
        T::one() - x2 / T::lit(6.0) + T::lit(7.0 / 360.0) * x2 * x2
    } else {
        x / x.sinh()
    }
}

fn sech2<T: Real>(t: T) -> T {
    let c = t.cosh();
    (c * c).recip()
}

/// Radius `r` of the paraboloid `z = r²` at meridian arclength `t`.
fn paraboloid_radius<T: Real>(t: T) -> T {
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let arclength = |r: T| r / two * (T::one() + four * r * r).sqrt() + (two * r).asinh() / four;
    let mut r = if t < T::one() { t } else { t.sqrt() };
    for _ in 0..60 {
        let step = (arclength(r) - t) / (T::one() + four * r * r).sqrt();
        r = r - step;
        if step.abs() <= T::epsilon() * (T::one() + r) {
            break;
        }
    }
    r
}

impl Builtin {
    pub(crate) fn f<T: Real>(self, t: T) -> T {
        match self {
            Builtin::Plane => t,
            Builtin::Paraboloid => paraboloid_radius(t),
            Builtin::Hyperbolic => t.sinh(),
            Builtin::Sinclair => (-t * t).exp() * t.tanh(),
        }
    }

    pub(crate) fn df<T: Real>(self, t: T) -> T {
        match self {
            Builtin::Plane => T::one(),
            Builtin::Paraboloid => {
                let r = paraboloid_radius(t);
                (T::one() + T::lit(4.0) * r * r).sqrt().recip()
            }
            Builtin::Hyperbolic => t.cosh(),
            Builtin::Sinclair => {
                (-t * t).exp() * (-T::lit(2.0) * t * t.tanh() + sech2(t))
            }
        }
    }

    pub(crate) fn ddf<T: Real>(self, t: T) -> T {
        match self {
            Builtin::Plane => T::zero(),
            Builtin::Paraboloid => {
                let r = paraboloid_radius(t);
                let q = T::one() + T::lit(4.0) * r * r;
                -T::lit(4.0) * r / (q * q)
            }
            Builtin::Hyperbolic => t.sinh(),
            Builtin::Sinclair => {
                let s2 = sech2(t);
                let f = self.f(t);
                (T::lit(4.0) * t * t - T::lit(2.0) - T::lit(2.0) * s2) * f
                    - T::lit(4.0) * t * (-t * t).exp() * s2
            }
        }
    }

    /// `f'/f`, evaluated without forming `f` where it underflows.
    pub(crate) fn log_derivative<T: Real>(self, t: T) -> T {
        match self {
            Builtin::Plane => t.recip(),
            Builtin::Paraboloid => {
                let r = paraboloid_radius(t);
                ((T::one() + T::lit(4.0) * r * r).sqrt() * r).recip()
            }
            Builtin::Hyperbolic => t.tanh().recip(),
            Builtin::Sinclair => {
                let two_t = T::lit(2.0) * t;
                -two_t + T::lit(2.0) / two_t.sinh()
            }
        }
    }

    /// `(f, f'/f)` in one evaluation.
    pub(crate) fn warp<T: Real>(self, t: T) -> (T, T) {
        match self {
            Builtin::Paraboloid => {
                let r = paraboloid_radius(t);
                (r, ((T::one() + T::lit(4.0) * r * r).sqrt() * r).recip())
            }
            _ => (self.f(t), self.log_derivative(t)),
        }
    }

    /// `f''/f`, evaluated without forming `f` where it underflows.
    pub(crate) fn ddf_over_f<T: Real>(self, t: T) -> T {
        match self {
            Builtin::Plane => T::zero(),
            Builtin::Paraboloid => {
                let r = paraboloid_radius(t);
                let q = T::one() + T::lit(4.0) * r * r;
                -T::lit(4.0) / (q * q)
            }
            Builtin::Hyperbolic => T::one(),
            Builtin::Sinclair => {
                // 4t·sech²t / tanh t = 8t / sinh 2t
                T::lit(4.0) * t * t
                    - T::lit(2.0)
                    - T::lit(2.0) * sech2(t)
                    - T::lit(4.0) * x_over_sinh(T::lit(2.0) * t)
            }
        }
    }

    /// Gaussian curvature from its own closed form, independent of `f''`.
    pub(crate) fn curvature<T: Real>(self, t: T) -> T {
        match self {
            Builtin::Plane => T::zero(),
            Builtin::Paraboloid => {
                let r = paraboloid_radius(t);
                let q = T::one() + T::lit(4.0) * r * r;
                T::lit(4.0) / (q * q)
            }
            Builtin::Hyperbolic => -T::one(),
            Builtin::Sinclair => {
                T::lit(4.0) * x_over_sinh(T::lit(2.0) * t) + T::lit(2.0) * sech2(t)
                    - T::lit(4.0) * t * t
                    + T::lit(2.0)
            }
        }
    }
}
