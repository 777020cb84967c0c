//! Dormand–Prince 5(4) integrator with dense output.
//!
//! The driver hands every accepted step to a callback, which can sample the
//! continuous extension, locate sign changes of event functions on it, and
//! stop the integration.

use crate::error::{Error, Result};
use crate::scalar::Real;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance<T> {
    pub rtol: T,
    pub atol: T,
}

impl<T: Real> Tolerance<T> {
    pub fn new(rtol: T, atol: T) -> Self {
        Tolerance { rtol, atol }
    }

    /// Relative tolerance `tol` with absolute floor `tol/100`.
    pub fn relative(tol: T) -> Self {
        Tolerance {
            rtol: tol,
            atol: tol / T::lit(100.0),
        }
    }
}

/// First-order system `y' = F(s, y)`.
pub trait OdeSystem<T: Real, const N: usize> {
    fn rhs(&self, s: T, y: &[T; N]) -> [T; N];

    /// Scaled size of a local error estimate; a step is accepted when ≤ 1.
    fn error_norm(&self, y0: &[T; N], y1: &[T; N], err: &[T; N], tol: &Tolerance<T>) -> T {
        let mut worst = T::zero();
        for i in 0..N {
            let scale = tol.atol + tol.rtol * y0[i].abs().max(y1[i].abs());
            worst = worst.max(err[i].abs() / scale);
        }
        worst
    }
}

/// An accepted step together with its continuous extension.
#[derive(Debug, Clone)]
pub struct Step<T, const N: usize> {
    pub s0: T,
    pub s1: T,
    pub y0: [T; N],
    pub y1: [T; N],
    dense: [[T; N]; 5],
    /// Length of the step the dense coefficients were built for.
    span: T,
}

impl<T: Real, const N: usize> Step<T, N> {
    /// Dense output at `s ∈ [s0, s1]`.
    pub fn at(&self, s: T) -> [T; N] {
        let th = (s - self.s0) / self.span;
        let th1 = T::one() - th;
        let [r1, r2, r3, r4, r5] = &self.dense;
        let mut y = [T::zero(); N];
        for i in 0..N {
            y[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
        }
        y
    }

    /// Sign change of `g` between the ends of the step, as `(s, y(s))`.
    /// The root is refined on the dense output by the Illinois variant of
    /// regula falsi.
    pub fn find_root<G>(&self, g: G) -> Option<(T, [T; N])>
    where
        G: Fn(T, &[T; N]) -> T,
    {
        self.find_root_in(g, self.s0, self.s1)
    }

    /// As [`Step::find_root`], restricted to `[a, b] ⊂ [s0, s1]`.
    pub fn find_root_in<G>(&self, g: G, a: T, b: T) -> Option<(T, [T; N])>
    where
        G: Fn(T, &[T; N]) -> T,
    {
        let ya = if a == self.s0 { self.y0 } else { self.at(a) };
        let yb = if b == self.s1 { self.y1 } else { self.at(b) };
        let ga = g(a, &ya);
        let gb = g(b, &yb);
        if gb == T::zero() {
            return Some((b, yb));
        }
        if !(ga * gb < T::zero()) {
            return None;
        }
        let s = illinois(|s| g(s, &self.at(s)), a, b, ga, gb, T::epsilon() * T::lit(4.0));
        Some((s, self.at(s)))
    }

    /// The part of the step on `[s0, s]`.
    pub fn truncated(&self, s: T) -> Self {
        Step {
            s1: s,
            y1: self.at(s),
            ..self.clone()
        }
    }
}

/// Bracketed root of `g` on `[a, b]` with `g(a)·g(b) < 0`.
pub fn illinois<T: Real, G: FnMut(T) -> T>(mut g: G, mut a: T, mut b: T, mut ga: T, mut gb: T, rel: T) -> T {
    let mut side = 0i8;
    for _ in 0..200 {
        let width = (b - a).abs();
        if width <= rel * (T::one() + a.abs().max(b.abs())) {
            break;
        }
        let mut c = (a * gb - b * ga) / (gb - ga);
        if !(c > a.min(b) && c < a.max(b)) {
            c = (a + b) / T::lit(2.0);
        }
        let gc = g(c);
        if gc == T::zero() {
            return c;
        }
        if gc * gb < T::zero() {
            a = b;
            ga = gb;
            b = c;
            gb = gc;
            side = 0;
        } else {
            b = c;
            gb = gc;
            if side == -1 {
                ga = ga / T::lit(2.0);
            }
            side = -1;
        }
    }
    if ga.abs() < gb.abs() {
        a
    } else {
        b
    }
}

pub enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone)]
pub struct Summary<T, const N: usize> {
    pub s: T,
    pub y: [T; N],
    pub accepted: usize,
    pub rejected: usize,
    pub stopped: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Dopri5<T> {
    pub tol: Tolerance<T>,
    /// Initial step; defaults to `1e−3·|s_end − s0|`.
    pub initial_step: Option<T>,
    pub max_steps: usize,
}

impl<T: Real> Dopri5<T> {
    pub fn new(tol: Tolerance<T>) -> Self {
        Dopri5 {
            tol,
            initial_step: None,
            max_steps: 1_000_000,
        }
    }

    pub fn with_initial_step(mut self, h: T) -> Self {
        self.initial_step = Some(h);
        self
    }

    /// Integrates from `s0` to `s_end` (either direction), calling
    /// `on_step` after every accepted step.
    pub fn run<S, F, const N: usize>(
        &self,
        sys: &S,
        s0: T,
        y0: [T; N],
        s_end: T,
        mut on_step: F,
    ) -> Result<Summary<T, N>>
    where
        S: OdeSystem<T, N>,
        F: FnMut(&Step<T, N>) -> Flow,
    {
        let c = |x: f64| T::lit(x);
        let span = s_end - s0;
        let dir = if span < T::zero() { -T::one() } else { T::one() };
        let mut s = s0;
        let mut y = y0;
        let mut summary = Summary {
            s,
            y,
            accepted: 0,
            rejected: 0,
            stopped: false,
        };
        if span == T::zero() {
            return Ok(summary);
        }
        let mut h = self
            .initial_step
            .unwrap_or(span.abs() * c(1e-3))
            .abs()
            .min(span.abs());
        let mut k1 = sys.rhs(s, &y);
        let axpy = |y: &[T; N], terms: &[(f64, &[T; N])], h: T| {
            let mut out = *y;
            for (coef, k) in terms {
                let w = h * T::lit(*coef);
                for i in 0..N {
                    out[i] = out[i] + w * k[i];
                }
            }
            out
        };
        let mut last_step = false;
        let mut steps = 0usize;
        loop {
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::Integration(format!(
                    "step budget of {} exhausted at s = {}",
                    self.max_steps, s
                )));
            }
            let remaining = (s_end - s) * dir;
            if h >= remaining {
                h = remaining;
                last_step = true;
            }
            if h <= T::epsilon() * c(16.0) * (T::one() + s.abs()) {
                return Err(Error::StepSizeUnderflow {
                    s: s.to_f64_lossy(),
                    h: h.to_f64_lossy(),
                });
            }
            let hs = h * dir;
            let k2 = sys.rhs(s + hs * c(C2), &axpy(&y, &[(A21, &k1)], hs));
            let k3 = sys.rhs(s + hs * c(C3), &axpy(&y, &[(A31, &k1), (A32, &k2)], hs));
            let k4 = sys.rhs(
                s + hs * c(C4),
                &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hs),
            );
            let k5 = sys.rhs(
                s + hs * c(C5),
                &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hs),
            );
            let k6 = sys.rhs(
                s + hs,
                &axpy(
                    &y,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                    hs,
                ),
            );
            let y1 = axpy(
                &y,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
                hs,
            );
            let s1 = if last_step { s_end } else { s + hs };
            let k7 = sys.rhs(s1, &y1);
            let mut err = [T::zero(); N];
            for i in 0..N {
                err[i] = hs
                    * (c(E1) * k1[i] + c(E3) * k3[i] + c(E4) * k4[i] + c(E5) * k5[i] + c(E6) * k6[i]
                        + c(E7) * k7[i]);
            }
            let norm = sys.error_norm(&y, &y1, &err, &self.tol);
            if !(norm <= T::one()) || y1.iter().any(|v| !v.is_finite()) {
                summary.rejected += 1;
                let factor = if norm.is_finite() {
                    (c(0.9) * norm.powf(c(-0.2))).max(c(0.1))
                } else {
                    c(0.1)
                };
                h = h * factor.min(c(0.9));
                last_step = false;
                continue;
            }

            let mut dense = [[T::zero(); N]; 5];
            for i in 0..N {
                let r2 = y1[i] - y[i];
                let r3 = hs * k1[i] - r2;
                dense[0][i] = y[i];
                dense[1][i] = r2;
                dense[2][i] = r3;
                dense[3][i] = r2 - hs * k7[i] - r3;
                dense[4][i] = hs
                    * (c(D1) * k1[i] + c(D3) * k3[i] + c(D4) * k4[i] + c(D5) * k5[i] + c(D6) * k6[i]
                        + c(D7) * k7[i]);
            }
            let step = Step {
                s0: s,
                s1,
                y0: y,
                y1,
                dense,
                span: hs,
            };
            summary.accepted += 1;
            s = s1;
            y = y1;
            k1 = k7;
            summary.s = s;
            summary.y = y;
            if let Flow::Stop = on_step(&step) {
                summary.stopped = true;
                return Ok(summary);
            }
            if last_step {
                return Ok(summary);
            }
            let factor = if norm == T::zero() {
                c(5.0)
            } else {
                (c(0.9) * norm.powf(c(-0.2))).clamp(c(0.2), c(5.0))
            };
            h = h * factor;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;

    impl OdeSystem<f64, 2> for Oscillator {
        fn rhs(&self, _s: f64, y: &[f64; 2]) -> [f64; 2] {
            [y[1], -y[0]]
        }
    }

    #[test]
    fn harmonic_oscillator_accuracy() {
        let solver = Dopri5::new(Tolerance::new(1e-11, 1e-13));
        let out = solver.run(&Oscillator, 0.0, [0.0, 1.0], 10.0, |_| Flow::Continue).unwrap();
        assert!((out.y[0] - 10f64.sin()).abs() < 1e-9);
        assert!((out.y[1] - 10f64.cos()).abs() < 1e-9);
        assert_eq!(out.s, 10.0);
    }

    #[test]
    fn backward_integration() {
        let solver = Dopri5::new(Tolerance::new(1e-11, 1e-13));
        let out = solver.run(&Oscillator, 2.0, [2f64.sin(), 2f64.cos()], -1.0, |_| Flow::Continue).unwrap();
        assert!((out.y[0] - (-1f64).sin()).abs() < 1e-9);
    }

    #[test]
    fn dense_output_locates_zero_of_sine() {
        let solver = Dopri5::new(Tolerance::new(1e-10, 1e-12));
        let mut root = None;
        solver
            .run(&Oscillator, 0.0, [0.0, 1.0], 5.0, |step| {
                if step.s0 > 0.0 {
                    if let Some((s, _)) = step.find_root(|_, y| y[0]) {
                        root = Some(s);
                        return Flow::Stop;
                    }
                }
                Flow::Continue
            })
            .unwrap();
        assert!((root.unwrap() - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn illinois_converges() {
        let r = illinois(|x: f64| x * x - 2.0, 0.0, 2.0, -2.0, 2.0, 1e-15);
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }
}
