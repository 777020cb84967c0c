//! Two-point geodesics on profiles that increase up to the outer endpoint.
//!
//! There every geodesic has at most one turning point, a pericentre `t_p`
//! with `f(t_p) = |ν|`, and its θ-sweep and length between two radii are
//! quadratures. Far from the pole these stay accurate where integrating
//! the flow and aiming at a meridian does not: a geodesic leaving the
//! source almost radially crosses the target meridian at a grazing angle.

use super::shooting::{Candidate, DistanceOptions};
use crate::error::Result;
use crate::ode::illinois;
use crate::profile::ProfileModel;
use crate::quadrature::integrate;
use crate::scalar::Real;

const MONOTONE_GRID: usize = 1024;
const QUAD_REL: f64 = 1e-14;
const QUAD_ABS: f64 = 1e-300;
const QUAD_INTERVALS: usize = 400;
/// Below this squared distance to the pericentre, `f(t) − f(t_p)` comes
/// from a two-point Gauss rule on `f'` instead of a difference.
const NEAR_PERICENTRE: f64 = 1e-3;

/// Whether `f' > 0` on a uniform grid over `(0, t_hi]`.
pub(crate) fn increasing_up_to<T: Real>(model: &ProfileModel<T>, t_hi: T) -> bool {
    let n = T::from_usize_lossy(MONOTONE_GRID);
    (1..=MONOTONE_GRID).all(|k| model.df(t_hi * T::from_usize_lossy(k) / n) > T::zero())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    /// Leaves the source outward; the pericentre lies behind it.
    Outward,
    /// Leaves inward and turns at the pericentre.
    Inward,
}

/// Geodesic family member with pericentre `peri` and `ν = f(peri)`.
struct Orbit<'a, T> {
    model: &'a ProfileModel<T>,
    peri: T,
    nu: T,
}

impl<'a, T: Real> Orbit<'a, T> {
    fn new(model: &'a ProfileModel<T>, peri: T) -> Self {
        Orbit { model, peri, nu: model.f(peri) }
    }

    /// `f(t_p + w²) − ν` without cancellation near the pericentre.
    fn rise(&self, h: T) -> T {
        if h <= T::lit(NEAR_PERICENTRE) {
            let k = T::lit(0.288_675_134_594_812_9);
            let half = T::lit(0.5);
            let d1 = self.model.df(self.peri + h * (half - k));
            let d2 = self.model.df(self.peri + h * (half + k));
            h * half * (d1 + d2)
        } else {
            self.model.f(self.peri + h) - self.nu
        }
    }

    /// `(dθ/dw, d(s − t)/dw)` under `t = t_p + w²`.
    fn rates(&self, w: T) -> (T, T) {
        let h = w * w;
        let f = self.model.f(self.peri + h);
        let q = (self.rise(h) * (f + self.nu)).sqrt();
        let two_w = w + w;
        (two_w * self.nu / (f * q), two_w * self.nu * self.nu / (q * (f + q)))
    }

    /// Sweep and length between the radii `t0 ≤ t1`, both at least `peri`.
    fn leg(&self, t0: T, t1: T) -> (T, T) {
        if t1 <= t0 {
            return (T::zero(), T::zero());
        }
        let w0 = (t0 - self.peri).max(T::zero()).sqrt();
        let w1 = (t1 - self.peri).max(T::zero()).sqrt();
        let (abs, rel) = (T::lit(QUAD_ABS), T::lit(QUAD_REL));
        let sweep = integrate(|w| self.rates(w).0, w0, w1, abs, rel, QUAD_INTERVALS).value;
        let excess = integrate(|w| self.rates(w).1, w0, w1, abs, rel, QUAD_INTERVALS).value;
        (sweep, (t1 - t0) + excess)
    }
}

struct Problem<'a, T> {
    model: &'a ProfileModel<T>,
    t_a: T,
    t_b: T,
    target: T,
}

impl<'a, T: Real> Problem<'a, T> {
    /// Sweep and length from the source to the outer radius.
    fn trace(&self, branch: Branch, peri: T) -> (T, T) {
        let orbit = Orbit::new(self.model, peri);
        let (s_out, l_out) = orbit.leg(self.t_a, self.t_b);
        match branch {
            Branch::Outward => (s_out, l_out),
            Branch::Inward => {
                let (s_in, l_in) = orbit.leg(peri, self.t_a);
                (s_out + s_in + s_in, l_out + l_in + l_in)
            }
        }
    }

    fn miss(&self, branch: Branch, peri: T) -> T {
        self.trace(branch, peri).0 - self.target
    }

    fn candidate(&self, branch: Branch, peri: T) -> Candidate<T> {
        let (_, length) = self.trace(branch, peri);
        let orbit = Orbit::new(self.model, peri);
        let ratio = (orbit.nu / self.model.f(self.t_a)).min(T::one());
        let phi = match branch {
            Branch::Outward => ratio.asin(),
            Branch::Inward => T::PI() - ratio.asin(),
        };
        Candidate {
            phi,
            length,
            nu: orbit.nu,
            miss: T::zero(),
        }
    }
}

fn pericentre_grid<T: Real>(t_a: T, samples: usize) -> Vec<T> {
    let n = samples.max(2);
    let mut grid: Vec<T> = (1..=n)
        .map(|k| t_a * T::from_usize_lossy(k) / T::from_usize_lossy(n))
        .collect();
    for k in 2..=14 {
        grid.push(t_a * T::lit(10f64.powi(-k)));
    }
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite radii"));
    grid.dedup();
    grid
}

/// Geodesics from `(t_a, 0)` to `(t_b, target)` turning toward increasing
/// θ, for `0 < t_a ≤ t_b` with `f` increasing on `(0, t_b]` and
/// `target ∈ (0, π]`. Headings are measured like
/// [`GeodesicState::launch`](super::GeodesicState::launch).
pub(crate) fn clairaut_candidates<T: Real>(
    model: &ProfileModel<T>,
    t_a: T,
    t_b: T,
    target: T,
    opts: &DistanceOptions<T>,
) -> Result<Vec<Candidate<T>>> {
    let problem = Problem { model, t_a, t_b, target };
    let grid = pericentre_grid(t_a, opts.samples);
    let mut out = Vec::new();
    for branch in [Branch::Outward, Branch::Inward] {
        let misses: Vec<T> = grid.iter().map(|&p| problem.miss(branch, p)).collect();
        for i in 0..grid.len() {
            if misses[i] == T::zero() {
                out.push(problem.candidate(branch, grid[i]));
                continue;
            }
            if i + 1 < grid.len() && misses[i] * misses[i + 1] < T::zero() {
                // the log of the pericentre keeps small radii resolved
                let root = illinois(
                    |x: T| problem.miss(branch, x.exp()),
                    grid[i].ln(),
                    grid[i + 1].ln(),
                    misses[i],
                    misses[i + 1],
                    T::epsilon() * T::lit(4.0),
                );
                out.push(problem.candidate(branch, root.exp().min(t_a)));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_check() {
        assert!(increasing_up_to(&ProfileModel::<f64>::hyperbolic(), 30.0));
        assert!(increasing_up_to(&ProfileModel::<f64>::plane(), 30.0));
        assert!(!increasing_up_to(&ProfileModel::<f64>::sinclair(), 3.0));
    }

    #[test]
    fn plane_sweep_closed_form() {
        // a line at distance p from the origin sweeps acos(p/t1) − acos(p/t0)
        let m = ProfileModel::<f64>::plane();
        let orbit = Orbit::new(&m, 0.7);
        let (sweep, len) = orbit.leg(1.0, 3.0);
        let exact = (0.7f64 / 3.0).acos() - (0.7f64 / 1.0).acos();
        assert!((sweep - exact).abs() < 1e-14);
        let exact_len = (9.0f64 - 0.49).sqrt() - (1.0f64 - 0.49).sqrt();
        assert!((len - exact_len).abs() < 1e-14);
        let (sweep, len) = orbit.leg(0.7, 2.0);
        assert!((sweep - (0.35f64).acos()).abs() < 1e-13);
        assert!((len - (4.0f64 - 0.49).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn hyperbolic_far_target() {
        let m = ProfileModel::<f64>::hyperbolic();
        let (ta, tb, th) = (6.828184234560703f64, 25.56799566692472f64, 1.383921175877777f64);
        let c = clairaut_candidates(&m, ta, tb, th, &DistanceOptions::default()).unwrap();
        let best = c.iter().map(|c| c.length).fold(f64::INFINITY, f64::min);
        // cosh d = cosh a cosh b − sinh a sinh b cos θ, in a cancellation-free form
        let exact = {
            let x = (ta - tb).cosh() + ta.sinh() * tb.sinh() * (1.0 - th.cos());
            x.acosh()
        };
        assert!((best - exact).abs() < 1e-9, "{best} vs {exact}");
    }
}
