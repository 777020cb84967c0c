//! Rays from a point, the mass of rays, Busemann functions of meridian
//! rays and the estimates that make them exhaustions.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::{distance_with, trace, DistanceOptions, GeodesicState, PolarPoint};
use crate::profile::ProfileModel;
use crate::scalar::{wrap_pi, Real};

/// Checkpoints of the ray test as fractions of the horizon.
pub const CHECKPOINTS: [f64; 4] = [0.125, 0.25, 0.5, 1.0];
/// Directions of the uniform fallback scan of the ray arc.
pub const MASS_SAMPLES: usize = 512;
/// Directions used to audit a bisected ray arc.
pub const AUDIT_DIRECTIONS: usize = 32;
/// Resolution of the bisected arc boundaries.
pub const BOUNDARY_TOL: f64 = 1e-6;
/// Largest change of the asymptotic direction between `T` and `2T` still
/// called stable.
pub const STABLE_DRIFT: f64 = 1e-3;
/// Beyond this drift the direction is flagged unstable.
pub const UNSTABLE_DRIFT: f64 = 1e-2;
/// Gradient norm and angle thresholds of the alignment check.
pub const ALIGNMENT_TOL: f64 = 5e-2;
/// Slack of the angle certificate against `π/2 − δ`.
pub const CERTIFICATE_SLACK: f64 = 1e-3;
/// Slack of the growth bound.
pub const GROWTH_SLACK: f64 = 1e-3;
/// Step of the outward scan for the radius a geodesic cannot pass.
const TRAP_STEP: f64 = 1e-2;

/// Ray tolerance used when none is given: `1e-4·(1 + t_q)`.
pub fn default_epsilon<T: Real>(q: &PolarPoint<T>) -> T {
    T::lit(1e-4) * (T::one() + q.t)
}

fn check_horizon<T: Real>(q: &PolarPoint<T>, horizon: T) -> Result<()> {
    let need = T::lit(10.0) * (T::one() + q.t);
    if !(horizon >= need) {
        return Err(Error::Precondition(format!(
            "horizon {horizon} is below 10·(1 + t_q) = {need}"
        )));
    }
    Ok(())
}

/// Outcome of the truncated ray test in one direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayProbe<T> {
    pub q: PolarPoint<T>,
    pub phi: T,
    pub horizon: T,
    pub epsilon: T,
    pub is_ray: bool,
    /// Largest `s − d(q, γ(s))` over the checkpoints. When `trapped_below`
    /// is set it is the lower bound `T − t_q − t_trap` instead.
    pub worst_deficit: T,
    /// Radius the geodesic never passes, when that alone decides the test.
    pub trapped_below: Option<T>,
}

/// First radius beyond `t_q` where `|f| < |ν|`: a geodesic with Clairaut
/// constant ν cannot get past it.
fn trapping_radius<T: Real>(model: &ProfileModel<T>, t_q: T, nu: T, reach: T) -> Option<T> {
    let h = T::lit(TRAP_STEP);
    let n = (reach / h).ceil().to_f64_lossy() as usize;
    (1..=n)
        .map(|k| t_q + h * T::from_usize_lossy(k))
        .find(|&t| model.f(t).abs() < nu.abs())
}

/// Checks whether the geodesic leaving `q` at heading `phi` stays
/// minimizing up to arclength `horizon`.
pub fn is_ray<T: Real>(model: &ProfileModel<T>, q: &PolarPoint<T>, phi: T, horizon: T, epsilon: T) -> Result<RayProbe<T>> {
    is_ray_with(model, q, phi, horizon, epsilon, &DistanceOptions::default())
}

pub fn is_ray_with<T: Real>(
    model: &ProfileModel<T>,
    q: &PolarPoint<T>,
    phi: T,
    horizon: T,
    epsilon: T,
    opts: &DistanceOptions<T>,
) -> Result<RayProbe<T>> {
    check_horizon(q, horizon)?;
    let mut probe = RayProbe {
        q: *q,
        phi,
        horizon,
        epsilon,
        is_ray: true,
        worst_deficit: T::zero(),
        trapped_below: None,
    };
    if q.is_pole() {
        // meridians from the pole realize the distance t
        return Ok(probe);
    }
    let start = GeodesicState::launch(model, *q, phi);
    if start.nu != T::zero() {
        if let Some(t_trap) = trapping_radius(model, q.t, start.nu, horizon) {
            // d(q, γ(s)) ≤ t_q + t(γ(s)) through the pole
            let bound = horizon - q.t - t_trap;
            if bound > epsilon {
                probe.is_ray = false;
                probe.worst_deficit = bound;
                probe.trapped_below = Some(t_trap);
                return Ok(probe);
            }
        }
    }
    let stamps: Vec<T> = CHECKPOINTS.iter().map(|&c| horizon * T::lit(c)).collect();
    let points = trace(model, &start, &stamps, opts.tol)?;
    let mut worst = T::neg_infinity();
    for (&s, x) in stamps.iter().zip(&points) {
        let d = distance_with(model, q, x, opts)?.length;
        worst = worst.max(s - d);
    }
    probe.worst_deficit = worst;
    probe.is_ray = worst <= epsilon;
    Ok(probe)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassMethod {
    Bisection,
    Sampling,
}

/// Estimated measure of the set of ray directions at `q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayMassReport<T> {
    pub q: PolarPoint<T>,
    pub mu: T,
    /// Extent of the ray arc toward increasing and toward decreasing θ.
    pub boundary_angles: [T; 2],
    pub horizon: T,
    pub method: MassMethod,
    /// False when the bisected arc failed its audit and the uniform scan
    /// was used instead.
    pub audit_passed: bool,
}

pub fn ray_mass<T: Real>(model: &ProfileModel<T>, q: &PolarPoint<T>, horizon: T, epsilon: T) -> Result<RayMassReport<T>> {
    ray_mass_with(model, q, horizon, epsilon, &DistanceOptions::default())
}

/// Ray directions at `q` form an arc around the outward meridian; its two
/// ends are bisected and a coarse ring of directions audits the result.
/// If the audit disagrees, `μ` comes from a uniform scan instead.
pub fn ray_mass_with<T: Real>(
    model: &ProfileModel<T>,
    q: &PolarPoint<T>,
    horizon: T,
    epsilon: T,
    opts: &DistanceOptions<T>,
) -> Result<RayMassReport<T>> {
    check_horizon(q, horizon)?;
    let pi = T::PI();
    let mut report = RayMassReport {
        q: *q,
        mu: T::TAU(),
        boundary_angles: [pi, pi],
        horizon,
        method: MassMethod::Bisection,
        audit_passed: true,
    };
    if q.is_pole() {
        return Ok(report);
    }
    let classify = |phi: T| -> Result<bool> { Ok(is_ray_with(model, q, phi, horizon, epsilon, opts)?.is_ray) };
    let arc = if classify(T::zero())? {
        let mut ends = [pi, pi];
        if !classify(pi)? {
            for (k, side) in [T::one(), -T::one()].into_iter().enumerate() {
                let (mut lo, mut hi) = (T::zero(), pi);
                while hi - lo > T::lit(BOUNDARY_TOL) {
                    let mid = (lo + hi) / T::lit(2.0);
                    if classify(side * mid)? {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                ends[k] = (lo + hi) / T::lit(2.0);
            }
        }
        audit_arc(&classify, ends)?.then_some(ends)
    } else {
        None
    };
    match arc {
        Some(ends) => {
            report.boundary_angles = ends;
            report.mu = ends[0] + ends[1];
        }
        None => {
            let (mu, ends) = sample_arc(&classify)?;
            report.mu = mu;
            report.boundary_angles = ends;
            report.method = MassMethod::Sampling;
            report.audit_passed = false;
        }
    }
    Ok(report)
}

fn ring<T: Real>(n: usize, offset: f64) -> Vec<T> {
    (0..n)
        .map(|k| -T::PI() + T::TAU() * (T::from_usize_lossy(k) + T::lit(offset)) / T::from_usize_lossy(n))
        .collect()
}

fn audit_arc<T: Real, C>(classify: &C, ends: [T; 2]) -> Result<bool>
where
    C: Fn(T) -> Result<bool> + Sync,
{
    let margin = T::lit(2.0 * BOUNDARY_TOL);
    let checks: Vec<T> = ring(AUDIT_DIRECTIONS, 0.5)
        .into_iter()
        .filter(|&psi: &T| (psi - ends[0]).abs() > margin && (psi + ends[1]).abs() > margin)
        .collect();
    let verdicts: Result<Vec<bool>> = checks
        .par_iter()
        .map(|&psi| {
            let inside = psi < ends[0] && psi > -ends[1];
            Ok(classify(psi)? == inside)
        })
        .collect();
    Ok(verdicts?.into_iter().all(|ok| ok))
}

/// `μ` as the sampled fraction of ray directions, with the extent of the
/// run of rays through heading 0.
fn sample_arc<T: Real, C>(classify: &C) -> Result<(T, [T; 2])>
where
    C: Fn(T) -> Result<bool> + Sync,
{
    let n = MASS_SAMPLES;
    let headings: Vec<T> = ring(n, 0.0);
    let rays: Result<Vec<bool>> = headings.par_iter().map(|&psi| classify(psi)).collect();
    let rays = rays?;
    let count = rays.iter().filter(|&&r| r).count();
    let mu = T::TAU() * T::from_usize_lossy(count) / T::from_usize_lossy(n);
    let zero = n / 2;
    let mut ends = [T::zero(); 2];
    if rays[zero] {
        let step = T::TAU() / T::from_usize_lossy(n);
        let up = (1..=zero).take_while(|&k| rays[(zero + k) % n]).count();
        let down = (1..=zero).take_while(|&k| rays[zero - k]).count();
        ends = [step * T::from_usize_lossy(up), step * T::from_usize_lossy(down)];
    }
    Ok((mu, ends))
}

/// The radius and angle margin of the ray-mass estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusMargin<T> {
    pub radius: T,
    pub delta: T,
}

/// Ray masses along the meridian θ = 0 and the `(R, δ)` they support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayScan<T> {
    pub masses: Vec<RayMassReport<T>>,
    pub found: Option<RadiusMargin<T>>,
}

impl<T: Real> RayScan<T> {
    /// CSV with columns `t_q,mu,boundary_pos,boundary_neg,method`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t_q", "mu", "boundary_pos", "boundary_neg", "method"])?;
        for m in &self.masses {
            let method = match m.method {
                MassMethod::Bisection => "bisection",
                MassMethod::Sampling => "sampling",
            };
            w.write_record([
                format!("{:e}", m.q.t),
                format!("{:e}", m.mu),
                format!("{:e}", m.boundary_angles[0]),
                format!("{:e}", m.boundary_angles[1]),
                method.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Scans the ray mass at `(r, 0)` for every radius and returns the
/// smallest scanned `R` with `μ ≤ π − 2δ` at every scanned radius from `R`
/// on, for the largest such `δ > 0`.
pub fn find_r_delta<T: Real>(model: &ProfileModel<T>, radii: &[T], horizon: T) -> Result<RayScan<T>> {
    find_r_delta_with(model, radii, horizon, &DistanceOptions::default())
}

pub fn find_r_delta_with<T: Real>(
    model: &ProfileModel<T>,
    radii: &[T],
    horizon: T,
    opts: &DistanceOptions<T>,
) -> Result<RayScan<T>> {
    let c = model.total_curvature();
    if !(c.finite && c.c_limit > T::PI()) {
        return Err(Error::Precondition(format!(
            "total curvature {} of `{}` does not exceed π",
            c.c_limit,
            model.name()
        )));
    }
    let mut radii = radii.to_vec();
    radii.sort_by(|a, b| a.partial_cmp(b).expect("finite radii"));
    let masses: Result<Vec<RayMassReport<T>>> = radii
        .par_iter()
        .map(|&r| {
            let q = PolarPoint::new(r, T::zero());
            ray_mass_with(model, &q, horizon, default_epsilon(&q), opts)
        })
        .collect();
    let masses = masses?;
    let mut found = None;
    let mut worst = T::neg_infinity();
    for m in masses.iter().rev() {
        worst = worst.max(m.mu);
        if worst < T::PI() {
            let mut delta = (T::PI() - worst) / T::lit(2.0);
            // keep μ ≤ π − 2δ exact in floating point
            while T::PI() - (delta + delta) < worst {
                delta = delta * (T::one() - T::epsilon());
            }
            found = Some(RadiusMargin { radius: m.q.t, delta });
        } else {
            break;
        }
    }
    Ok(RayScan { masses, found })
}

/// Outward meridian ray from `origin`; from the pole it leaves along the
/// meridian θ = `origin.theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeridianRay<T> {
    pub origin: PolarPoint<T>,
}

impl<T: Real> MeridianRay<T> {
    pub fn new(origin: PolarPoint<T>) -> Self {
        MeridianRay { origin }
    }

    pub fn from_pole(theta: T) -> Self {
        MeridianRay {
            origin: PolarPoint::new(T::zero(), theta),
        }
    }

    pub fn point(&self, s: T) -> PolarPoint<T> {
        PolarPoint::new(self.origin.t + s, self.origin.theta)
    }
}

/// `T − d(x, γ(T))` without horizon checks.
fn horizon_value<T: Real>(
    model: &ProfileModel<T>,
    ray: &MeridianRay<T>,
    x: &PolarPoint<T>,
    horizon: T,
    opts: &DistanceOptions<T>,
) -> Result<T> {
    Ok(horizon - distance_with(model, x, &ray.point(horizon), opts)?.length)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BusemannValue<T> {
    pub x: PolarPoint<T>,
    pub horizon: T,
    /// `F_T(x)`.
    pub value: T,
    /// `F_{2T}(x)`.
    pub doubled: T,
    /// `|F_{2T}(x) − F_T(x)|`.
    pub estimate: T,
}

pub fn busemann_value<T: Real>(
    model: &ProfileModel<T>,
    ray: &MeridianRay<T>,
    x: &PolarPoint<T>,
    horizon: T,
) -> Result<BusemannValue<T>> {
    busemann_value_with(model, ray, x, horizon, &DistanceOptions::default())
}

pub fn busemann_value_with<T: Real>(
    model: &ProfileModel<T>,
    ray: &MeridianRay<T>,
    x: &PolarPoint<T>,
    horizon: T,
    opts: &DistanceOptions<T>,
) -> Result<BusemannValue<T>> {
    check_horizon(x, horizon)?;
    let value = horizon_value(model, ray, x, horizon, opts)?;
    let doubled = horizon_value(model, ray, x, horizon * T::lit(2.0), opts)?;
    Ok(BusemannValue {
        x: *x,
        horizon,
        value,
        doubled,
        estimate: (doubled - value).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    /// Drift within [`STABLE_DRIFT`].
    Stable,
    /// Drift between the two thresholds.
    Marginal,
    /// Drift above [`UNSTABLE_DRIFT`], typically near a point where `F` is
    /// not differentiable.
    Unstable,
}

/// Initial heading at `q` of the minimal geodesic toward `γ(T)`, compared
/// with the one toward `γ(2T)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticDirection<T> {
    pub q: PolarPoint<T>,
    pub horizon: T,
    pub angle: T,
    pub far_angle: T,
    pub drift: T,
    pub stability: Stability,
}

pub fn asymptotic_direction<T: Real>(
    model: &ProfileModel<T>,
    ray: &MeridianRay<T>,
    q: &PolarPoint<T>,
    horizon: T,
) -> Result<AsymptoticDirection<T>> {
    asymptotic_direction_with(model, ray, q, horizon, &DistanceOptions::default())
}

pub fn asymptotic_direction_with<T: Real>(
    model: &ProfileModel<T>,
    ray: &MeridianRay<T>,
    q: &PolarPoint<T>,
    horizon: T,
    opts: &DistanceOptions<T>,
) -> Result<AsymptoticDirection<T>> {
    if q.is_pole() {
        return Err(Error::Precondition("the pole has no heading to report".into()));
    }
    check_horizon(q, horizon)?;
    let angle = distance_with(model, q, &ray.point(horizon), opts)?.phi;
    let far_angle = distance_with(model, q, &ray.point(horizon * T::lit(2.0)), opts)?.phi;
    let drift = wrap_pi(far_angle - angle).abs();
    Ok(AsymptoticDirection {
        q: *q,
        horizon,
        angle,
        far_angle,
        drift,
        stability: stability_of(drift),
    })
}

fn stability_of<T: Real>(drift: T) -> Stability {
    if drift <= T::lit(STABLE_DRIFT) {
        Stability::Stable
    } else if drift <= T::lit(UNSTABLE_DRIFT) {
        Stability::Marginal
    } else {
        Stability::Unstable
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BusemannSample<T> {
    pub value: BusemannValue<T>,
    pub direction: AsymptoticDirection<T>,
}

/// Busemann values and asymptotic directions of one ray at sample points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BusemannField<T> {
    pub ray: MeridianRay<T>,
    pub horizon: T,
    pub samples: Vec<BusemannSample<T>>,
}

impl<T: Real> BusemannField<T> {
    /// CSV with columns `t,theta,value,doubled,estimate,direction,drift`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "theta", "value", "doubled", "estimate", "direction", "drift"])?;
        for s in &self.samples {
            let v = &s.value;
            let d = &s.direction;
            w.write_record(
                [v.x.t, v.x.theta, v.value, v.doubled, v.estimate, d.angle, d.drift].map(|x| format!("{x:e}")),
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn busemann_field<T: Real>(
    model: &ProfileModel<T>,
    ray: &MeridianRay<T>,
    points: &[PolarPoint<T>],
    horizon: T,
) -> Result<BusemannField<T>> {
    busemann_field_with(model, ray, points, horizon, &DistanceOptions::default())
}

pub fn busemann_field_with<T: Real>(
    model: &ProfileModel<T>,
    ray: &MeridianRay<T>,
    points: &[PolarPoint<T>],
    horizon: T,
    opts: &DistanceOptions<T>,
) -> Result<BusemannField<T>> {
    let samples: Result<Vec<BusemannSample<T>>> = points
        .par_iter()
        .map(|x| {
            Ok(BusemannSample {
                value: busemann_value_with(model, ray, x, horizon, opts)?,
                direction: asymptotic_direction_with(model, ray, x, horizon, opts)?,
            })
        })
        .collect();
    Ok(BusemannField {
        ray: *ray,
        horizon,
        samples: samples?,
    })
}

/// Arclengths along the asymptotic ray at which additivity is checked.
pub const ADDITIVITY_STEPS: [f64; 3] = [0.5, 1.0, 2.0];
/// Floor of the additivity allowance, for points whose convergence
/// estimate vanishes.
pub const ADDITIVITY_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdditivitySample<T> {
    pub s: T,
    /// `F_T(σ(s)) − s − F_T(σ(0))`.
    pub residual: T,
}

/// `F` grows at unit rate along the asymptotic ray from `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditivityReport<T> {
    pub x: PolarPoint<T>,
    pub direction: AsymptoticDirection<T>,
    pub base: BusemannValue<T>,
    /// `2·estimate + floor`.
    pub allowance: T,
    pub samples: Vec<AdditivitySample<T>>,
    pub passed: bool,
}

pub fn additivity_check<T: Real>(
    model: &ProfileModel<T>,
    ray: &MeridianRay<T>,
    x: &PolarPoint<T>,
    horizon: T,
) -> Result<AdditivityReport<T>> {
    additivity_check_with(model, ray, x, horizon, &DistanceOptions::default())
}

pub fn additivity_check_with<T: Real>(
    model: &ProfileModel<T>,
    ray: &MeridianRay<T>,
    x: &PolarPoint<T>,
    horizon: T,
    opts: &DistanceOptions<T>,
) -> Result<AdditivityReport<T>> {
    let base = busemann_value_with(model, ray, x, horizon, opts)?;
    let direction = asymptotic_direction_with(model, ray, x, horizon, opts)?;
    let start = GeodesicState::launch(model, *x, direction.angle);
    let stamps: Vec<T> = ADDITIVITY_STEPS.iter().map(|&s| T::lit(s)).collect();
    let points = trace(model, &start, &stamps, opts.tol)?;
    let mut samples = Vec::with_capacity(stamps.len());
    for (&s, p) in stamps.iter().zip(&points) {
        let v = horizon_value(model, ray, p, horizon, opts)?;
        samples.push(AdditivitySample {
            s,
            residual: v - s - base.value,
        });
    }
    let allowance = T::lit(2.0) * base.estimate + T::lit(ADDITIVITY_FLOOR);
    let passed = samples.iter().all(|a| a.residual.abs() <= allowance);
    Ok(AdditivityReport {
        x: *x,
        direction,
        base,
        allowance,
        samples,
        passed,
    })
}

/// Finite-difference gradient of `F_T` at `q` against the asymptotic
/// direction there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientAlignment<T> {
    pub q: PolarPoint<T>,
    pub step: T,
    /// Components along the outward meridian and along increasing θ, in
    /// the orthonormal frame.
    pub gradient: [T; 2],
    pub norm: T,
    /// Heading of the gradient, measured like geodesic headings.
    pub heading: T,
    pub direction: AsymptoticDirection<T>,
    pub norm_error: T,
    pub angle_error: T,
    pub passed: bool,
}

pub fn gradient_alignment_check<T: Real>(
    model: &ProfileModel<T>,
    ray: &MeridianRay<T>,
    q: &PolarPoint<T>,
    horizon: T,
    h: T,
) -> Result<GradientAlignment<T>> {
    gradient_alignment_check_with(model, ray, q, horizon, h, &DistanceOptions::default())
}

/// Fails with [`Error::Unstable`] when the asymptotic direction at `q` is
/// not stable across horizons.
pub fn gradient_alignment_check_with<T: Real>(
    model: &ProfileModel<T>,
    ray: &MeridianRay<T>,
    q: &PolarPoint<T>,
    horizon: T,
    h: T,
    opts: &DistanceOptions<T>,
) -> Result<GradientAlignment<T>> {
    if !(h > T::zero()) || !(q.t > h + h) {
        return Err(Error::Precondition(format!("step {h} needs 0 < 2h < t_q = {}", q.t)));
    }
    let direction = asymptotic_direction_with(model, ray, q, horizon, opts)?;
    if direction.stability != Stability::Stable {
        return Err(Error::Unstable(format!(
            "asymptotic direction at ({}, {}) drifts by {} between horizons",
            q.t, q.theta, direction.drift
        )));
    }
    let value = |x: PolarPoint<T>| horizon_value(model, ray, &x, horizon, opts);
    let two_h = h + h;
    let d_theta = h / model.f(q.t);
    let g_t = (value(PolarPoint::new(q.t + h, q.theta))? - value(PolarPoint::new(q.t - h, q.theta))?) / two_h;
    let g_th = (value(PolarPoint::new(q.t, q.theta + d_theta))? - value(PolarPoint::new(q.t, q.theta - d_theta))?) / two_h;
    let norm = g_t.hypot(g_th);
    let heading = g_th.atan2(g_t);
    let norm_error = (norm - T::one()).abs();
    let angle_error = wrap_pi(heading - direction.angle).abs();
    let tol = T::lit(ALIGNMENT_TOL);
    Ok(GradientAlignment {
        q: *q,
        step: h,
        gradient: [g_t, g_th],
        norm,
        heading,
        direction,
        norm_error,
        angle_error,
        passed: norm_error <= tol && angle_error <= tol,
    })
}

/// Sample layout of the main-theorem suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremGrid<T> {
    /// Radii of the certificate grid (only those beyond `R` are used).
    pub radii: Vec<T>,
    /// Meridians of the certificate grid.
    pub angles: usize,
    /// Outer radius of the growth samples.
    pub outer: T,
    pub radial_samples: usize,
    /// Points on the `R`-sphere for the minimum of `F`.
    pub sphere_samples: usize,
    /// Levels of the sublevel bound.
    pub levels: Vec<T>,
}

impl<T: Real> TheoremGrid<T> {
    /// `n_radii` radii evenly spaced in `(radius, outer]`, `angles`
    /// meridians, 32 growth samples, 64 sphere points.
    pub fn beyond(radius: T, outer: T, n_radii: usize, angles: usize, levels: Vec<T>) -> Self {
        let radii = (1..=n_radii)
            .map(|k| radius + (outer - radius) * T::from_usize_lossy(k) / T::from_usize_lossy(n_radii))
            .collect();
        TheoremGrid {
            radii,
            angles,
            outer,
            radial_samples: 32,
            sphere_samples: 64,
            levels,
        }
    }
}

/// Angle certificate at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificatePoint<T> {
    pub q: PolarPoint<T>,
    pub value: T,
    /// Angle between the asymptotic direction and the outward meridian,
    /// the larger over the two horizons.
    pub angle: T,
    pub passed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthSample<T> {
    pub q: PolarPoint<T>,
    pub value: T,
    /// `F` where the meridian through `q` meets the `R`-sphere.
    pub base_value: T,
    /// `(t_q − R)·sin δ − slack`.
    pub lower_bound: T,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SublevelCheck<T> {
    pub level: T,
    /// `(a − N_R)/sin δ + R`.
    pub radius_bound: T,
    /// Sampled points beyond `R` with `F ≤ a`.
    pub members: usize,
    pub violations: Vec<PolarPoint<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainTheoremReport<T> {
    pub radius: T,
    pub delta: T,
    pub horizon: T,
    /// Grid points beyond `R` whose angle certificate failed.
    pub critical_candidates: Vec<PolarPoint<T>>,
    pub certificates: Vec<CertificatePoint<T>>,
    pub growth: Vec<GrowthSample<T>>,
    pub sublevel_bound: Vec<SublevelCheck<T>>,
    /// Minimum of `F` over the sampled `R`-sphere.
    pub n_r: T,
    pub passed: bool,
}

impl<T: Real> MainTheoremReport<T> {
    /// CSV of the angle certificates: `t,theta,value,angle,passed`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "theta", "value", "angle", "passed"])?;
        for c in &self.certificates {
            w.write_record([
                format!("{:e}", c.q.t),
                format!("{:e}", c.q.theta),
                format!("{:e}", c.value),
                format!("{:e}", c.angle),
                c.passed.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn meridian_angle<T: Real>(k: usize, n: usize) -> T {
    T::TAU() * T::from_usize_lossy(k) / T::from_usize_lossy(n)
}

/// Checks, for the Busemann function of `ray`, the angle certificate that
/// rules out critical points beyond `R`, the linear growth of `F` along
/// meridians, and the sublevel radius bound.
pub fn main_theorem_suite<T: Real>(
    model: &ProfileModel<T>,
    ray: &MeridianRay<T>,
    bounds: RadiusMargin<T>,
    horizon: T,
    grid: &TheoremGrid<T>,
) -> Result<MainTheoremReport<T>> {
    main_theorem_suite_with(model, ray, bounds, horizon, grid, &DistanceOptions::default())
}

pub fn main_theorem_suite_with<T: Real>(
    model: &ProfileModel<T>,
    ray: &MeridianRay<T>,
    bounds: RadiusMargin<T>,
    horizon: T,
    grid: &TheoremGrid<T>,
    opts: &DistanceOptions<T>,
) -> Result<MainTheoremReport<T>> {
    let RadiusMargin { radius, delta } = bounds;
    if !(radius > T::zero()) || !(delta > T::zero()) {
        return Err(Error::Precondition(format!("need R > 0 and δ > 0, got R = {radius}, δ = {delta}")));
    }
    let sin_delta = delta.sin();
    let value = |x: &PolarPoint<T>| horizon_value(model, ray, x, horizon, opts);

    let points: Vec<PolarPoint<T>> = grid
        .radii
        .iter()
        .filter(|&&r| r > radius)
        .flat_map(|&r| (0..grid.angles).map(move |j| PolarPoint::new(r, meridian_angle(j, grid.angles))))
        .collect();
    let limit = T::FRAC_PI_2() - delta + T::lit(CERTIFICATE_SLACK);
    let certificates: Result<Vec<CertificatePoint<T>>> = points
        .par_iter()
        .map(|q| {
            check_horizon(q, horizon)?;
            let dir = asymptotic_direction_with(model, ray, q, horizon, opts)?;
            let angle = dir.angle.abs().max(dir.far_angle.abs());
            Ok(CertificatePoint {
                q: *q,
                value: value(q)?,
                angle,
                passed: angle <= limit,
            })
        })
        .collect();
    let certificates = certificates?;
    let critical_candidates = certificates.iter().filter(|c| !c.passed).map(|c| c.q).collect::<Vec<_>>();

    let n = grid.radial_samples;
    let growth: Result<Vec<GrowthSample<T>>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let theta = meridian_angle(k, n);
            let t = radius + (grid.outer - radius) * T::from_usize_lossy(k + 1) / T::from_usize_lossy(n);
            let q = PolarPoint::new(t, theta);
            let v = value(&q)?;
            let base_value = value(&PolarPoint::new(radius, theta))?;
            let lower_bound = (t - radius) * sin_delta - T::lit(GROWTH_SLACK);
            Ok(GrowthSample {
                q,
                value: v,
                base_value,
                lower_bound,
                passed: v - base_value >= lower_bound,
            })
        })
        .collect();
    let growth = growth?;

    let sphere: Result<Vec<T>> = (0..grid.sphere_samples)
        .into_par_iter()
        .map(|k| value(&PolarPoint::new(radius, meridian_angle(k, grid.sphere_samples))))
        .collect();
    let n_r = sphere?.into_iter().fold(T::infinity(), T::min);
    let sampled: Vec<(PolarPoint<T>, T)> = certificates
        .iter()
        .map(|c| (c.q, c.value))
        .chain(growth.iter().map(|g| (g.q, g.value)))
        .collect();
    let sublevel_bound: Vec<SublevelCheck<T>> = grid
        .levels
        .iter()
        .map(|&a| {
            let radius_bound = (a - n_r) / sin_delta + radius;
            let members: Vec<&(PolarPoint<T>, T)> = sampled.iter().filter(|(_, v)| *v <= a).collect();
            SublevelCheck {
                level: a,
                radius_bound,
                members: members.len(),
                violations: members.iter().filter(|(q, _)| q.t > radius_bound).map(|(q, _)| *q).collect(),
            }
        })
        .collect();
    let passed = critical_candidates.is_empty()
        && growth.iter().all(|g| g.passed)
        && sublevel_bound.iter().all(|s| s.violations.is_empty());
    Ok(MainTheoremReport {
        radius,
        delta,
        horizon,
        critical_candidates,
        certificates,
        growth,
        sublevel_bound,
        n_r,
        passed,
    })
}
