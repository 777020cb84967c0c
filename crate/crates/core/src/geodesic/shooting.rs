use serde::{Deserialize, Serialize};

use super::clairaut::{clairaut_candidates, increasing_up_to};
use super::flow::{drive, integrate, integrate_scaled, Scales, DEFAULT_TOL};
use super::path::GeodesicPath;
use super::point::{GeodesicState, PolarPoint};
use crate::error::{Error, Result};
use crate::ode::Flow;
use crate::profile::ProfileModel;
use crate::scalar::{wrap_pi, Real};

/// Uniform initial angles tried before refinement.
pub const DEFAULT_SAMPLES: usize = 64;
/// Candidates within this length of the minimum count as tied minimizers.
pub const TIE_TOL: f64 = 1e-8;
/// A parallel leg shorter than this makes the distance purely radial.
pub const COLLAPSE_TOL: f64 = 1e-12;
/// Angular gap to the opposite meridian below which the broken path
/// through the pole is admitted as a candidate.
const NEAR_OPPOSITE: f64 = 1e-7;
const MAX_REFINE: usize = 200;
/// Largest offset from the target accepted once a bracket has collapsed.
const LOOSE_OFFSET: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceKind {
    /// One endpoint is the pole.
    Pole,
    /// Both endpoints on one meridian.
    Meridian,
    /// The parallel leg is negligible; the distance is the radial gap.
    Collapsed,
    /// Path along the meridians through the pole.
    ThroughPole,
    /// Geodesic found by shooting.
    Shooting,
}

#[derive(Debug, Clone)]
pub struct DistanceOptions<T> {
    /// Relative tolerance of every geodesic integration.
    pub tol: T,
    /// Uniform angle samples.
    pub samples: usize,
    /// Length window for tied minimizers.
    pub tie: T,
    /// Initial angle suggested by an outside source (for example the mesh
    /// oracle), measured like [`GeodesicState::launch`].
    pub phi_hint: Option<T>,
}

impl<T: Real> Default for DistanceOptions<T> {
    fn default() -> Self {
        DistanceOptions {
            tol: T::lit(DEFAULT_TOL),
            samples: DEFAULT_SAMPLES,
            tie: T::lit(TIE_TOL),
            phi_hint: None,
        }
    }
}

impl<T: Real> DistanceOptions<T> {
    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_hint(mut self, phi: T) -> Self {
        self.phi_hint = Some(phi);
        self
    }
}

/// A minimizing geodesic between two points.
#[derive(Debug, Clone)]
pub struct Distance<T> {
    pub length: T,
    pub kind: DistanceKind,
    /// Initial heading at the first point.
    pub phi: T,
    pub path: GeodesicPath<T>,
    /// Further minimizers whose length is within the tie window.
    pub alternatives: Vec<GeodesicPath<T>>,
    /// Length of the admissible comparison route that capped the search.
    pub upper_bound: T,
}

/// Shooting solution toward a meridian, in a frame where the source is at
/// θ = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate<T> {
    /// Signed initial heading.
    pub phi: T,
    pub length: T,
    pub nu: T,
    /// Radial miss `t(hit) − t_target` where the accepted geodesic crosses
    /// the target meridian.
    pub miss: T,
}

#[derive(Debug, Clone, Copy)]
struct Probe<T> {
    phi: T,
    /// Arclength, radius and radial speed where the target meridian is
    /// first crossed.
    hit: Option<(T, T, T)>,
    /// Radius at the crossing, or at the arclength cap when there is none;
    /// continuous in `phi` across the edge of the reachable set.
    reach: Option<T>,
}

impl<T: Real> Probe<T> {
    /// Distance from the target to the geodesic, to first order: the radial
    /// miss times the sine of the crossing angle. Geodesics running almost
    /// along the meridian cross it far from the target while passing close.
    fn offset(&self, t_target: T) -> Option<T> {
        let (_, t, u) = self.hit?;
        let sine = (T::one() - u * u).max(T::zero()).sqrt();
        Some((t - t_target).abs() * sine)
    }

    fn miss(&self, t_target: T) -> Option<T> {
        self.reach.map(|t| t - t_target)
    }

    fn sign(&self, t_target: T) -> i8 {
        match self.miss(t_target) {
            None => 1,
            Some(m) if m > T::zero() => 1,
            Some(m) if m < T::zero() => -1,
            Some(_) => 0,
        }
    }
}

/// Shoots from `(t_a, 0)` toward the meridian θ = `orientation·target`.
/// Probes are parametrized by `|φ| ∈ (0, π)`; the launch heading is
/// `orientation·|φ|`.
struct Shooter<'a, T> {
    model: &'a ProfileModel<T>,
    t_a: T,
    f_a: T,
    orientation: T,
    target: T,
    t_b: T,
    cap: T,
    tol: T,
    scales: Scales<T>,
}

impl<'a, T: Real> Shooter<'a, T> {
    fn nu(&self, phi: T) -> T {
        self.orientation * self.f_a * phi.sin()
    }

    fn probe(&self, phi: T) -> Result<Probe<T>> {
        let nu = self.nu(phi);
        let blank = Probe { phi, hit: None, reach: None };
        if nu == T::zero() {
            return Ok(blank);
        }
        let start = GeodesicState {
            t: self.t_a,
            theta: T::zero(),
            u: phi.cos(),
            v: T::zero(),
            nu,
        };
        let (o, target) = (self.orientation, self.target);
        let mut hit = None;
        let run = drive(self.model, &start, self.cap, self.tol, self.scales, |seg| {
            if o * seg.y1()[1] >= target {
                if let Some((s, y)) = seg.find_root(|_, y| o * y[1] - target) {
                    hit = Some((s, y[0], y[2]));
                }
                return Flow::Stop;
            }
            Flow::Continue
        });
        match run {
            Ok(y) => Ok(Probe {
                phi,
                hit,
                reach: Some(hit.map_or(y[0], |(_, t, _)| t)),
            }),
            Err(Error::StepSizeUnderflow { .. }) => Ok(blank),
            Err(e) => Err(e),
        }
    }

    /// Refines a sign change of the miss between two probes (Illinois
    /// steps, with bisection when either end is unreachable or the secant
    /// keeps landing on one side). Returns
    /// `None` when the bracket closes on the edge of the reachable set
    /// rather than on a root.
    fn refine(&self, mut lo: Probe<T>, mut hi: Probe<T>) -> Result<Option<Probe<T>>> {
        let t_b = self.t_b;
        let miss_tol = self.tol * T::lit(1e-2) * (T::one() + t_b);
        let mut f_lo = lo.miss(t_b);
        let mut f_hi = hi.miss(t_b);
        let s_lo = lo.sign(t_b);
        let mut last_side = 0i8;
        let mut streak = 0usize;
        for _ in 0..MAX_REFINE {
            for p in [&lo, &hi] {
                if let Some(m) = p.offset(t_b) {
                    if m <= miss_tol {
                        return Ok(Some(*p));
                    }
                }
            }
            if hi.phi - lo.phi <= T::epsilon() * T::lit(4.0) * hi.phi.max(T::one()) {
                break;
            }
            let mid = (lo.phi + hi.phi) / T::lit(2.0);
            // a steep miss can pin the secant to one end; bisect when it does
            let c = match (f_lo, f_hi) {
                _ if streak >= 3 => mid,
                (Some(a), Some(b)) if a != b => {
                    let c = lo.phi - a * (hi.phi - lo.phi) / (b - a);
                    if c > lo.phi && c < hi.phi {
                        c
                    } else {
                        mid
                    }
                }
                _ => mid,
            };
            let pc = self.probe(c)?;
            let sc = pc.sign(t_b);
            if sc == 0 {
                return Ok(pc.hit.map(|_| pc));
            }
            let side = if sc == s_lo { -1 } else { 1 };
            streak = if side == last_side { streak + 1 } else { 0 };
            if sc == s_lo {
                lo = pc;
                f_lo = pc.miss(t_b);
                if last_side == -1 {
                    f_hi = f_hi.map(|v| v / T::lit(2.0));
                }
                last_side = -1;
            } else {
                hi = pc;
                f_hi = pc.miss(t_b);
                if last_side == 1 {
                    f_lo = f_lo.map(|v| v / T::lit(2.0));
                }
                last_side = 1;
            }
        }
        // the bracket closed at roundoff level; keep the nearer end if it
        // passes the target closely enough for the sliding correction
        let best = match (lo.offset(t_b), hi.offset(t_b)) {
            (Some(a), Some(b)) if a <= b => (lo, a),
            (_, Some(b)) => (hi, b),
            (Some(a), None) => (lo, a),
            (None, None) => return Ok(None),
        };
        Ok((best.1 <= T::lit(LOOSE_OFFSET) * (T::one() + t_b)).then_some(best.0))
    }

    fn candidate(&self, p: &Probe<T>) -> Option<Candidate<T>> {
        let (s, t, u) = p.hit?;
        // slide along the geodesic to the point nearest the target
        Some(Candidate {
            phi: self.orientation * p.phi,
            length: s - (t - self.t_b) * u,
            nu: self.nu(p.phi),
            miss: t - self.t_b,
        })
    }
}

fn sample_angles<T: Real>(n: usize, hint: Option<T>) -> Vec<T> {
    let pi = T::PI();
    let mut phis: Vec<T> = (0..n)
        .map(|i| pi * (T::from_usize_lossy(i) + T::lit(0.5)) / T::from_usize_lossy(n))
        .collect();
    for k in 2..=12 {
        phis.push(pi * T::lit(10f64.powi(-k)));
    }
    for k in 2..=8 {
        phis.push(pi - pi * T::lit(10f64.powi(-k)));
    }
    if let Some(h) = hint {
        for d in [-1e-3, 0.0, 1e-3] {
            phis.push(h + T::lit(d));
        }
    }
    phis.retain(|p| *p > T::zero() && *p < pi);
    phis.sort_by(|a, b| a.partial_cmp(b).expect("finite angles"));
    phis.dedup();
    phis
}

/// All geodesics from `(t_a, 0)` that reach `(t_b, target)` within
/// arclength `cap` without crossing the meridian θ = target earlier.
///
/// A positive `target ∈ (0, π]` selects geodesics turning toward
/// increasing θ (ν > 0); a negative one selects those turning the other
/// way (ν < 0), integrated in their own right.
pub fn shoot_to_meridian<T: Real>(
    model: &ProfileModel<T>,
    t_a: T,
    t_b: T,
    target: T,
    cap: T,
    opts: &DistanceOptions<T>,
) -> Result<Vec<Candidate<T>>> {
    if !(t_a > T::zero()) || target == T::zero() || !(target.abs() <= T::PI()) {
        return Err(Error::Precondition(format!(
            "shooting needs t_a > 0 and 0 < |target| ≤ π (t_a = {t_a}, target = {target})"
        )));
    }
    let orientation = if target < T::zero() { -T::one() } else { T::one() };
    let shooter = Shooter {
        model,
        t_a,
        f_a: model.f(t_a),
        orientation,
        target: target.abs(),
        t_b,
        cap,
        tol: opts.tol,
        scales: Scales::at(model, &[t_a, t_b]),
    };
    let hint = opts.phi_hint.map(|h| orientation * h);
    let phis = sample_angles(opts.samples, hint);
    let mut probes = Vec::with_capacity(phis.len());
    for &phi in &phis {
        probes.push(shooter.probe(phi)?);
    }
    let mut out = Vec::new();
    for (i, p) in probes.iter().enumerate() {
        if p.sign(t_b) == 0 {
            out.extend(shooter.candidate(p));
            continue;
        }
        if let Some(q) = probes.get(i + 1) {
            let sq = q.sign(t_b);
            if sq != 0 && sq != p.sign(t_b) {
                if let Some(root) = shooter.refine(*p, *q)? {
                    out.extend(shooter.candidate(&root));
                }
            }
        }
    }
    out.dedup_by(|a, b| (a.phi - b.phi).abs() <= T::epsilon() * T::lit(16.0));
    Ok(out)
}

/// Geodesic distance with the default options.
pub fn distance<T: Real>(model: &ProfileModel<T>, a: &PolarPoint<T>, b: &PolarPoint<T>) -> Result<Distance<T>> {
    distance_with(model, a, b, &DistanceOptions::default())
}

fn radial_path<T: Real>(model: &ProfileModel<T>, from: &PolarPoint<T>, to: &PolarPoint<T>, tol: T) -> Result<GeodesicPath<T>> {
    let dt = to.t - from.t;
    let (start, len) = if from.is_pole() {
        (GeodesicState::launch(model, *from, to.theta), to.t)
    } else {
        let phi = if dt >= T::zero() { T::zero() } else { T::PI() };
        (GeodesicState::launch(model, *from, phi), dt.abs())
    };
    if len == T::zero() {
        return Ok(GeodesicPath::constant(start));
    }
    integrate(model, &start, len, tol)
}

/// Shortest geodesic from `a` to `b` and its length.
///
/// Pole and same-meridian cases are closed form. Otherwise the problem is
/// rotated and reflected so that `a = (t_a, 0)` and `b = (t_b, Δθ)` with
/// `Δθ ∈ (0, π]`; a minimizing geodesic never sweeps more than π in θ (its
/// mirror image would reach the opposite meridian with the same length), so
/// only geodesics crossing θ = Δθ for the first time at `b` are candidates.
/// Initial headings are sampled, sign changes of the radial miss are
/// refined, and the shortest root wins.
pub fn distance_with<T: Real>(
    model: &ProfileModel<T>,
    a: &PolarPoint<T>,
    b: &PolarPoint<T>,
    opts: &DistanceOptions<T>,
) -> Result<Distance<T>> {
    let pi = T::PI();
    if a.is_pole() || b.is_pole() {
        let path = radial_path(model, a, b, opts.tol)?;
        let length = a.t.max(b.t);
        let phi = path.initial_heading(model);
        return Ok(Distance {
            length,
            kind: DistanceKind::Pole,
            phi,
            path,
            alternatives: Vec::new(),
            upper_bound: length,
        });
    }
    if b.t < a.t {
        // launch headings at the inner point are well resolved; at the outer
        // one the geodesic may leave within roundoff of the meridian
        let swapped = DistanceOptions {
            phi_hint: None,
            ..opts.clone()
        };
        let d = distance_with(model, b, a, &swapped)?;
        let path = d.path.reversed();
        return Ok(Distance {
            phi: path.initial_heading(model),
            path,
            alternatives: d.alternatives.iter().map(GeodesicPath::reversed).collect(),
            ..d
        });
    }
    let delta = wrap_pi(b.theta - a.theta);
    let sign = if delta < T::zero() { -T::one() } else { T::one() };
    let gap = delta.abs();
    let radial = (a.t - b.t).abs();
    let f_min = model.f(a.t).abs().min(model.f(b.t).abs());
    if gap == T::zero() || gap * f_min <= T::lit(COLLAPSE_TOL) {
        let kind = if gap == T::zero() { DistanceKind::Meridian } else { DistanceKind::Collapsed };
        let target = PolarPoint::new(b.t, a.theta);
        let path = radial_path(model, a, &target, opts.tol)?;
        return Ok(Distance {
            length: radial,
            kind,
            phi: path.initial_heading(model),
            path,
            alternatives: Vec::new(),
            upper_bound: radial + gap * f_min,
        });
    }

    let through_pole = a.t + b.t;
    let upper = through_pole.min(parallel_route(model, a.t, b.t, gap));
    let cap = upper * (T::one() + T::lit(1e-9)) + T::lit(1e-9);
    let local_opts = DistanceOptions {
        phi_hint: opts.phi_hint.map(|h| sign * h),
        ..opts.clone()
    };
    let mut cands = if increasing_up_to(model, b.t) {
        clairaut_candidates(model, a.t, b.t, gap, &local_opts)?
    } else {
        shoot_to_meridian(model, a.t, b.t, gap, cap, &local_opts)?
    };
    if gap == pi {
        let mirrors: Vec<_> = cands
            .iter()
            .map(|c| Candidate {
                phi: -c.phi,
                nu: -c.nu,
                ..*c
            })
            .collect();
        cands.extend(mirrors);
    }
    let pole_ok = pi - gap <= T::lit(NEAR_OPPOSITE);
    if pole_ok {
        cands.push(Candidate {
            phi: pi,
            length: through_pole,
            nu: T::zero(),
            miss: T::zero(),
        });
    }
    if cands.is_empty() {
        return Err(Error::NoConvergence {
            lower: radial.to_f64_lossy(),
            upper: upper.to_f64_lossy(),
        });
    }
    let best = cands.iter().map(|c| c.length).fold(T::infinity(), T::min);
    let mut tied: Vec<_> = cands.into_iter().filter(|c| c.length <= best + opts.tie).collect();
    // toward the smaller initial angle; positive orientation first
    tied.sort_by(|x, y| {
        (x.phi.abs(), -x.phi)
            .partial_cmp(&(y.phi.abs(), -y.phi))
            .expect("finite headings")
    });
    let mut paths = Vec::with_capacity(tied.len());
    for c in &tied {
        let start = GeodesicState::from_phase(model, a.t, T::zero(), c.phi.cos(), c.nu);
        let path = integrate_scaled(model, &start, c.length, opts.tol, Scales::at(model, &[a.t, b.t]))?;
        paths.push(path.transformed(a.theta, sign));
    }
    let primary = tied[0];
    let path = paths.remove(0);
    let kind = if primary.nu == T::zero() { DistanceKind::ThroughPole } else { DistanceKind::Shooting };
    Ok(Distance {
        length: primary.length,
        kind,
        phi: sign * primary.phi,
        path,
        alternatives: paths,
        upper_bound: upper,
    })
}

/// Shortest route made of meridian legs and one parallel arc of angle `gap`.
fn parallel_route<T: Real>(model: &ProfileModel<T>, t_a: T, t_b: T, gap: T) -> T {
    let (lo, hi) = (t_a.min(t_b), t_a.max(t_b));
    let reach = (hi * T::lit(2.0) + T::one()).min(model.t_max().max(hi));
    let n = 64usize;
    let mut best = T::infinity();
    for k in 0..=n {
        let r = reach * T::from_usize_lossy(k) / T::from_usize_lossy(n);
        best = best.min((t_a - r).abs() + (r - t_b).abs() + model.f(r).abs() * gap);
    }
    for r in [lo, hi] {
        best = best.min((t_a - r).abs() + (r - t_b).abs() + model.f(r).abs() * gap);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ProfileModel;
    use std::f64::consts::PI;

    fn euclid(a: &PolarPoint<f64>, b: &PolarPoint<f64>) -> f64 {
        let (xa, ya) = (a.t * a.theta.cos(), a.t * a.theta.sin());
        let (xb, yb) = (b.t * b.theta.cos(), b.t * b.theta.sin());
        (xa - xb).hypot(ya - yb)
    }

    #[test]
    fn pole_distance_is_radius() {
        for m in [ProfileModel::plane(), ProfileModel::sinclair(), ProfileModel::paraboloid()] {
            let d = distance(&m, &PolarPoint::pole(), &PolarPoint::new(3.2, 1.1)).unwrap();
            assert_eq!(d.length, 3.2);
            assert_eq!(d.kind, DistanceKind::Pole);
            assert_eq!(d.path.endpoint(), PolarPoint::new(3.2, 1.1));
        }
    }

    #[test]
    fn plane_three_four_five() {
        let m = ProfileModel::plane();
        let d = distance(&m, &PolarPoint::new(3.0, 0.0), &PolarPoint::new(4.0, PI / 2.0)).unwrap();
        assert!((d.length - 5.0).abs() < 1e-8, "{}", d.length - 5.0);
        assert_eq!(d.kind, DistanceKind::Shooting);
        let e = d.path.endpoint();
        assert!((e.t - 4.0).abs() < 1e-8 && (e.theta - PI / 2.0).abs() < 1e-8);
        // heading at (3,0) toward (0,4) − (3,0)
        let expected = PI - (4.0f64 / 3.0).atan();
        assert!((d.phi - expected).abs() < 1e-8);
    }

    #[test]
    fn plane_reflected_and_swapped() {
        let m = ProfileModel::plane();
        let a = PolarPoint::new(1.5, 0.3);
        for &th in &[0.1, 1.0, 2.5, 3.0, 3.5, 5.0, 6.2] {
            let b = PolarPoint::new(2.5, th);
            let d = distance(&m, &a, &b).unwrap();
            assert!((d.length - euclid(&a, &b)).abs() < 1e-8, "θ={th}: {} vs {}", d.length, euclid(&a, &b));
            let back = distance(&m, &b, &a).unwrap();
            assert!((back.length - d.length).abs() < 1e-8);
            let e = d.path.endpoint();
            assert!((e.t - b.t).abs() < 1e-8 && wrap_pi(e.theta - b.theta).abs() < 1e-8);
        }
    }

    #[test]
    fn plane_opposite_meridian_is_through_pole() {
        let m = ProfileModel::plane();
        let d = distance(&m, &PolarPoint::new(1.0, 0.0), &PolarPoint::new(2.0, PI)).unwrap();
        assert_eq!(d.length, 3.0);
        assert_eq!(d.kind, DistanceKind::ThroughPole);
        let near = distance(&m, &PolarPoint::new(1.0, 0.0), &PolarPoint::new(2.0, PI - 1e-4)).unwrap();
        let exact = euclid(&PolarPoint::new(1.0, 0.0), &PolarPoint::new(2.0, PI - 1e-4));
        assert!((near.length - exact).abs() < 1e-8);
    }

    #[test]
    fn same_meridian_and_collapse() {
        let m = ProfileModel::sinclair();
        let d = distance(&m, &PolarPoint::new(1.0, 0.5), &PolarPoint::new(2.5, 0.5)).unwrap();
        assert_eq!((d.length, d.kind), (1.5, DistanceKind::Meridian));
        let d = distance(&m, &PolarPoint::new(8.0, 0.0), &PolarPoint::new(9.0, 2.0)).unwrap();
        assert_eq!((d.length, d.kind), (1.0, DistanceKind::Collapsed));
    }

    #[test]
    fn hyperbolic_matches_law_of_cosines() {
        let m = ProfileModel::hyperbolic();
        let (ta, tb, th) = (1.0f64, 1.5f64, 1.2f64);
        let d = distance(&m, &PolarPoint::new(ta, 0.0), &PolarPoint::new(tb, th)).unwrap();
        let exact = (ta.cosh() * tb.cosh() - ta.sinh() * tb.sinh() * th.cos()).acosh();
        assert!((d.length - exact).abs() < 1e-8, "{}", d.length - exact);
    }

    #[test]
    fn sinclair_distance_is_bounded_and_reaches_target() {
        let m = ProfileModel::sinclair();
        let a = PolarPoint::new(0.5, 0.0);
        let b = PolarPoint::new(1.5, 2.0);
        let d = distance(&m, &a, &b).unwrap();
        assert!(d.length >= 1.0 - 1e-12 && d.length <= d.upper_bound + 1e-9);
        let e = d.path.endpoint();
        assert!((e.t - b.t).abs() < 1e-8 && (e.theta - b.theta).abs() * m.f(b.t) < 1e-8);
    }
}
