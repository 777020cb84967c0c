use super::path::{GeodesicPath, PathSample};
use super::point::{GeodesicState, PolarPoint};
use crate::error::{Error, Result};
use crate::ode::{illinois, Dopri5, Flow, OdeSystem, Step, Tolerance};
use crate::profile::ProfileModel;
use crate::scalar::Real;

/// Relative tolerance of geodesic integration unless stated otherwise.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Absolute error floor, as a fraction of the relative tolerance.
const ABS_FRACTION: f64 = 1e-2;
const SPEED_TOL: f64 = 1e-8;
/// Samples placed along a meridian path.
const MERIDIAN_SAMPLES: usize = 32;

/// Geodesic equations in `(t, θ, u)` for a fixed Clairaut constant ν:
/// `t' = u`, `θ' = ν/f²`, `u' = (ν/f)²·f'/f`.
pub(crate) struct GeodesicFlow<'a, T> {
    pub model: &'a ProfileModel<T>,
    pub nu: T,
    pub scales: Scales<T>,
}

/// Reference sizes for the local error test.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Scales<T> {
    /// Radius the relative position tolerance refers to.
    pub length: T,
    /// Smallest weight given to a θ error. An error in θ rotates the rest
    /// of the geodesic rigidly, so it shows up at the end as `f(t_end)·δθ`;
    /// the weight should be the warp where accuracy is wanted.
    pub warp: T,
}

impl<T: Real> Scales<T> {
    pub fn at(model: &ProfileModel<T>, radii: &[T]) -> Self {
        let mut length = T::zero();
        let mut warp = T::zero();
        for &r in radii {
            length = length.max(r.abs());
            warp = warp.max(model.f(r).abs());
        }
        Scales { length, warp }
    }
}

impl<'a, T: Real> OdeSystem<T, 3> for GeodesicFlow<'a, T> {
    #[inline]
    fn rhs(&self, _s: T, y: &[T; 3]) -> [T; 3] {
        let (f, log_d) = self.model.warp(y[0]);
        let rho = self.nu / f;
        [y[2], rho / f, rho * rho * log_d]
    }

    fn error_norm(&self, y0: &[T; 3], y1: &[T; 3], err: &[T; 3], tol: &Tolerance<T>) -> T {
        // the ball has to be approached, not jumped into
        let ball = T::lit(POLE_BALL);
        if self.nu != T::zero() && y1[0] < ball && y0[0] > T::lit(4.0) * ball {
            return T::infinity();
        }
        // nor swept past in a single step
        if (y1[1] - y0[1]).abs() > T::lit(MAX_SWEEP) {
            return T::infinity();
        }
        let reach = y0[0].abs().max(y1[0].abs()).max(self.scales.length);
        let pos_scale = tol.atol + tol.rtol * reach;
        let f = self.model.f(y1[0]).abs().max(self.scales.warp);
        // never ask for θ below its own rounding
        let th_floor = T::epsilon() * T::lit(64.0) * y0[1].abs().max(y1[1].abs());
        let th_scale = (pos_scale / f).max(th_floor);
        let e_t = err[0].abs() / pos_scale;
        let e_th = err[1].abs() / th_scale;
        let e_u = err[2].abs() / (tol.atol + tol.rtol);
        e_t.max(e_th).max(e_u)
    }
}

pub(crate) fn tolerance<T: Real>(tol: T) -> Tolerance<T> {
    Tolerance::new(tol, tol * T::lit(ABS_FRACTION))
}

pub(crate) fn initial_step<T: Real>(model: &ProfileModel<T>, t: T, span: T) -> T {
    let scale = model.f(t).abs().max(T::lit(1e-6)).min(T::one());
    (scale * T::lit(1e-2)).min(span.abs())
}

/// Largest change of θ accepted in one step.
const MAX_SWEEP: f64 = 0.25;

/// Radius of the ball about the pole crossed along a straight chord.
pub(crate) const POLE_BALL: f64 = 1e-6;

/// Straight passage through the pole ball, entered at `(t_e, θ_e)` with
/// radial speed `u_e < 0` and transverse speed `ρ = ν/f(t_e)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Chord<T> {
    pub s0: T,
    pub s1: T,
    t_e: T,
    theta_e: T,
    u_e: T,
    rho: T,
}

impl<T: Real> Chord<T> {
    fn new(s0: T, y: [T; 3], nu: T, model: &ProfileModel<T>) -> Self {
        let rho = nu / model.f(y[0]);
        let norm = y[2].hypot(rho);
        let (u_e, rho) = (y[2] / norm, rho / norm);
        Chord {
            s0,
            s1: s0 - T::lit(2.0) * y[0] * u_e,
            t_e: y[0],
            theta_e: y[1],
            u_e,
            rho,
        }
    }

    pub fn at(&self, s: T) -> [T; 3] {
        let l = s - self.s0;
        let x = self.t_e + l * self.u_e;
        let y = l * self.rho;
        let r = x.hypot(y);
        if r == T::zero() {
            return [r, self.theta_e, T::zero()];
        }
        [r, self.theta_e + y.atan2(x), (x * self.u_e + y * self.rho) / r]
    }

    fn exit(&self) -> [T; 3] {
        let sweep = T::lit(2.0) * (-self.u_e).atan2(self.rho.abs());
        [self.t_e, self.theta_e + self.rho.signum() * sweep, -self.u_e]
    }
}

/// A piece of a geodesic handed to the step callback of [`drive`].
pub(crate) enum Segment<'a, T> {
    Smooth(&'a Step<T, 3>),
    Chord(&'a Chord<T>),
}

impl<'a, T: Real> Segment<'a, T> {
    pub fn s1(&self) -> T {
        match self {
            Segment::Smooth(st) => st.s1,
            Segment::Chord(c) => c.s1,
        }
    }

    pub fn s0(&self) -> T {
        match self {
            Segment::Smooth(st) => st.s0,
            Segment::Chord(c) => c.s0,
        }
    }

    /// State inside the segment at arclength `s`.
    pub fn at(&self, s: T) -> [T; 3] {
        match self {
            Segment::Smooth(st) => st.at(s),
            Segment::Chord(c) => c.at(s),
        }
    }

    pub fn y1(&self) -> [T; 3] {
        match self {
            Segment::Smooth(st) => st.y1,
            Segment::Chord(c) => c.at(c.s1),
        }
    }

    /// Sign change of `g` between the ends of the segment.
    pub fn find_root<G: Fn(T, &[T; 3]) -> T>(&self, g: G) -> Option<(T, [T; 3])> {
        match self {
            Segment::Smooth(st) => st.find_root(g),
            Segment::Chord(c) => {
                let (a, b) = (c.s0, c.s1);
                let (ya, yb) = (c.at(a), c.at(b));
                let (ga, gb) = (g(a, &ya), g(b, &yb));
                if gb == T::zero() {
                    return Some((b, yb));
                }
                if !(ga * gb < T::zero()) {
                    return None;
                }
                let s = illinois(|s| g(s, &c.at(s)), a, b, ga, gb, T::epsilon() * T::lit(4.0));
                Some((s, c.at(s)))
            }
        }
    }

    /// Arclength where `dt/ds` changes sign inside the segment.
    pub fn turning_point(&self) -> Option<T> {
        match self {
            Segment::Smooth(st) => st.find_root(|_, y| y[2]).map(|(s, _)| s).filter(|&s| s > st.s0),
            Segment::Chord(c) => {
                let mid = c.s0 + (c.s1 - c.s0) / T::lit(2.0);
                (mid < c.s1).then_some(mid)
            }
        }
    }
}

/// Where a step enters the pole ball, if it does.
fn ball_entry<T: Real>(step: &Step<T, 3>, ball: T) -> Option<(T, [T; 3])> {
    let g = |_: T, y: &[T; 3]| y[0] - ball;
    if step.y1[0] < ball {
        return step.find_root(g);
    }
    // a dip below the ball radius strictly inside the step
    if step.y0[2] < T::zero() && step.y1[2] > T::zero() {
        if let Some((s_turn, y)) = step.find_root(|_, y| y[2]) {
            if y[0] < ball {
                return step.find_root_in(g, step.s0, s_turn);
            }
        }
    }
    None
}

/// Runs the geodesic flow from `start` over `[0, s_end]`, handing every
/// accepted step to `on_step`. The state vector is `[t, θ, u]`. Passages
/// through the pole ball are replaced by straight chords.
pub(crate) fn drive<T, F>(
    model: &ProfileModel<T>,
    start: &GeodesicState<T>,
    s_end: T,
    tol: T,
    scales: Scales<T>,
    mut on_step: F,
) -> Result<[T; 3]>
where
    T: Real,
    F: FnMut(&Segment<'_, T>) -> Flow,
{
    let sys = GeodesicFlow { model, nu: start.nu, scales };
    let ball = T::lit(POLE_BALL);
    let mut s = T::zero();
    let mut y = [start.t, start.theta, start.u];
    loop {
        let solver = Dopri5::new(tolerance(tol)).with_initial_step(initial_step(model, y[0], s_end - s));
        let mut entry = None;
        let mut stopped = false;
        let summary = solver.run(&sys, s, y, s_end, |step| {
            let step = match ball_entry(step, ball) {
                Some((se, ye)) if ye[2] < T::zero() && start.nu != T::zero() => {
                    entry = Some((se, ye));
                    step.truncated(se)
                }
                _ => step.clone(),
            };
            if let Flow::Stop = on_step(&Segment::Smooth(&step)) {
                stopped = true;
                return Flow::Stop;
            }
            if entry.is_some() {
                Flow::Stop
            } else {
                Flow::Continue
            }
        })?;
        let Some((se, ye)) = entry.filter(|_| !stopped) else {
            return Ok(summary.y);
        };
        let mut chord = Chord::new(se, ye, start.nu, model);
        let mut last = chord.s1 >= s_end;
        if last {
            chord.s1 = s_end;
        }
        if let Flow::Stop = on_step(&Segment::Chord(&chord)) {
            last = true;
        }
        if last {
            return Ok(chord.at(chord.s1));
        }
        s = chord.s1;
        y = chord.exit();
    }
}

fn meridian_path<T: Real>(model: &ProfileModel<T>, start: &GeodesicState<T>, s_end: T) -> GeodesicPath<T> {
    // a meridian state at the pole always points outward along θ
    let (t0, theta0, u0) = if start.t == T::zero() && start.u < T::zero() {
        (T::zero(), start.theta + T::PI(), T::one())
    } else {
        (start.t, start.theta, start.u.signum())
    };
    let pole_at = if u0 < T::zero() { Some(t0) } else { None };
    let at = |s: T| -> GeodesicState<T> {
        match pole_at {
            Some(sp) if s >= sp => GeodesicState {
                t: s - sp,
                theta: theta0 + T::PI(),
                u: T::one(),
                v: T::zero(),
                nu: T::zero(),
            },
            _ => GeodesicState {
                t: t0 + u0 * s,
                theta: theta0,
                u: u0,
                v: T::zero(),
                nu: T::zero(),
            },
        }
    };
    let mut stamps: Vec<T> = (0..=MERIDIAN_SAMPLES)
        .map(|k| s_end * T::from_usize_lossy(k) / T::from_usize_lossy(MERIDIAN_SAMPLES))
        .collect();
    if let Some(sp) = pole_at {
        if sp < s_end {
            stamps.push(sp);
        }
    }
    stamps.sort_by(|a, b| a.partial_cmp(b).expect("finite stamps"));
    stamps.dedup();
    let samples = stamps.into_iter().map(|s| PathSample { s, state: at(s) }).collect();
    let _ = model;
    GeodesicPath {
        samples,
        length: s_end,
        turning_points: Vec::new(),
    }
}

/// Integrates the unit-speed geodesic from `start` over arclength `s_end`.
///
/// Meridians (ν = 0) are followed in closed form, including passage
/// through the pole; every other geodesic is integrated numerically, with
/// turning points of `t` located on the dense output.
pub fn integrate<T: Real>(
    model: &ProfileModel<T>,
    start: &GeodesicState<T>,
    s_end: T,
    tol: T,
) -> Result<GeodesicPath<T>> {
    integrate_scaled(model, start, s_end, tol, Scales::at(model, &[start.t]))
}

pub(crate) fn integrate_scaled<T: Real>(
    model: &ProfileModel<T>,
    start: &GeodesicState<T>,
    s_end: T,
    tol: T,
    scales: Scales<T>,
) -> Result<GeodesicPath<T>> {
    if !(s_end > T::zero()) {
        return Err(Error::Precondition(format!("path length must be positive, got {s_end}")));
    }
    if start.t < T::zero() {
        return Err(Error::Precondition(format!("start radius must be non-negative, got {}", start.t)));
    }
    let defect = start.speed_defect(model);
    if !(defect <= T::lit(SPEED_TOL)) {
        return Err(Error::Precondition(format!("start state is not unit speed (defect {defect})")));
    }
    if start.nu == T::zero() || start.t == T::zero() {
        return Ok(meridian_path(model, start, s_end));
    }
    let mut samples = vec![PathSample { s: T::zero(), state: *start }];
    let mut turning_points = Vec::new();
    drive(model, start, s_end, tol, scales, |seg| {
        turning_points.extend(seg.turning_point());
        let y = seg.y1();
        samples.push(PathSample {
            s: seg.s1(),
            state: GeodesicState::from_phase(model, y[0], y[1], y[2], start.nu),
        });
        Flow::Continue
    })?;
    Ok(GeodesicPath {
        samples,
        length: s_end,
        turning_points,
    })
}

/// Points at the increasing arclengths `stamps` along the geodesic from
/// `start`.
pub fn trace<T: Real>(model: &ProfileModel<T>, start: &GeodesicState<T>, stamps: &[T], tol: T) -> Result<Vec<PolarPoint<T>>> {
    let Some(&last) = stamps.last() else {
        return Ok(Vec::new());
    };
    if stamps.windows(2).any(|w| !(w[0] < w[1])) || !(stamps[0] > T::zero()) {
        return Err(Error::Precondition("trace stamps must be positive and increasing".into()));
    }
    if start.nu == T::zero() || start.t == T::zero() {
        return Ok(stamps
            .iter()
            .map(|&s| meridian_path(model, start, s).endpoint())
            .collect());
    }
    let defect = start.speed_defect(model);
    if !(defect <= T::lit(SPEED_TOL)) {
        return Err(Error::Precondition(format!("start state is not unit speed (defect {defect})")));
    }
    let mut out = Vec::with_capacity(stamps.len());
    let mut next = 0;
    let end = drive(model, start, last, tol, Scales::at(model, &[start.t]), |seg| {
        while next < stamps.len() && stamps[next] <= seg.s1() {
            let y = seg.at(stamps[next].max(seg.s0()));
            out.push(PolarPoint::new(y[0], y[1]));
            next += 1;
        }
        Flow::Continue
    })?;
    out.resize(stamps.len(), PolarPoint::new(end[0], end[1]));
    Ok(out)
}

/// Endpoint of the geodesic of length `s` leaving `q` at angle `phi` from
/// the outward meridian (at the pole, along the meridian θ = `phi`).
pub fn exp_map<T: Real>(model: &ProfileModel<T>, q: PolarPoint<T>, phi: T, s: T) -> Result<PolarPoint<T>> {
    exp_map_with(model, q, phi, s, T::lit(DEFAULT_TOL))
}

pub fn exp_map_with<T: Real>(model: &ProfileModel<T>, q: PolarPoint<T>, phi: T, s: T, tol: T) -> Result<PolarPoint<T>> {
    if s == T::zero() {
        return Ok(q);
    }
    let start = GeodesicState::launch(model, q, phi);
    Ok(integrate(model, &start, s, tol)?.endpoint())
}
