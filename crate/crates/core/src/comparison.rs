//! Comparison triangles with one vertex at the pole, and the angle
//! comparison between a surface and a model whose radial curvature it
//! dominates.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::{distance_with, DistanceOptions, PolarPoint, DEFAULT_TOL};
use crate::ode::illinois;
use crate::profile::ProfileModel;
use crate::scalar::{wrap_pi, Real};

/// Slack allowed below `|a − b|` before a side triple is degenerate.
pub const DEGENERATE_SLACK: f64 = 1e-9;
/// Points of the curvature dominance grid.
pub const DOMINANCE_GRID: usize = 1000;
/// Allowed dip of the distance when the pole angle grows.
const MONOTONE_SLACK: f64 = 1e-9;

/// Geodesic triangle `p̃x̃ỹ` with `p̃` the pole, `x̃ = (a, 0)` and
/// `ỹ = (b, pole_angle)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTriangle<T> {
    /// `(a, b, c)`: `|p̃x̃|`, `|p̃ỹ|`, `|x̃ỹ|` as requested.
    pub sides: [T; 3],
    /// `|x̃ỹ|` as realized by the placed vertices.
    pub realized_c: T,
    pub pole_angle: T,
    /// Angles at `p̃`, `x̃`, `ỹ`.
    pub vertex_angles: [T; 3],
    pub x: PolarPoint<T>,
    pub y: PolarPoint<T>,
}

/// Angles at the pole, `x` and `y` of the triangle they span with the pole,
/// together with `|xy|`.
pub fn pole_triangle_angles<T: Real>(
    model: &ProfileModel<T>,
    x: &PolarPoint<T>,
    y: &PolarPoint<T>,
    opts: &DistanceOptions<T>,
) -> Result<([T; 3], T)> {
    let pi = T::PI();
    let at_pole = wrap_pi(y.theta - x.theta).abs();
    if x.is_pole() || y.is_pole() {
        return Err(Error::Degenerate("a vertex coincides with the pole".into()));
    }
    let d = distance_with(model, x, y, opts)?;
    if d.length == T::zero() {
        return Err(Error::Degenerate("x and y coincide".into()));
    }
    // the side toward the pole leaves along the inward meridian, heading π
    let at_x = wrap_pi(pi - d.path.initial_heading(model)).abs();
    let back = d.path.reversed();
    let at_y = wrap_pi(pi - back.initial_heading(model)).abs();
    Ok(([at_pole, at_x, at_y], d.length))
}

/// Places the triangle with sides `(a, b, c)` on `model`: `x̃ = (a, 0)`,
/// `ỹ = (b, θ)`, with `θ ∈ [0, π]` solved so that `|x̃ỹ| = c`.
pub fn build_comparison_triangle<T: Real>(model: &ProfileModel<T>, a: T, b: T, c: T) -> Result<ComparisonTriangle<T>> {
    build_comparison_triangle_with(model, a, b, c, &DistanceOptions::default())
}

pub fn build_comparison_triangle_with<T: Real>(
    model: &ProfileModel<T>,
    a: T,
    b: T,
    c: T,
    opts: &DistanceOptions<T>,
) -> Result<ComparisonTriangle<T>> {
    if !(a > T::zero() && b > T::zero()) {
        return Err(Error::Precondition(format!("sides to the pole must be positive (a = {a}, b = {b})")));
    }
    let pi = T::PI();
    let x = PolarPoint::new(a, T::zero());
    let radial = (a - b).abs();
    if c < radial - T::lit(DEGENERATE_SLACK) {
        return Err(Error::Degenerate(format!("c = {c} < |a − b| = {radial}")));
    }
    let side_at = |theta: T| -> Result<T> { Ok(distance_with(model, &x, &PolarPoint::new(b, theta), opts)?.length) };
    let c_max = side_at(pi)?;
    if c > c_max {
        return Err(Error::DoesNotFit {
            c: c.to_f64_lossy(),
            c_max: c_max.to_f64_lossy(),
        });
    }
    let theta = if c <= radial {
        T::zero()
    } else if c == c_max {
        pi
    } else {
        // evaluations are kept to check the monotonicity bisection relies on
        let seen: Vec<(T, T)> = vec![(T::zero(), radial), (pi, c_max)];
        let failure: Option<Error> = None;
        let target = c;
        let g = |th: T, seen: &mut Vec<(T, T)>, failure: &mut Option<Error>| -> T {
            match side_at(th) {
                Ok(d) => {
                    seen.push((th, d));
                    d - target
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    T::nan()
                }
            }
        };
        let mut cell = (seen, failure);
        let root = illinois(
            |th| g(th, &mut cell.0, &mut cell.1),
            T::zero(),
            pi,
            radial - c,
            c_max - c,
            T::epsilon() * T::lit(4.0),
        );
        let (mut seen, failure) = cell;
        if let Some(e) = failure {
            return Err(e);
        }
        seen.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite angles"));
        if let Some(w) = seen.windows(2).find(|w| w[1].1 < w[0].1 - T::lit(MONOTONE_SLACK) * (T::one() + c)) {
            return Err(Error::NotMonotone(format!(
                "d(θ = {}) = {} > d(θ = {}) = {} for a = {a}, b = {b}",
                w[0].0, w[0].1, w[1].0, w[1].1
            )));
        }
        root
    };
    let y = PolarPoint::new(b, theta);
    let (vertex_angles, realized_c) = if theta == T::zero() {
        // collinear: x̃ and ỹ on one meridian
        let (near, far) = if a < b { (T::zero(), pi) } else { (pi, T::zero()) };
        let angles = if a == b { [T::zero(), T::zero(), T::zero()] } else { [T::zero(), near, far] };
        (angles, radial)
    } else {
        let (mut angles, len) = pole_triangle_angles(model, &x, &y, opts)?;
        angles[0] = theta;
        (angles, len)
    };
    Ok(ComparisonTriangle {
        sides: [a, b, c],
        realized_c,
        pole_angle: theta,
        vertex_angles,
        x,
        y,
    })
}

/// One random triangle of a GTCT run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtctTrial<T> {
    pub trial: usize,
    pub sides: [T; 3],
    /// Angles at the pole, `x`, `y` on the surface.
    pub surface_angles: [T; 3],
    /// The same on the model surface.
    pub model_angles: [T; 3],
    /// `surface − model` per vertex.
    pub slacks: [T; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtctReport<T> {
    pub surface: String,
    pub model: String,
    pub trials: usize,
    pub skipped: usize,
    /// Smallest slack over every trial and vertex.
    pub min_slack: T,
    pub results: Vec<GtctTrial<T>>,
    /// Reasons for skipped trials.
    pub skip_reasons: Vec<(usize, String)>,
}

impl<T: Real> GtctReport<T> {
    /// One CSV row per trial.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "trial", "a", "b", "c", "angle_p", "model_angle_p", "angle_x", "model_angle_x", "angle_y", "model_angle_y",
            "slack_p", "slack_x", "slack_y",
        ])?;
        for r in &self.results {
            let mut row = vec![r.trial.to_string()];
            row.extend(r.sides.iter().map(|v| format!("{v:e}")));
            for k in 0..3 {
                row.push(format!("{:e}", r.surface_angles[k]));
                row.push(format!("{:e}", r.model_angles[k]));
            }
            row.extend(r.slacks.iter().map(|v| format!("{v:e}")));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// First `t` on a 1000-point grid where the surface's radial curvature is
/// below the model's, with the two values.
pub fn dominance_violation<T: Real>(surface: &ProfileModel<T>, model: &ProfileModel<T>) -> Result<Option<(T, T, T)>> {
    let t_end = surface.t_max().min(model.t_max());
    for i in 0..=DOMINANCE_GRID {
        let t = t_end * T::from_usize_lossy(i) / T::from_usize_lossy(DOMINANCE_GRID);
        let g_s = surface.eval_curvature(t)?;
        let g_m = model.eval_curvature(t)?;
        if g_s < g_m - T::lit(1e-12) * T::one().max(g_m.abs()) {
            return Ok(Some((t, g_s, g_m)));
        }
    }
    Ok(None)
}

/// Samples `trials` triangles with a vertex at the pole of `surface`,
/// builds their comparison triangles on `model`, and compares angles.
pub fn gtct_check<T: Real>(
    surface: &ProfileModel<T>,
    model: &ProfileModel<T>,
    trials: usize,
    seed: u64,
) -> Result<GtctReport<T>> {
    gtct_check_with(surface, model, trials, seed, &DistanceOptions::default())
}

pub fn gtct_check_with<T: Real>(
    surface: &ProfileModel<T>,
    model: &ProfileModel<T>,
    trials: usize,
    seed: u64,
    opts: &DistanceOptions<T>,
) -> Result<GtctReport<T>> {
    if let Some((t, g_s, g_m)) = dominance_violation(surface, model)? {
        return Err(Error::Dominance {
            t: t.to_f64_lossy(),
            g_m: g_s.to_f64_lossy(),
            g_model: g_m.to_f64_lossy(),
        });
    }
    if !model.check_von_mangoldt(DOMINANCE_GRID)?.von_mangoldt {
        return Err(Error::Precondition(format!("model `{}` is not von Mangoldt", model.name())));
    }
    let lo = 0.1f64.ln();
    let hi = (0.8 * surface.t_max().to_f64_lossy()).ln();
    let outcomes: Vec<std::result::Result<GtctTrial<T>, String>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let x = PolarPoint::new(T::lit(rng.gen_range(lo..hi).exp()), T::lit(rng.gen_range(0.0..std::f64::consts::TAU)));
            let y = PolarPoint::new(T::lit(rng.gen_range(lo..hi).exp()), T::lit(rng.gen_range(0.0..std::f64::consts::TAU)));
            let run = || -> Result<GtctTrial<T>> {
                let (surface_angles, c) = pole_triangle_angles(surface, &x, &y, opts)?;
                let tri = build_comparison_triangle_with(model, x.t, y.t, c, opts)?;
                let mut slacks = [T::zero(); 3];
                for k in 0..3 {
                    slacks[k] = surface_angles[k] - tri.vertex_angles[k];
                }
                Ok(GtctTrial {
                    trial,
                    sides: [x.t, y.t, c],
                    surface_angles,
                    model_angles: tri.vertex_angles,
                    slacks,
                })
            };
            run().map_err(|e| e.to_string())
        })
        .collect();
    let mut results = Vec::new();
    let mut skip_reasons = Vec::new();
    for (trial, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(r) => results.push(r),
            Err(e) => skip_reasons.push((trial, e)),
        }
    }
    let min_slack = results
        .iter()
        .flat_map(|r| r.slacks)
        .fold(T::infinity(), T::min);
    Ok(GtctReport {
        surface: surface.name().to_string(),
        model: model.name().to_string(),
        trials,
        skipped: skip_reasons.len(),
        min_slack,
        results,
        skip_reasons,
    })
}

/// Distance options tight enough for comparison-angle work.
pub fn comparison_options<T: Real>() -> DistanceOptions<T> {
    DistanceOptions::default().with_tol(T::lit(DEFAULT_TOL))
}
