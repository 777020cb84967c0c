//! Cut loci of points on a model surface.
//!
//! For `z = (t_z, θ_z)` the cut locus is empty or the part of the opposite
//! meridian `θ = θ_z + π` beyond the first conjugate point of `z` along the
//! geodesic that runs through the pole. That conjugate point is found by
//! integrating the Jacobi equation along the broken meridian.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesic::{distance_with, shoot_to_meridian, Candidate, DistanceOptions, PolarPoint, DEFAULT_TOL};
use crate::ode::{Dopri5, Flow, OdeSystem, Tolerance};
use crate::profile::ProfileModel;
use crate::scalar::Real;

/// Size at which the linear Jacobi state is renormalized.
const RESCALE_AT: f64 = 1e64;
/// Relative tolerance of the Jacobi integration.
const JACOBI_TOL: f64 = 1e-12;

/// Normal Jacobi field along the meridian from `t_z` through the pole:
/// `y'' + G(t(s))·y = 0` with `t(s) = |t_z − s|`.
struct JacobiAlongMeridian<'a, T> {
    model: &'a ProfileModel<T>,
    t_z: T,
}

impl<'a, T: Real> OdeSystem<T, 2> for JacobiAlongMeridian<'a, T> {
    fn rhs(&self, s: T, y: &[T; 2]) -> [T; 2] {
        let t = (self.t_z - s).abs().min(self.model.t_max());
        let g = self.model.eval_curvature(t).unwrap_or_else(|_| T::nan());
        [y[1], -g * y[0]]
    }
}

/// First zero of the Jacobi field and how the search ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjugateSearch<T> {
    /// Arclength of the first conjugate point, if one was found.
    pub arclength: Option<T>,
    /// Field and its derivative at the horizon (after renormalization), or
    /// at the conjugate point.
    pub y_end: T,
    pub dy_end: T,
    /// Derivative at half the horizon, on the same scale as `dy_end`.
    pub dy_half: T,
    /// `y > 0` and `y' ≥ y'(horizon/2) > 0` at the horizon.
    pub diverging: bool,
}

/// First conjugate point of `(t_z, ·)` along the geodesic that runs in
/// through the pole and out along the opposite meridian.
pub fn first_conjugate_through_pole<T: Real>(
    model: &ProfileModel<T>,
    t_z: T,
    horizon: T,
) -> Result<ConjugateSearch<T>> {
    if !(t_z > T::zero()) || !(horizon > t_z) {
        return Err(Error::Precondition(format!(
            "conjugate search needs 0 < t_z < horizon (t_z = {t_z}, horizon = {horizon})"
        )));
    }
    if horizon - t_z > model.t_max() {
        return Err(Error::Domain {
            what: "horizon − t_z",
            value: (horizon - t_z).to_f64_lossy(),
            lo: 0.0,
            hi: model.t_max().to_f64_lossy(),
        });
    }
    let sys = JacobiAlongMeridian { model, t_z };
    let solver = Dopri5::new(Tolerance::new(T::lit(JACOBI_TOL), T::lit(JACOBI_TOL)))
        .with_initial_step(T::lit(1e-3).min(t_z));
    let half = horizon / T::lit(2.0);
    let big = T::lit(RESCALE_AT);
    let mut y = [T::zero(), T::one()];
    let mut s = T::zero();
    // scale of the current state relative to the state at horizon/2
    let mut dy_half: Option<T> = None;
    let mut scale_since_half = T::one();
    // legs end at the pole passage and at horizon/2 so the curvature is
    // smooth on each and y'(horizon/2) is captured exactly
    let mut stops = vec![t_z, half, horizon];
    stops.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    for &stop in &stops {
        while s < stop {
            let mut zero = None;
            let mut blown = false;
            let summary = solver.run(&sys, s, y, stop, |step| {
                if let Some((s0, y0)) = step.find_root(|_, y| y[0]) {
                    zero = Some((s0, y0));
                    return Flow::Stop;
                }
                if step.y1[0].abs().max(step.y1[1].abs()) > big {
                    blown = true;
                    return Flow::Stop;
                }
                Flow::Continue
            })?;
            if let Some((s_star, y_star)) = zero {
                if s_star <= T::epsilon() * T::lit(64.0) {
                    // the initial zero at s = 0 itself
                } else {
                    if s_star <= t_z {
                        return Err(Error::ModelInconsistency(format!(
                            "conjugate point at s = {s_star} before the pole (t_z = {t_z})"
                        )));
                    }
                    return Ok(ConjugateSearch {
                        arclength: Some(s_star),
                        y_end: y_star[0],
                        dy_end: y_star[1],
                        dy_half: dy_half.unwrap_or(T::nan()),
                        diverging: false,
                    });
                }
            }
            s = summary.s;
            y = summary.y;
            if blown {
                let norm = y[0].abs().max(y[1].abs());
                y = [y[0] / norm, y[1] / norm];
                scale_since_half = scale_since_half / norm;
            }
        }
        if stop == half && dy_half.is_none() {
            dy_half = Some(y[1]);
            scale_since_half = T::one();
        }
    }
    let dy_half = dy_half.unwrap_or(T::nan()) * scale_since_half;
    Ok(ConjugateSearch {
        arclength: None,
        y_end: y[0],
        dy_end: y[1],
        dy_half,
        diverging: y[0] > T::zero() && dy_half > T::zero() && y[1] >= dy_half,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutStatus {
    /// No conjugate point before the horizon.
    EmptyUpToHorizon,
    /// The cut locus is the opposite meridian beyond `endpoint_t`.
    Subray,
}

/// Structure of the cut locus of one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutLocusDescription<T> {
    pub source: PolarPoint<T>,
    pub status: CutStatus,
    /// Radius where the subray starts on the opposite meridian.
    pub endpoint_t: Option<T>,
    pub conjugate_arclength: Option<T>,
    pub horizon: T,
    /// Whether the empty verdict is backed by a diverging Jacobi field.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diverging: Option<bool>,
}

impl<T: Real> CutLocusDescription<T> {
    /// Angle of the meridian carrying the subray.
    pub fn meridian(&self) -> T {
        crate::scalar::wrap_two_pi(self.source.theta + T::PI())
    }

    pub fn endpoint(&self) -> Option<PolarPoint<T>> {
        self.endpoint_t.map(|t| PolarPoint::new(t, self.meridian()))
    }
}

pub fn cut_locus<T: Real>(model: &ProfileModel<T>, z: &PolarPoint<T>, horizon: T) -> Result<CutLocusDescription<T>> {
    if z.is_pole() {
        return Err(Error::Precondition("the cut locus of the pole is not computed".into()));
    }
    let search = first_conjugate_through_pole(model, z.t, horizon)?;
    Ok(match search.arclength {
        Some(s) => CutLocusDescription {
            source: *z,
            status: CutStatus::Subray,
            endpoint_t: Some(s - z.t),
            conjugate_arclength: Some(s),
            horizon,
            diverging: None,
        },
        None => CutLocusDescription {
            source: *z,
            status: CutStatus::EmptyUpToHorizon,
            endpoint_t: None,
            conjugate_arclength: None,
            horizon,
            diverging: Some(search.diverging),
        },
    })
}

/// Which side of the subray endpoint a probe point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutSide {
    /// Between the pole and the endpoint: the broken meridian is the unique
    /// minimizer.
    Near,
    /// On the subray: two mirror-image minimizers.
    Far,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutPointVerification<T> {
    pub source: PolarPoint<T>,
    pub w_t: T,
    pub endpoint_t: T,
    pub side: CutSide,
    /// Length of the path through the pole, `t_z + w_t`.
    pub through_pole: T,
    /// Shortest distance found.
    pub distance: T,
    /// Far side: shortest geodesic turning each way, with its Clairaut
    /// constant.
    pub positive: Option<(T, T)>,
    pub negative: Option<(T, T)>,
    /// Near side: number of distinct minimizers.
    pub minimizers: usize,
    /// Distance from the source to the endpoint, against the conjugate
    /// arclength.
    pub endpoint_distance: T,
    pub passed: bool,
}

/// Tolerance on equal lengths in [`verify_cut_point`].
pub const LENGTH_AGREEMENT: f64 = 1e-6;
/// Tolerance on mirror-image Clairaut constants.
pub const NU_AGREEMENT: f64 = 1e-8;

/// Band around the endpoint excluded from verification.
pub fn cut_margin<T: Real>(tol: T) -> T {
    T::lit(1e-3).max(tol * T::lit(10.0))
}

fn shortest<T: Real>(cands: &[Candidate<T>]) -> Option<Candidate<T>> {
    cands
        .iter()
        .copied()
        .min_by(|a, b| a.length.partial_cmp(&b.length).expect("finite lengths"))
}

/// Checks the minimizers from `z` to the point at radius `w_t` on the
/// opposite meridian against the predicted cut-locus structure.
pub fn verify_cut_point<T: Real>(
    model: &ProfileModel<T>,
    locus: &CutLocusDescription<T>,
    w_t: T,
    tol: T,
) -> Result<CutPointVerification<T>> {
    let (Some(endpoint_t), Some(s_star)) = (locus.endpoint_t, locus.conjugate_arclength) else {
        return Err(Error::Precondition("cut locus is not a subray".into()));
    };
    let margin = cut_margin(tol);
    let side = if w_t > endpoint_t + margin {
        CutSide::Far
    } else if w_t < endpoint_t - margin && w_t > T::zero() {
        CutSide::Near
    } else {
        return Err(Error::Precondition(format!(
            "w_t = {w_t} within the margin {margin} of the endpoint {endpoint_t}"
        )));
    };
    let z = locus.source;
    let w = PolarPoint::new(w_t, locus.meridian());
    let through_pole = z.t + w_t;
    let opts = DistanceOptions::default().with_tol(tol.min(T::lit(DEFAULT_TOL)));
    let agree = T::lit(LENGTH_AGREEMENT);
    let endpoint_distance = distance_with(model, &z, &locus.endpoint().expect("subray"), &opts)?.length;
    let endpoint_ok = (endpoint_distance - s_star).abs() <= agree;
    let mut report = CutPointVerification {
        source: z,
        w_t,
        endpoint_t,
        side,
        through_pole,
        distance: T::nan(),
        positive: None,
        negative: None,
        minimizers: 0,
        endpoint_distance,
        passed: false,
    };
    match side {
        CutSide::Far => {
            let cap = through_pole * (T::one() + T::lit(1e-9)) + T::lit(1e-9);
            let pos = shortest(&shoot_to_meridian(model, z.t, w_t, T::PI(), cap, &opts)?);
            let neg = shortest(&shoot_to_meridian(model, z.t, w_t, -T::PI(), cap, &opts)?);
            report.positive = pos.map(|c| (c.length, c.nu));
            report.negative = neg.map(|c| (c.length, c.nu));
            if let (Some(p), Some(n)) = (pos, neg) {
                report.distance = p.length.min(n.length).min(through_pole);
                report.minimizers = 2;
                report.passed = endpoint_ok
                    && (p.length - n.length).abs() <= agree
                    && (p.nu + n.nu).abs() <= T::lit(NU_AGREEMENT)
                    && p.nu > T::zero()
                    && p.length.max(n.length) <= through_pole + agree;
            }
        }
        CutSide::Near => {
            let d = distance_with(model, &z, &w, &opts)?;
            report.distance = d.length;
            // tied candidates that are all the broken meridian count once
            let distinct_nu = |nu: T| nu.abs() > T::lit(NU_AGREEMENT).sqrt() * model.f(z.t).abs();
            let mut minimizers = 1;
            for alt in &d.alternatives {
                if distinct_nu(alt.nu()) {
                    minimizers += 1;
                }
            }
            if distinct_nu(d.path.nu()) {
                minimizers += 1;
            }
            report.minimizers = minimizers;
            report.passed = endpoint_ok && minimizers == 1 && (d.length - through_pole).abs() <= agree;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ProfileModel;

    #[test]
    fn plane_and_hyperbolic_have_no_conjugate_points() {
        for m in [ProfileModel::plane(), ProfileModel::hyperbolic()] {
            let r = first_conjugate_through_pole(&m, 1.0, 20.0).unwrap();
            assert_eq!(r.arclength, None);
            assert!(r.diverging, "{}", m.name());
        }
    }

    #[test]
    fn plane_field_is_linear() {
        let m = ProfileModel::plane();
        let r = first_conjugate_through_pole(&m, 2.0, 7.0).unwrap();
        assert!((r.y_end - 7.0).abs() < 1e-9);
        assert!((r.dy_end - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sphere_like_profile_has_conjugate_at_pi() {
        // f = sin t on [0, 3]: G ≡ 1, conjugate point at arclength π
        let samples: Vec<(f64, f64)> = (0..=3000).map(|k| (k as f64 * 1e-3, (k as f64 * 1e-3).sin())).collect();
        let m = ProfileModel::from_samples("cap", &samples, None).unwrap();
        let r = first_conjugate_through_pole(&m, 1.0, 3.5).unwrap();
        let s = r.arclength.unwrap();
        assert!((s - std::f64::consts::PI).abs() < 1e-3, "{s}");
    }

    #[test]
    fn empty_cut_locus_on_the_plane() {
        let c = cut_locus(&ProfileModel::plane(), &PolarPoint::new(1.0, 0.0), 40.0).unwrap();
        assert_eq!(c.status, CutStatus::EmptyUpToHorizon);
        assert!(cut_locus(&ProfileModel::plane(), &PolarPoint::pole(), 40.0).is_err());
    }

    #[test]
    fn sinclair_subray_lies_beyond_the_pole() {
        let m = ProfileModel::sinclair();
        let c = cut_locus(&m, &PolarPoint::new(0.5, 0.0), 40.0).unwrap();
        if let Some(s) = c.conjugate_arclength {
            assert_eq!(c.status, CutStatus::Subray);
            assert!(s > 0.5);
            assert!((c.endpoint_t.unwrap() - (s - 0.5)).abs() < 1e-15);
            assert!((c.meridian() - std::f64::consts::PI).abs() < 1e-15);
        } else {
            assert!(c.diverging.unwrap());
        }
    }

    #[test]
    fn sinclair_minimizers_on_both_sides_of_the_endpoint() {
        let m = ProfileModel::sinclair();
        let c = cut_locus(&m, &PolarPoint::new(0.5, 0.0), 40.0).unwrap();
        let e = c.endpoint_t.unwrap();
        let near = verify_cut_point(&m, &c, e / 2.0, 1e-10).unwrap();
        assert_eq!(near.side, CutSide::Near);
        assert!(near.passed, "{near:?}");
        assert!((near.distance - (0.5 + e / 2.0)).abs() < 1e-6);
        let far = verify_cut_point(&m, &c, e + 1.0, 1e-10).unwrap();
        assert_eq!(far.side, CutSide::Far);
        assert!(far.passed, "{far:?}");
        let (lp, np) = far.positive.unwrap();
        let (ln, nn) = far.negative.unwrap();
        assert!((lp - ln).abs() < 1e-6 && (np + nn).abs() < 1e-8);
        assert!(far.distance < far.through_pole);
        assert!(verify_cut_point(&m, &c, e, 1e-10).is_err());
    }

    #[test]
    fn plane_rejects_verification() {
        let m = ProfileModel::plane();
        let c = cut_locus(&m, &PolarPoint::new(1.0, 0.0), 20.0).unwrap();
        assert!(matches!(verify_cut_point(&m, &c, 3.0, 1e-10), Err(Error::Precondition(_))));
    }
}
