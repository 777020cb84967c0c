//! Acceptance run: one line per criterion, non-zero exit if any fails.
//!
//! Reference values (law of cosines, hyperbolic half-angle formulas,
//! `t·cos θ`) are computed here from closed forms, independently of the
//! library.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use mangoldt::asymptotics::{
    additivity_check, busemann_value, find_r_delta, gradient_alignment_check, main_theorem_suite, MeridianRay,
    TheoremGrid,
};
use mangoldt::comparison::gtct_check;
use mangoldt::cutlocus::{cut_locus, verify_cut_point, CutSide, CutStatus};
use mangoldt::geodesic::{distance, PolarPoint};
use mangoldt::oracle::RevolutionMesh;
use mangoldt::{Builtin, Error, ProfileModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome { passed, detail: detail.into() }
    }

    fn error(e: Error) -> Self {
        Outcome::new(false, format!("error: {e}"))
    }
}

type Check = fn() -> Result<Outcome, Error>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_point(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> PolarPoint<f64> {
    PolarPoint::new(rng.gen_range(lo..hi), rng.gen_range(0.0..TAU))
}

fn sinclair_profile() -> Result<Outcome, Error> {
    let start = Instant::now();
    let m = ProfileModel::sinclair();
    let curv = m.check_von_mangoldt(10_000)?;
    let c = m.total_curvature();
    let elapsed = start.elapsed();
    let passed = (curv.g0 - 8.0).abs() <= 1e-3
        && curv.strictly_decreasing
        && m.t_max() >= 40.0
        && (c.c_limit - TAU).abs() <= 1e-2
        && (c.c_integral - TAU).abs() <= 1e-2
        && elapsed < Duration::from_secs(1);
    Ok(Outcome::new(
        passed,
        format!(
            "G(0+) = {:.6}, strictly decreasing: {}, c = {:.6} (limit) / {:.6} (integral), {:.3} s",
            curv.g0,
            curv.strictly_decreasing,
            c.c_limit,
            c.c_integral,
            elapsed.as_secs_f64()
        ),
    ))
}

fn jacobi_identity() -> Result<Outcome, Error> {
    let mut worst = 0.0f64;
    for b in Builtin::ALL {
        let m = ProfileModel::builtin(b);
        for k in 1..=10_000 {
            let t = m.t_max() * k as f64 / 1e4;
            let r = m.jacobi_residual(t).expect("built-in models are closed-form");
            worst = worst.max(r.abs() / m.ddf(t).abs().max(1.0));
        }
    }
    Ok(Outcome::new(worst <= 1e-9, format!("worst scaled residual {worst:.2e} over 4 models × 10⁴ points")))
}

fn law_of_cosines(a: &PolarPoint<f64>, b: &PolarPoint<f64>) -> f64 {
    let (xa, ya) = (a.t * a.theta.cos(), a.t * a.theta.sin());
    let (xb, yb) = (b.t * b.theta.cos(), b.t * b.theta.sin());
    (xa - xb).hypot(ya - yb)
}

fn plane_distances() -> Result<Outcome, Error> {
    let m = ProfileModel::plane();
    let mut r = rng(3);
    let pairs: Vec<_> = (0..100).map(|_| (random_point(&mut r, 0.1, 10.0), random_point(&mut r, 0.1, 10.0))).collect();
    let errors: Result<Vec<f64>, Error> = pairs
        .par_iter()
        .map(|(a, b)| Ok((distance(&m, a, b)?.length - law_of_cosines(a, b)).abs()))
        .collect();
    let worst_cosine = errors?.into_iter().fold(0.0, f64::max);
    let triples: Vec<_> = (0..200).map(|_| [0; 3].map(|_| random_point(&mut r, 0.1, 10.0))).collect();
    let defects: Result<Vec<(f64, f64)>, Error> = triples
        .par_iter()
        .map(|[x, y, z]| {
            let xy = distance(&m, x, y)?.length;
            let yx = distance(&m, y, x)?.length;
            let yz = distance(&m, y, z)?.length;
            let xz = distance(&m, x, z)?.length;
            Ok(((xy - yx).abs(), xz - xy - yz))
        })
        .collect();
    let (asym, excess) = defects?.into_iter().fold((0.0f64, f64::NEG_INFINITY), |(s, e), (a, b)| (s.max(a), e.max(b)));
    Ok(Outcome::new(
        worst_cosine <= 1e-8 && asym <= 1e-6 && excess <= 1e-6,
        format!("law of cosines {worst_cosine:.2e} (100 pairs), asymmetry {asym:.2e}, triangle excess {excess:.2e} (200 triples)"),
    ))
}

fn paraboloid_oracle() -> Result<Outcome, Error> {
    let m = ProfileModel::paraboloid();
    let mesh = RevolutionMesh::build(&m, 10.0, 2000, 512)?;
    let mut r = rng(5);
    let pairs: Vec<_> = (0..20).map(|_| (random_point(&mut r, 0.2, 8.0), random_point(&mut r, 0.2, 8.0))).collect();
    let gaps: Result<Vec<(f64, f64)>, Error> = pairs
        .par_iter()
        .map(|(a, b)| {
            let o = mesh.distance(&m, a, b);
            let s = distance(&m, &o.from, &o.to)?.length;
            Ok(((o.length - s) / s, o.length - s))
        })
        .collect();
    let gaps = gaps?;
    let worst = gaps.iter().map(|g| g.0).fold(0.0, f64::max);
    let lowest = gaps.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
    Ok(Outcome::new(
        worst <= 1e-2 && lowest >= -1e-9,
        format!("worst relative gap {worst:.3e}, smallest oracle − shooting {lowest:.2e} on 20 pairs"),
    ))
}

/// Hyperbolic angles opposite each side, in the cancellation-free
/// half-angle form.
fn hyperbolic_angle(opposite: f64, u: f64, v: f64) -> f64 {
    let s = (opposite + u + v) / 2.0;
    let ratio = (s - u).sinh() * (s - v).sinh() / (u.sinh() * v.sinh());
    2.0 * ratio.max(0.0).sqrt().min(1.0).asin()
}

fn gtct_plane_hyperbolic() -> Result<Outcome, Error> {
    let plane = ProfileModel::plane();
    let hyp = ProfileModel::hyperbolic();
    let report = gtct_check(&plane, &hyp, 100, 42)?;
    let mut closed_form = 0.0f64;
    for t in &report.results {
        let [a, b, c] = t.sides;
        // angles at the pole, x = (a, ·) and y = (b, ·)
        let exact = [hyperbolic_angle(c, a, b), hyperbolic_angle(b, a, c), hyperbolic_angle(a, b, c)];
        for (got, want) in t.model_angles.iter().zip(exact) {
            closed_form = closed_form.max((got - want).abs());
        }
    }
    let identity = gtct_check(&plane, &plane, 100, 42)?;
    let identity_slack = identity.results.iter().flat_map(|t| t.slacks).map(f64::abs).fold(0.0, f64::max);
    let passed = report.skipped == 0
        && report.min_slack >= -1e-6
        && closed_form <= 1e-8
        && identity.skipped == 0
        && identity_slack <= 1e-6;
    Ok(Outcome::new(
        passed,
        format!(
            "min slack {:.2e}, closed-form angle error {closed_form:.2e}, identity |slack| {identity_slack:.2e}, skipped {}+{}",
            report.min_slack, report.skipped, identity.skipped
        ),
    ))
}

fn plane_busemann() -> Result<Outcome, Error> {
    let m = ProfileModel::plane();
    let ray = MeridianRay::from_pole(0.0);
    let horizon = 1e3;
    let grid: Vec<PolarPoint<f64>> = (1..=10)
        .flat_map(|i| (0..16).map(move |j| PolarPoint::new(0.1 * i as f64, TAU * j as f64 / 16.0)))
        .collect();
    let values: Result<Vec<_>, Error> = grid.par_iter().map(|x| busemann_value(&m, &ray, x, horizon)).collect();
    let values = values?;
    let worst = values.iter().map(|v| (v.value - v.x.t * v.x.theta.cos()).abs()).fold(0.0, f64::max);
    let monotone = values.iter().all(|v| v.doubled >= v.value - 1e-9);
    let mut r = rng(9);
    let pairs: Vec<(usize, usize)> = (0..200).map(|_| (r.gen_range(0..grid.len()), r.gen_range(0..grid.len()))).collect();
    let lipschitz: Result<Vec<f64>, Error> = pairs
        .par_iter()
        .map(|&(i, j)| Ok((values[i].value - values[j].value).abs() - law_of_cosines(&grid[i], &grid[j])))
        .collect();
    let lipschitz = lipschitz?.into_iter().fold(f64::NEG_INFINITY, f64::max);
    let additivity: Result<Vec<bool>, Error> =
        grid.par_iter().map(|x| Ok(additivity_check(&m, &ray, x, horizon)?.passed)).collect();
    let additive = additivity?.iter().filter(|&&ok| ok).count();
    Ok(Outcome::new(
        worst <= 1e-3 && monotone && lipschitz <= 1e-9 && additive == grid.len(),
        format!(
            "|F − t cos θ| ≤ {worst:.2e} on 10×16, Lipschitz excess {lipschitz:.2e}, monotone {monotone}, additivity {additive}/{}",
            grid.len()
        ),
    ))
}

fn sinclair_gradient() -> Result<Outcome, Error> {
    let m = ProfileModel::sinclair();
    let ray = MeridianRay::from_pole(0.0);
    let mut r = rng(13);
    let points: Vec<_> = (0..20).map(|_| random_point(&mut r, 0.5, 3.0)).collect();
    let (mut passed, mut failed, mut skipped) = (0, 0, 0);
    for q in &points {
        match gradient_alignment_check(&m, &ray, q, 200.0, 1e-3) {
            Ok(g) if g.passed => passed += 1,
            Ok(_) => failed += 1,
            Err(Error::Unstable(_)) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(Outcome::new(
        passed >= 18 && failed == 0,
        format!("{passed} passed, {failed} failed, {skipped} unstable of 20"),
    ))
}

fn sinclair_ray_mass() -> Result<Outcome, Error> {
    let start = Instant::now();
    let m = ProfileModel::sinclair();
    let scan = find_r_delta(&m, &[2.0, 4.0, 8.0, 16.0], 200.0)?;
    let elapsed = start.elapsed();
    let Some(found) = scan.found else {
        return Ok(Outcome::new(false, "no (R, δ) found"));
    };
    let beyond: Vec<_> = scan.masses.iter().filter(|r| r.q.t >= found.radius).collect();
    let worst_mu = beyond.iter().map(|r| r.mu).fold(0.0, f64::max);
    let passed = found.delta > 0.0
        && beyond.iter().all(|r| r.mu <= PI - 2.0 * found.delta)
        && elapsed < Duration::from_secs(600);
    Ok(Outcome::new(
        passed,
        format!(
            "R = {}, δ = {:.9}, max μ beyond R = {worst_mu:.2e}, {:.2} s",
            found.radius,
            found.delta,
            elapsed.as_secs_f64()
        ),
    ))
}

fn sinclair_main_theorem() -> Result<Outcome, Error> {
    let m = ProfileModel::sinclair();
    let scan = find_r_delta(&m, &[2.0, 4.0, 8.0, 16.0], 200.0)?;
    let Some(found) = scan.found else {
        return Ok(Outcome::new(false, "no (R, δ) found"));
    };
    let ray = MeridianRay::from_pole(0.0);
    let grid = TheoremGrid::beyond(found.radius, 4.0 * found.radius, 8, 16, vec![1.0, 2.0, 4.0]);
    let report = main_theorem_suite(&m, &ray, found, 200.0, &grid)?;
    let growth_ok = report.growth.len() == 32 && report.growth.iter().all(|g| g.passed);
    let sublevel_ok = report.sublevel_bound.len() == 3 && report.sublevel_bound.iter().all(|s| s.violations.is_empty());
    Ok(Outcome::new(
        report.critical_candidates.is_empty() && growth_ok && sublevel_ok,
        format!(
            "critical candidates beyond R: {}, growth {}/{}, sublevel levels clean: {sublevel_ok}",
            report.critical_candidates.len(),
            report.growth.iter().filter(|g| g.passed).count(),
            report.growth.len()
        ),
    ))
}

fn cut_loci() -> Result<Outcome, Error> {
    let z = PolarPoint::new(1.0, 0.0);
    let mut empty = true;
    for m in [ProfileModel::plane(), ProfileModel::hyperbolic()] {
        empty &= cut_locus(&m, &z, 40.0)?.status == CutStatus::EmptyUpToHorizon;
    }
    let m = ProfileModel::sinclair();
    let locus = cut_locus(&m, &PolarPoint::new(0.5, 0.0), 40.0)?;
    let Some(end) = locus.endpoint_t else {
        return Ok(Outcome::new(empty, format!("plane/hyperbolic empty: {empty}; no conjugate point on Sinclair")));
    };
    let far = verify_cut_point(&m, &locus, end + 1.0, 1e-10)?;
    let near = verify_cut_point(&m, &locus, end / 2.0, 1e-10)?;
    let mirror = match (far.positive, far.negative) {
        (Some((lp, _)), Some((ln, _))) => (lp - ln).abs(),
        _ => f64::INFINITY,
    };
    let near_gap = (near.distance - near.through_pole).abs();
    let passed = empty
        && far.side == CutSide::Far
        && far.passed
        && mirror <= 1e-6
        && near.side == CutSide::Near
        && near.passed
        && near_gap <= 1e-6;
    Ok(Outcome::new(
        passed,
        format!(
            "plane/hyperbolic empty: {empty}; Sinclair s* = {:.9}, mirror gap {mirror:.2e}, near-side gap {near_gap:.2e}",
            locus.conjugate_arclength.unwrap_or(f64::NAN)
        ),
    ))
}

const CRITERIA: [(&str, Check); 10] = [
    ("Sinclair profile sanity", sinclair_profile),
    ("Jacobi identity, closed-form models", jacobi_identity),
    ("plane distances", plane_distances),
    ("paraboloid shooting vs mesh oracle", paraboloid_oracle),
    ("GTCT plane vs hyperbolic", gtct_plane_hyperbolic),
    ("plane Busemann function", plane_busemann),
    ("Sinclair gradient alignment", sinclair_gradient),
    ("Sinclair ray mass", sinclair_ray_mass),
    ("Sinclair main-theorem suite", sinclair_main_theorem),
    ("cut loci", cut_loci),
];

fn main() -> ExitCode {
    let mut failures = 0;
    for (k, (name, check)) in CRITERIA.iter().enumerate() {
        let outcome = check().unwrap_or_else(Outcome::error);
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        println!("criterion {:>2} [{tag}] {name}: {}", k + 1, outcome.detail);
        if !outcome.passed {
            failures += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", CRITERIA.len() - failures, CRITERIA.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
