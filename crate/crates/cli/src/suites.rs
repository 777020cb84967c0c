use std::f64::consts::PI;

use mangoldt::asymptotics::{
    additivity_check_with, find_r_delta_with, gradient_alignment_check_with, main_theorem_suite_with, MeridianRay,
    TheoremGrid,
};
use mangoldt::comparison::gtct_check_with;
use mangoldt::cutlocus::{cut_locus, cut_margin, verify_cut_point, CutStatus};
use mangoldt::geodesic::PolarPoint;
use mangoldt::{Error, ProfileModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::commands::{load_model, Context, DEFAULT_HORIZON, GTCT_SLACK};
use crate::output::{CliError, CliResult};

pub struct Settings {
    pub surface: Option<String>,
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub trials: usize,
    pub skips: usize,
    pub failures: usize,
}

impl Tally {
    fn record(&mut self, ok: bool) {
        self.trials += 1;
        if !ok {
            self.failures += 1;
        }
    }

    fn skip(&mut self) {
        self.trials += 1;
        self.skips += 1;
    }
}

/// Outcome of one suite run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteVerdict {
    pub suite: String,
    pub model: String,
    pub passed: bool,
    pub trials: usize,
    pub skips: usize,
    pub failures: usize,
    /// Files written, relative to the output directory.
    pub artifacts: Vec<String>,
}

type Runner = fn(&Settings, &mut Context, &ProfileModel) -> CliResult<Tally>;

struct Suite {
    name: &'static str,
    statement: &'static str,
    default_model: &'static str,
    run: Runner,
}

const SUITES: [Suite; 7] = [
    Suite {
        name: "profile",
        statement: "radial curvature G = −f''/f with f(0) = 0, f'(0) = 1; Jacobi equation f'' + G f = 0; von Mangoldt monotonicity and total curvature (Sinclair example: G(0+) = 8, c = 2π)",
        default_model: "sinclair",
        run: profile_suite,
    },
    Suite {
        name: "cut-locus",
        statement: "cut locus theorem: Cut(z) is the subray of the opposite meridian starting at the first conjugate point of z along the geodesic through the pole",
        default_model: "sinclair",
        run: cut_locus_suite,
    },
    Suite {
        name: "gtct",
        statement: "generalized Toponogov comparison (GTCT-II): ∠(pxy) ≥ ∠(p̃x̃ỹ) for triangles with a vertex at the pole",
        default_model: "hyperbolic",
        run: gtct_suite,
    },
    Suite {
        name: "busemann",
        statement: "Busemann additivity along asymptotic rays: F(σ(t)) = t + F(σ(0))",
        default_model: "plane",
        run: busemann_suite,
    },
    Suite {
        name: "gradient",
        statement: "differentiability of the Busemann function: its gradient equals the velocity of the unique asymptotic ray",
        default_model: "sinclair",
        run: gradient_suite,
    },
    Suite {
        name: "ray-mass",
        statement: "ray mass lemma: there are R, δ > 0 with μ(A_q) < π − 2δ for every q outside B_R",
        default_model: "sinclair",
        run: ray_mass_suite,
    },
    Suite {
        name: "main-theorem",
        statement: "critical points of F lie in B_R; growth F(q) − F(α(R)) ≥ (d(p,q) − R) sin δ; sublevel sets lie in balls of radius (a − N_R)/sin δ + R",
        default_model: "sinclair",
        run: main_theorem,
    },
];

pub fn print_list() {
    for s in &SUITES {
        println!("{:<14}{}", s.name, s.statement);
    }
}

pub fn run(name: &str, settings: &Settings, ctx: &mut Context) -> CliResult<bool> {
    let Some(suite) = SUITES.iter().find(|s| s.name == name) else {
        let known: Vec<&str> = SUITES.iter().map(|s| s.name).collect();
        return Err(CliError::Usage(format!("unknown suite `{name}` (known: {})", known.join(", "))));
    };
    let model = ctx.model(Some(suite.default_model))?;
    let tally = (suite.run)(settings, ctx, &model)?;
    let mut artifacts = ctx.artifacts.names();
    if ctx.artifacts.enabled() {
        artifacts.push("verdict.json".to_string());
    }
    let verdict = SuiteVerdict {
        suite: suite.name.to_string(),
        model: model.name().to_string(),
        passed: tally.failures == 0,
        trials: tally.trials,
        skips: tally.skips,
        failures: tally.failures,
        artifacts,
    };
    println!(
        "suite {} on {}: {} ({} trials, {} skipped, {} failed)",
        verdict.suite,
        verdict.model,
        if verdict.passed { "passed" } else { "FAILED" },
        verdict.trials,
        verdict.skips,
        verdict.failures
    );
    ctx.artifacts.json("verdict.json", &verdict)?;
    Ok(verdict.passed)
}

const JACOBI_GRID: usize = 10_000;
const JACOBI_TOL: f64 = 1e-9;
const CURVATURE_AGREEMENT: f64 = 1e-3;

fn profile_suite(_: &Settings, ctx: &mut Context, m: &ProfileModel) -> CliResult<Tally> {
    let mut tally = Tally::default();
    let mut worst_jacobi = 0.0f64;
    for k in 1..=JACOBI_GRID {
        let t = m.t_max() * k as f64 / JACOBI_GRID as f64;
        match m.jacobi_residual(t) {
            Some(r) => {
                let scaled = r.abs() / m.ddf(t).abs().max(1.0);
                worst_jacobi = worst_jacobi.max(scaled);
                tally.record(scaled <= JACOBI_TOL);
            }
            None => tally.skip(),
        }
    }
    let curv = m.check_von_mangoldt(JACOBI_GRID)?;
    tally.record(curv.von_mangoldt);
    let c = m.total_curvature();
    if c.finite {
        tally.record((c.c_limit - c.c_integral).abs() <= CURVATURE_AGREEMENT);
    } else {
        tally.skip();
    }
    println!(
        "G(0+) = {:.6}, c = {:.6} (limit) {:.6} (integral), worst scaled Jacobi residual {worst_jacobi:.3e}",
        curv.g0, c.c_limit, c.c_integral
    );
    ctx.artifacts.json(
        "profile.json",
        &serde_json::json!({
            "g0": curv.g0,
            "von_mangoldt": curv.von_mangoldt,
            "first_violation": curv.first_violation,
            "total_curvature": c,
            "worst_jacobi_residual": worst_jacobi,
        }),
    )?;
    Ok(tally)
}

const CUT_SOURCES: [f64; 3] = [0.25, 0.5, 1.0];

fn cut_locus_suite(_: &Settings, ctx: &mut Context, m: &ProfileModel) -> CliResult<Tally> {
    let mut tally = Tally::default();
    let mut records = Vec::new();
    for t_z in CUT_SOURCES {
        let horizon = ctx.horizon_or(m.t_max())?;
        let locus = cut_locus(m, &PolarPoint::new(t_z, 0.0), horizon)?;
        if locus.status == CutStatus::EmptyUpToHorizon {
            // an empty verdict must rest on a diverging Jacobi field
            tally.record(locus.diverging == Some(true));
            records.push(serde_json::json!({ "locus": locus }));
            continue;
        }
        let end = locus.endpoint_t.expect("subray has an endpoint");
        let mut probes = vec![end + 1.0];
        if end / 2.0 > cut_margin(ctx.opts.tol) {
            probes.insert(0, end / 2.0);
        }
        for w in probes {
            let v = verify_cut_point(m, &locus, w, ctx.opts.tol)?;
            tally.record(v.passed);
            records.push(serde_json::json!({ "locus": locus, "check": v }));
        }
    }
    ctx.artifacts.json("cutlocus.json", &records)?;
    Ok(tally)
}

fn gtct_suite(settings: &Settings, ctx: &mut Context, m: &ProfileModel) -> CliResult<Tally> {
    let surface = load_model(settings.surface.as_deref(), None, Some("plane"))?;
    let trials = settings.trials.unwrap_or(100);
    let report = gtct_check_with(&surface, m, trials, ctx.seed, &ctx.opts)?;
    let mut tally = Tally::default();
    for r in &report.results {
        tally.record(r.slacks.iter().all(|&s| s >= GTCT_SLACK));
    }
    tally.trials += report.skipped;
    tally.skips += report.skipped;
    println!("surface {}, min slack {:.3e}", report.surface, report.min_slack);
    ctx.artifacts.csv("gtct.csv", |out| report.write_csv(out))?;
    ctx.artifacts.json("gtct.json", &report)?;
    Ok(tally)
}

const BUSEMANN_RADII: [f64; 2] = [0.5, 1.0];
const BUSEMANN_ANGLES: usize = 8;
const MONOTONE_DIP: f64 = 1e-9;

fn busemann_suite(_: &Settings, ctx: &mut Context, m: &ProfileModel) -> CliResult<Tally> {
    let horizon = ctx.horizon_or(1e3)?;
    let ray = MeridianRay::from_pole(0.0);
    let mut tally = Tally::default();
    let mut reports = Vec::new();
    for t in BUSEMANN_RADII {
        for j in 0..BUSEMANN_ANGLES {
            let x = PolarPoint::new(t, 2.0 * PI * j as f64 / BUSEMANN_ANGLES as f64);
            let r = additivity_check_with(m, &ray, &x, horizon, &ctx.opts)?;
            // F_T is non-decreasing in T
            tally.record(r.passed && r.base.doubled >= r.base.value - MONOTONE_DIP);
            reports.push(r);
        }
    }
    ctx.artifacts.json("busemann.json", &reports)?;
    Ok(tally)
}

const GRADIENT_POINTS: usize = 20;
const GRADIENT_STEP: f64 = 1e-3;
const GRADIENT_RADII: (f64, f64) = (0.5, 3.0);

fn gradient_suite(settings: &Settings, ctx: &mut Context, m: &ProfileModel) -> CliResult<Tally> {
    let horizon = ctx.horizon_or(DEFAULT_HORIZON)?;
    let ray = MeridianRay::from_pole(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let points: Vec<PolarPoint<f64>> = (0..settings.trials.unwrap_or(GRADIENT_POINTS))
        .map(|_| {
            let t = rng.gen_range(GRADIENT_RADII.0..GRADIENT_RADII.1);
            PolarPoint::new(t, rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    let mut tally = Tally::default();
    let mut checks = Vec::new();
    for q in &points {
        match gradient_alignment_check_with(m, &ray, q, horizon, GRADIENT_STEP, &ctx.opts) {
            Ok(g) => {
                tally.record(g.passed);
                checks.push(g);
            }
            Err(Error::Unstable(_)) => tally.skip(),
            Err(e) => return Err(e.into()),
        }
    }
    ctx.artifacts.json("gradient.json", &checks)?;
    Ok(tally)
}

const SCAN_RADII: [f64; 4] = [2.0, 4.0, 8.0, 16.0];

fn ray_mass_suite(_: &Settings, ctx: &mut Context, m: &ProfileModel) -> CliResult<Tally> {
    let horizon = ctx.horizon_or(DEFAULT_HORIZON)?;
    let scan = find_r_delta_with(m, &SCAN_RADII, horizon, &ctx.opts)?;
    let mut tally = Tally::default();
    match scan.found {
        Some(f) => {
            println!("R = {}, delta = {:.12}", f.radius, f.delta);
            for r in scan.masses.iter().filter(|r| r.q.t >= f.radius) {
                tally.record(f.delta > 0.0 && r.mu <= PI - 2.0 * f.delta);
            }
        }
        None => tally.record(false),
    }
    ctx.artifacts.csv("rays.csv", |out| scan.write_csv(out))?;
    ctx.artifacts.json("rays.json", &scan)?;
    Ok(tally)
}

const THEOREM_LEVELS: [f64; 3] = [1.0, 2.0, 4.0];
const THEOREM_RADII: usize = 8;
const THEOREM_ANGLES: usize = 16;

fn main_theorem(_: &Settings, ctx: &mut Context, m: &ProfileModel) -> CliResult<Tally> {
    let horizon = ctx.horizon_or(DEFAULT_HORIZON)?;
    let scan = find_r_delta_with(m, &SCAN_RADII, horizon, &ctx.opts)?;
    let mut tally = Tally::default();
    let Some(bounds) = scan.found else {
        println!("no (R, delta) found");
        tally.record(false);
        return Ok(tally);
    };
    let ray = MeridianRay::from_pole(0.0);
    let grid = TheoremGrid::beyond(bounds.radius, 4.0 * bounds.radius, THEOREM_RADII, THEOREM_ANGLES, THEOREM_LEVELS.to_vec());
    let report = main_theorem_suite_with(m, &ray, bounds, horizon, &grid, &ctx.opts)?;
    for c in &report.certificates {
        tally.record(c.passed);
    }
    for g in &report.growth {
        tally.record(g.passed);
    }
    for s in &report.sublevel_bound {
        tally.record(s.violations.is_empty());
    }
    println!(
        "R = {}, delta = {:.12}, critical candidates beyond R: {}, N_R = {:.6}",
        report.radius,
        report.delta,
        report.critical_candidates.len(),
        report.n_r
    );
    ctx.artifacts.csv("main_theorem.csv", |out| report.write_csv(out))?;
    ctx.artifacts.json("main_theorem.json", &report)?;
    Ok(tally)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_are_unique() {
        for (i, a) in SUITES.iter().enumerate() {
            assert!(SUITES[i + 1..].iter().all(|b| b.name != a.name));
            assert!(ProfileModel::by_name(a.default_model).is_ok());
        }
    }

    #[test]
    fn tally_counts() {
        let mut t = Tally::default();
        t.record(true);
        t.record(false);
        t.skip();
        assert_eq!(t, Tally { trials: 3, skips: 1, failures: 1 });
    }
}
