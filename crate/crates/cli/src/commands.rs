use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use mangoldt::asymptotics::{busemann_field_with, find_r_delta_with, MeridianRay};
use mangoldt::comparison::{build_comparison_triangle_with, gtct_check_with};
use mangoldt::cutlocus::{cut_locus, first_conjugate_through_pole, verify_cut_point, CutStatus};
use mangoldt::geodesic::{distance_with, integrate, DistanceOptions, GeodesicState, PolarPoint};
use mangoldt::{Builtin, ProfileModel};
use serde::Serialize;

use crate::args::{Command, GtctArgs, ModelCommand};
use crate::output::{io_error, Artifacts, CliError, CliResult};
use crate::suites;

/// Default horizon of ray and Busemann computations.
pub const DEFAULT_HORIZON: f64 = 200.0;
/// Smallest angle slack accepted by the triangle comparison.
pub const GTCT_SLACK: f64 = -1e-6;

pub struct Context {
    pub model_name: Option<String>,
    pub model_file: Option<std::path::PathBuf>,
    pub seed: u64,
    pub horizon: Option<f64>,
    pub opts: DistanceOptions<f64>,
    pub artifacts: Artifacts,
}

impl Context {
    /// The model selected on the command line, or `fallback`.
    pub fn model(&self, fallback: Option<&str>) -> CliResult<ProfileModel> {
        load_model(self.model_name.as_deref(), self.model_file.as_deref(), fallback)
    }

    pub fn horizon_or(&self, default: f64) -> CliResult<f64> {
        let h = self.horizon.unwrap_or(default);
        if !(h > 0.0 && h.is_finite()) {
            return Err(CliError::Usage(format!("--horizon must be positive, got {h}")));
        }
        Ok(h)
    }
}

pub fn load_model(name: Option<&str>, file: Option<&Path>, fallback: Option<&str>) -> CliResult<ProfileModel> {
    if let Some(path) = file {
        let source = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        return ProfileModel::from_json(&source).map_err(CliError::Model);
    }
    match name.or(fallback) {
        Some(n) => ProfileModel::by_name(n).map_err(CliError::Model),
        None => Err(CliError::Usage("a model is required (--model or --model-file)".into())),
    }
}

/// Runs one subcommand; `Ok(false)` is a failed check.
pub fn run(cmd: Command, ctx: &mut Context) -> CliResult<bool> {
    match cmd {
        Command::Model(ModelCommand::List) => {
            for b in Builtin::ALL {
                println!("{:<12}{}", b.name(), b.description());
            }
            Ok(true)
        }
        Command::Model(ModelCommand::Show) => model_show(ctx),
        Command::Geodesic { from, phi, length } => geodesic(ctx, from, phi, length),
        Command::Distance { a, b } => distance(ctx, a, b),
        Command::Conjugate { t } => conjugate(ctx, t),
        Command::Cutlocus { z, probe } => cutlocus(ctx, z, &probe),
        Command::Triangle { sides } => triangle(ctx, &sides),
        Command::Gtct(args) => gtct(ctx, &args),
        Command::Rays { radii } => rays(ctx, &radii),
        Command::Busemann { ray_theta, radii, angles } => busemann(ctx, ray_theta, &radii, angles),
        Command::Verify { suite, list, surface, trials } => {
            if list {
                suites::print_list();
                return Ok(true);
            }
            let name = suite.expect("clap requires --suite without --list");
            let settings = suites::Settings { surface, trials };
            suites::run(&name, &settings, ctx)
        }
    }
}

#[derive(Serialize)]
struct ModelSummary<'a> {
    name: &'a str,
    t_max: f64,
    g0: f64,
    von_mangoldt: bool,
    strictly_decreasing: bool,
    first_violation: Option<f64>,
    total_curvature: mangoldt::TotalCurvatureReport<f64>,
}

fn model_show(ctx: &mut Context) -> CliResult<bool> {
    let m = ctx.model(None)?;
    let curv = m.check_von_mangoldt(10_000)?;
    let c = m.total_curvature();
    println!("model {} (t_max = {})", m.name(), m.t_max());
    println!("G(0+) = {:.6}", curv.g0);
    let finite = if c.finite { "" } else { " (not finite)" };
    println!(
        "total curvature c = {:.6} = {:.6}π (limit), {:.6} (integral){finite}",
        c.c_limit,
        c.c_limit / PI,
        c.c_integral
    );
    match curv.first_violation {
        None => println!("von Mangoldt: yes"),
        Some(t) => println!("von Mangoldt: no (G increases at t = {t})"),
    }
    ctx.artifacts.json(
        "model.json",
        &ModelSummary {
            name: m.name(),
            t_max: m.t_max(),
            g0: curv.g0,
            von_mangoldt: curv.von_mangoldt,
            strictly_decreasing: curv.strictly_decreasing,
            first_violation: curv.first_violation,
            total_curvature: c,
        },
    )?;
    ctx.artifacts.csv("curvature.csv", |out| {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "G"])?;
        for (t, g) in &curv.samples {
            w.write_record([format!("{t:e}"), format!("{g:e}")])?;
        }
        w.flush()?;
        Ok(())
    })?;
    Ok(true)
}

fn geodesic(ctx: &mut Context, from: PolarPoint<f64>, phi: f64, length: f64) -> CliResult<bool> {
    let m = ctx.model(None)?;
    let start = GeodesicState::launch(&m, from, phi);
    let path = integrate(&m, &start, length, ctx.opts.tol)?;
    let end = path.endpoint();
    println!("endpoint t = {:.12}, theta = {:.12}", end.t, end.theta);
    println!("clairaut constant = {:.12e}", path.nu());
    println!("turning points: {}", path.turning_points.len());
    println!("max speed defect = {:.3e}", path.max_speed_defect(&m));
    ctx.artifacts.csv("geodesic.csv", |out| path.write_csv(out))?;
    Ok(true)
}

#[derive(Serialize)]
struct DistanceSummary {
    a: PolarPoint<f64>,
    b: PolarPoint<f64>,
    length: f64,
    kind: mangoldt::geodesic::DistanceKind,
    phi: f64,
    upper_bound: f64,
    alternatives: usize,
}

fn distance(ctx: &mut Context, a: PolarPoint<f64>, b: PolarPoint<f64>) -> CliResult<bool> {
    let m = ctx.model(None)?;
    let d = distance_with(&m, &a, &b, &ctx.opts)?;
    println!("distance = {:.12}", d.length);
    println!("kind: {:?}, initial heading = {:.12}", d.kind, d.phi);
    if !d.alternatives.is_empty() {
        println!("tied minimizers: {}", d.alternatives.len() + 1);
    }
    ctx.artifacts.json(
        "distance.json",
        &DistanceSummary {
            a,
            b,
            length: d.length,
            kind: d.kind,
            phi: d.phi,
            upper_bound: d.upper_bound,
            alternatives: d.alternatives.len(),
        },
    )?;
    ctx.artifacts.csv("distance_path.csv", |out| d.path.write_csv(out))?;
    Ok(true)
}

fn conjugate(ctx: &mut Context, t: f64) -> CliResult<bool> {
    let m = ctx.model(None)?;
    let horizon = ctx.horizon_or(m.t_max())?;
    let r = first_conjugate_through_pole(&m, t, horizon)?;
    match r.arclength {
        Some(s) => println!("first conjugate point at arclength {s:.12} (radius {:.12} beyond the pole)", s - t),
        None if r.diverging => println!("no conjugate point up to arclength {horizon}; the Jacobi field diverges"),
        None => println!("no conjugate point up to arclength {horizon}"),
    }
    ctx.artifacts.json("conjugate.json", &r)?;
    Ok(true)
}

fn cutlocus(ctx: &mut Context, z: PolarPoint<f64>, probes: &[f64]) -> CliResult<bool> {
    let m = ctx.model(None)?;
    let horizon = ctx.horizon_or(m.t_max())?;
    let locus = cut_locus(&m, &z, horizon)?;
    match locus.status {
        CutStatus::EmptyUpToHorizon => println!("cut locus empty up to arclength {horizon}"),
        CutStatus::Subray => println!(
            "cut locus: meridian theta = {:.12} from t = {:.12} outward",
            locus.meridian(),
            locus.endpoint_t.unwrap_or(f64::NAN)
        ),
    }
    let mut checks = Vec::with_capacity(probes.len());
    for &w in probes {
        let v = verify_cut_point(&m, &locus, w, ctx.opts.tol)?;
        let verdict = if v.passed { "ok" } else { "FAILED" };
        if v.distance.is_nan() {
            println!("  t = {w}: {:?} side, minimizers not resolved, {verdict}", v.side);
        } else {
            println!("  t = {w}: {:?} side, distance {:.12}, {verdict}", v.side, v.distance);
        }
        checks.push(v);
    }
    let passed = checks.iter().all(|v| v.passed);
    ctx.artifacts.json("cutlocus.json", &serde_json::json!({ "locus": locus, "checks": checks }))?;
    Ok(passed)
}

fn triangle(ctx: &mut Context, sides: &[f64]) -> CliResult<bool> {
    let &[a, b, c] = sides else {
        return Err(CliError::Usage(format!("--sides takes three lengths, got {}", sides.len())));
    };
    let m = ctx.model(None)?;
    let tri = build_comparison_triangle_with(&m, a, b, c, &ctx.opts)?;
    println!("pole angle = {:.12}", tri.pole_angle);
    let [ap, ax, ay] = tri.vertex_angles;
    println!("angles: pole {ap:.12}, x {ax:.12}, y {ay:.12}");
    ctx.artifacts.json("triangle.json", &tri)?;
    Ok(true)
}

fn gtct(ctx: &mut Context, args: &GtctArgs) -> CliResult<bool> {
    let model = ctx.model(None)?;
    let surface = load_model(args.surface.as_deref(), args.surface_file.as_deref(), Some("plane"))?;
    let report = gtct_check_with(&surface, &model, args.trials, ctx.seed, &ctx.opts)?;
    let failures = report
        .results
        .iter()
        .filter(|r| r.slacks.iter().any(|&s| !(s >= GTCT_SLACK)))
        .count();
    println!(
        "{} against {}: {} trials, {} skipped, {} failed, min slack {:.3e}",
        report.surface, report.model, report.trials, report.skipped, failures, report.min_slack
    );
    ctx.artifacts.csv("gtct.csv", |out| report.write_csv(out))?;
    ctx.artifacts.json("gtct.json", &report)?;
    Ok(failures == 0)
}

fn rays(ctx: &mut Context, radii: &[f64]) -> CliResult<bool> {
    let m = ctx.model(None)?;
    let horizon = ctx.horizon_or(DEFAULT_HORIZON)?;
    let scan = find_r_delta_with(&m, radii, horizon, &ctx.opts)?;
    for r in &scan.masses {
        println!("t_q = {:<8} mu = {:.6e}", r.q.t, r.mu);
    }
    match scan.found {
        Some(f) => println!("R = {}, delta = {:.12}", f.radius, f.delta),
        None => println!("no radius with a positive margin"),
    }
    ctx.artifacts.csv("rays.csv", |out| scan.write_csv(out))?;
    ctx.artifacts.json("rays.json", &scan)?;
    Ok(scan.found.is_some())
}

fn busemann(ctx: &mut Context, ray_theta: f64, radii: &[f64], angles: usize) -> CliResult<bool> {
    if angles == 0 {
        return Err(CliError::Usage("--angles must be positive".into()));
    }
    let m = ctx.model(None)?;
    let horizon = ctx.horizon_or(DEFAULT_HORIZON)?;
    let ray = MeridianRay::from_pole(ray_theta);
    let points: Vec<PolarPoint<f64>> = radii
        .iter()
        .flat_map(|&t| (0..angles).map(move |j| PolarPoint::new(t, 2.0 * PI * j as f64 / angles as f64)))
        .collect();
    let field = busemann_field_with(&m, &ray, &points, horizon, &ctx.opts)?;
    let worst = field.samples.iter().map(|s| s.value.estimate).fold(0.0, f64::max);
    println!(
        "{} points at horizon {horizon}: largest convergence estimate {worst:.3e}",
        field.samples.len()
    );
    ctx.artifacts.csv("busemann.csv", |out| field.write_csv(out))?;
    ctx.artifacts.json("busemann.json", &field)?;
    Ok(true)
}
