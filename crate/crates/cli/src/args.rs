use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mangoldt::geodesic::PolarPoint;

#[derive(Debug, Parser)]
#[command(name = "mangoldt", version, about = "Geodesics, cut loci, comparison triangles and Busemann functions on von Mangoldt surfaces")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Built-in model: plane, paraboloid, hyperbolic or sinclair.
    #[arg(long, global = true, conflicts_with = "model_file")]
    pub model: Option<String>,
    /// Model definition in JSON.
    #[arg(long, global = true)]
    pub model_file: Option<PathBuf>,
    /// Directory for CSV and JSON artifacts; nothing is written without it.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Relative tolerance of geodesic integration.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Truncation horizon for rays, Busemann functions and conjugate
    /// searches.
    #[arg(long, global = true)]
    pub horizon: Option<f64>,
    /// Worker threads for scans (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect model surfaces.
    #[command(subcommand)]
    Model(ModelCommand),
    /// Integrate a geodesic from a point and initial heading.
    Geodesic {
        /// Start point `t,theta`.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        from: PolarPoint<f64>,
        /// Heading from the outward meridian, toward increasing θ.
        #[arg(long, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long)]
        length: f64,
    },
    /// Distance and a minimal geodesic between two points.
    Distance {
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        a: PolarPoint<f64>,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        b: PolarPoint<f64>,
    },
    /// First conjugate point along the geodesic through the pole.
    Conjugate {
        /// Radius of the source point.
        #[arg(long)]
        t: f64,
    },
    /// Cut locus of a point, optionally checked at radii on the opposite
    /// meridian.
    Cutlocus {
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        z: PolarPoint<f64>,
        /// Radii on the opposite meridian to verify.
        #[arg(long, value_delimiter = ',')]
        probe: Vec<f64>,
    },
    /// Comparison triangle with one vertex at the pole.
    Triangle {
        /// Side lengths `a,b,c`: pole to x, pole to y, x to y.
        #[arg(long, value_delimiter = ',', num_args = 1, required = true)]
        sides: Vec<f64>,
    },
    /// Random triangle comparison of a surface against the model.
    Gtct(GtctArgs),
    /// Ray masses along a meridian and the radius and margin they support.
    Rays {
        #[arg(long, value_delimiter = ',', default_values_t = [2.0, 4.0, 8.0, 16.0])]
        radii: Vec<f64>,
    },
    /// Truncated Busemann function of a meridian ray on a polar grid.
    Busemann {
        /// Meridian of the ray from the pole.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        ray_theta: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0])]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 8)]
        angles: usize,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, required_unless_present = "list")]
        suite: Option<String>,
        /// Print the suites and the statements they check.
        #[arg(long)]
        list: bool,
        /// Comparison surface of the gtct suite.
        #[arg(long)]
        surface: Option<String>,
        /// Trials of randomized suites.
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ModelCommand {
    /// List the built-in models.
    List,
    /// Curvature and total curvature of the selected model.
    Show,
}

#[derive(Debug, Args)]
pub struct GtctArgs {
    /// Surface whose angles are compared (the model is `--model`).
    #[arg(long)]
    pub surface: Option<String>,
    #[arg(long)]
    pub surface_file: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
}

pub fn parse_point(s: &str) -> Result<PolarPoint<f64>, String> {
    let (t, theta) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `t,theta`, got `{s}`"))?;
    let t: f64 = t.trim().parse().map_err(|e| format!("radius `{t}`: {e}"))?;
    let theta: f64 = theta.trim().parse().map_err(|e| format!("angle `{theta}`: {e}"))?;
    if !(t >= 0.0 && t.is_finite() && theta.is_finite()) {
        return Err(format!("point `{s}` needs a finite radius t ≥ 0 and a finite angle"));
    }
    Ok(PolarPoint::new(t, theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn points() {
        let p = parse_point("3, 0.5").unwrap();
        assert_eq!((p.t, p.theta), (3.0, 0.5));
        assert!(parse_point("3").is_err());
        assert!(parse_point("-1,0").is_err());
        assert!(parse_point("1,nan").is_err());
    }
}
