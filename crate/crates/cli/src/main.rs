//! `curvexfer` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input errors, 2 geometric or
//! numerical failures.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use curvexfer::experiment::{fit_slope, run_convergence, ExperimentConfig, Zeta};
use curvexfer::svg::{intersection_overlay, loglog_plot, Series};
use curvexfer::transfer::TransferPlan;
use curvexfer::tri_intersect::intersect_triangles;
use curvexfer::{io, net, BezierTriangle, Error, Point, StandardNodes};

const THREADS_VAR: &str = "CURVEXFER_THREADS";

#[derive(Parser)]
#[command(name = "curvexfer", version, about = "Conservative solution transfer between curved triangular meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Project a donor field onto a target mesh and report conservation.
    Transfer {
        donor_mesh: PathBuf,
        donor_field: PathBuf,
        target_mesh: PathBuf,
        out_field: PathBuf,
    },
    /// Intersect two Bézier triangles and list the boundary segments.
    ///
    /// A triangle is given as `nodes:x,y;x,y;...` (standard nodes),
    /// `net:x,y;...` (control net) or a path to a one-element mesh file.
    Intersect {
        #[arg(long, allow_hyphen_values = true)]
        t0: String,
        #[arg(long, allow_hyphen_values = true)]
        t1: String,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Run the refinement study from a square donor to a disc target.
    Convergence {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        degree: u8,
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(1..))]
        levels: u8,
        #[arg(long)]
        field: Zeta,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jitter_seed: Option<u64>,
    },
}

/// A failure and the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self { code: if e.is_input_error() { 1 } else { 2 }, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = configure_threads().and_then(|()| match cli.command {
        Command::Transfer { donor_mesh, donor_field, target_mesh, out_field } => {
            cmd_transfer(&donor_mesh, &donor_field, &target_mesh, &out_field)
        }
        Command::Intersect { t0, t1, svg } => cmd_intersect(&t0, &t1, svg.as_deref()),
        Command::Convergence { degree, levels, field, out, jitter_seed } => {
            let mut cfg = ExperimentConfig::new(degree.into(), levels.into(), vec![field]);
            cfg.jitter_seed = jitter_seed;
            cmd_convergence(&cfg, &out)
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::usage(format!("{THREADS_VAR} must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

/// Prefixes input errors with the offending file.
fn with_path<T>(path: &Path, r: curvexfer::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| {
        let mut f = Failure::from(e);
        if f.code == 1 {
            f.message = format!("{}: {}", path.display(), f.message);
        }
        f
    })
}

fn cmd_transfer(donor_mesh: &Path, donor_field: &Path, target_mesh: &Path, out_field: &Path) -> Result<(), Failure> {
    let donor = with_path(donor_mesh, io::load_mesh(donor_mesh))?;
    let field = with_path(donor_field, io::load_field(donor_field))?;
    let target = with_path(target_mesh, io::load_mesh(target_mesh))?;
    field.check_matches(&donor)?;
    let plan = TransferPlan::new(&donor, &target)?;
    let out = plan.apply(&field)?;
    io::save_field(&out, out_field)?;
    let report = plan.conservation(&field, &out);
    println!("{:.16e},{:.16e},{:.6e}", report.donor_on_target, report.target_total, report.relative_mismatch());
    Ok(())
}

fn cmd_intersect(t0: &str, t1: &str, svg: Option<&Path>) -> Result<(), Failure> {
    let a = parse_triangle(t0)?;
    let b = parse_triangle(t1)?;
    let polygons = intersect_triangles(&a, &b)?;
    print!("{}", describe_polygons(&polygons));
    if let Some(path) = svg {
        fs::write(path, intersection_overlay(&a, &b, &polygons))?;
    }
    Ok(())
}

/// One line per polygon listing `E<k>[a, b]` segments, where `k` is
/// `3 * owner + edge`, then the total area.
fn describe_polygons(polygons: &[curvexfer::CurvedPolygon]) -> String {
    let mut out = String::new();
    if polygons.is_empty() {
        out.push_str("empty\n");
    }
    for poly in polygons {
        let segs: Vec<String> = poly
            .origins()
            .iter()
            .map(|o| match o {
                Some(o) => format!("E{}[{:.12}, {:.12}]", 3 * o.triangle + o.edge, o.start, o.end),
                None => "E?".to_string(),
            })
            .collect();
        let _ = writeln!(out, "{}", segs.join(" -> "));
    }
    // `+ 0.0` keeps an empty sum from printing as `-0`.
    let area: f64 = polygons.iter().map(|p| p.area()).sum::<f64>() + 0.0;
    let _ = writeln!(out, "area {area:.16e}");
    out
}

fn parse_triangle(spec: &str) -> Result<BezierTriangle, Failure> {
    if let Some(rest) = spec.strip_prefix("nodes:") {
        let pts = parse_points(rest)?;
        let p = degree_for(pts.len())?;
        let nodes = StandardNodes::new(p, pts)?;
        return Ok(nodes.to_triangle()?);
    }
    if let Some(rest) = spec.strip_prefix("net:") {
        let pts = parse_points(rest)?;
        let p = degree_for(pts.len())?;
        return Ok(BezierTriangle::new(p, pts)?);
    }
    let mesh = with_path(Path::new(spec), io::load_mesh(spec))?;
    if mesh.len() != 1 {
        return Err(Failure::usage(format!("{spec}: expected a mesh with one element, found {}", mesh.len())));
    }
    Ok(mesh.element(0).triangle.clone())
}

fn parse_points(s: &str) -> Result<Vec<Point>, Failure> {
    s.split(';')
        .filter(|w| !w.trim().is_empty())
        .map(|w| {
            let mut it = w.split(',').map(|v| v.trim().parse::<f64>());
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(x)), Some(Ok(y)), None) if x.is_finite() && y.is_finite() => Ok(Point::new(x, y)),
                _ => Err(Failure::usage(format!("bad point `{w}` (expected `x,y`)"))),
            }
        })
        .collect()
}

fn degree_for(count: usize) -> Result<usize, Failure> {
    (1..=curvexfer::curve::MAX_DEGREE)
        .find(|&p| net::net_len(p) == count)
        .ok_or_else(|| Failure::usage(format!("{count} points do not form a triangular net")))
}

fn cmd_convergence(cfg: &ExperimentConfig, out: &Path) -> Result<(), Failure> {
    let field = cfg.fields[0];
    let run = run_convergence(cfg).map_err(|e| Failure { code: if e.error.is_input_error() { 1 } else { 2 }, message: e.to_string() })?;
    fs::create_dir_all(out)?;
    let stem = format!("{field}_p{}", cfg.degree);
    let series = run.series(field);
    fs::write(out.join(format!("{stem}.csv")), run.csv(field))?;
    let title = format!("{field}, degree {}", cfg.degree);
    let svg = loglog_plot(&title, &[Series { label: field.name(), points: &series }], Some((cfg.degree + 1) as f64));
    fs::write(out.join(format!("{stem}.svg")), svg)?;
    for (l, &(h, e)) in run.levels.iter().zip(&series) {
        println!("level {} h={h:.6e} elements={} error={e:.6e}", l.level, l.target_elements);
    }
    match fit_slope(&series) {
        Some(s) => println!("fitted slope {s:.4}"),
        None => println!("fitted slope n/a (errors at round-off)"),
    }
    Ok(())
}
