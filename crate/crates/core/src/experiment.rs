//! Convergence study: transfer smooth fields from a square donor mesh to a
//! curved disc target mesh under repeated refinement.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::Result;
use crate::generate::{disc_mesh, square_mesh};
use crate::mesh::CurvedMesh;
use crate::point::Point;
use crate::transfer::TransferPlan;

/// Errors below this are round-off and are left out of slope fits.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;
/// Levels used by the least-squares slope fit.
pub const FIT_LEVELS: usize = 3;
pub const DEFAULT_DONOR_DIVISIONS: usize = 4;
pub const DEFAULT_TARGET_DIVISIONS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Zeta {
    /// `5y³ + x² + 2y + 3`
    Zeta1,
    /// `exp(x²) + 2y`
    Zeta2,
    /// `sin x + cos y`
    Zeta3,
}

impl Zeta {
    pub const ALL: [Zeta; 3] = [Zeta::Zeta1, Zeta::Zeta2, Zeta::Zeta3];

    pub fn eval(self, p: Point) -> f64 {
        let (x, y) = (p.x, p.y);
        match self {
            Zeta::Zeta1 => 5.0 * y * y * y + x * x + 2.0 * y + 3.0,
            Zeta::Zeta2 => (x * x).exp() + 2.0 * y,
            Zeta::Zeta3 => x.sin() + y.cos(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Zeta::Zeta1 => "zeta1",
            Zeta::Zeta2 => "zeta2",
            Zeta::Zeta3 => "zeta3",
        }
    }
}

impl FromStr for Zeta {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Zeta::ALL.into_iter().find(|z| z.name() == s).ok_or_else(|| format!("unknown field `{s}` (expected zeta1, zeta2 or zeta3)"))
    }
}

impl std::fmt::Display for Zeta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub degree: usize,
    pub levels: usize,
    pub fields: Vec<Zeta>,
    pub donor_divisions: usize,
    pub target_divisions: usize,
    pub jitter_seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn new(degree: usize, levels: usize, fields: Vec<Zeta>) -> Self {
        Self {
            degree,
            levels,
            fields,
            donor_divisions: DEFAULT_DONOR_DIVISIONS,
            target_divisions: DEFAULT_TARGET_DIVISIONS,
            jitter_seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldLevel {
    pub field: Zeta,
    /// `‖g - ζ‖ / ‖ζ‖` on the target mesh.
    pub error: f64,
    pub mismatch: f64,
    pub donor_integral: f64,
    pub target_integral: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelResult {
    pub level: usize,
    pub h: f64,
    pub donor_elements: usize,
    pub target_elements: usize,
    pub probes: usize,
    pub pairs: usize,
    pub fields: Vec<FieldLevel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRun {
    pub degree: usize,
    pub levels: Vec<LevelResult>,
}

/// Geometry failures carry the level at which they occurred.
#[derive(Debug)]
pub struct LevelError {
    pub level: usize,
    pub error: crate::Error,
}

impl std::fmt::Display for LevelError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "level {}: {}", self.level, self.error)
    }
}

impl std::error::Error for LevelError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// The coarse donor and target meshes of the study.
pub fn base_meshes(cfg: &ExperimentConfig) -> Result<(CurvedMesh, CurvedMesh)> {
    Ok((
        square_mesh(cfg.degree, cfg.donor_divisions, cfg.jitter_seed)?,
        disc_mesh(cfg.degree, cfg.target_divisions, cfg.jitter_seed)?,
    ))
}

pub fn run_convergence(cfg: &ExperimentConfig) -> std::result::Result<ConvergenceRun, LevelError> {
    let at = |level: usize| move |error| LevelError { level, error };
    let (mut donor, mut target) = base_meshes(cfg).map_err(at(0))?;
    let mut levels = Vec::with_capacity(cfg.levels);
    for level in 0..cfg.levels {
        if level > 0 {
            donor = donor.refine().map_err(at(level))?;
            target = target.refine().map_err(at(level))?;
        }
        levels.push(run_level(&donor, &target, level, &cfg.fields).map_err(at(level))?);
    }
    Ok(ConvergenceRun { degree: cfg.degree, levels })
}

/// One level of the study; the pairing and mass matrices are shared by all fields.
pub fn run_level(donor: &CurvedMesh, target: &CurvedMesh, level: usize, fields: &[Zeta]) -> Result<LevelResult> {
    let plan = TransferPlan::new(donor, target)?;
    let mut out = Vec::with_capacity(fields.len());
    for &z in fields {
        let f = donor.nodal_interpolant(|p| z.eval(p));
        let g = plan.apply(&f)?;
        let reference = move |p: Point| z.eval(p);
        let error = target.l2_norm(&g, Some(&reference)) / target.l2_norm_of(reference);
        let report = plan.conservation(&f, &g);
        out.push(FieldLevel {
            field: z,
            error,
            mismatch: report.relative_mismatch(),
            donor_integral: report.donor_on_target,
            target_integral: report.target_total,
        });
    }
    Ok(LevelResult {
        level,
        h: target.mesh_size(),
        donor_elements: donor.len(),
        target_elements: target.len(),
        probes: plan.pairing().probes,
        pairs: plan.pairing().pair_count(),
        fields: out,
    })
}

/// Least-squares slope of `log E` against `log h` over the last
/// [`FIT_LEVELS`] points, ignoring errors below the round-off floor.
/// `None` when fewer than two usable points remain.
pub fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    let start = points.len().saturating_sub(FIT_LEVELS);
    let pts: Vec<(f64, f64)> = points[start..]
        .iter()
        .filter(|(h, e)| *e >= ROUNDOFF_FLOOR && *h > 0.0 && e.is_finite())
        .map(|(h, e)| (h.ln(), e.ln()))
        .collect();
    least_squares_slope(&pts)
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 { None } else { Some(sxy / sxx) }
}

impl ConvergenceRun {
    /// `(h, E)` per level for one field.
    pub fn series(&self, z: Zeta) -> Vec<(f64, f64)> {
        self.levels
            .iter()
            .filter_map(|l| l.fields.iter().find(|f| f.field == z).map(|f| (l.h, f.error)))
            .collect()
    }

    pub fn slope(&self, z: Zeta) -> Option<f64> {
        fit_slope(&self.series(z))
    }

    /// Columns `level,h,elements,error,fitted_slope,mismatch`; the slope
    /// column is the fit over the levels up to and including that row.
    pub fn csv(&self, z: Zeta) -> String {
        let mut out = String::from("level,h,elements,error,fitted_slope,mismatch\n");
        let series = self.series(z);
        for (i, l) in self.levels.iter().enumerate() {
            let Some(f) = l.fields.iter().find(|f| f.field == z) else { continue };
            let slope = fit_slope(&series[..=i]).map_or_else(String::new, |s| format!("{s:.6}"));
            let _ = writeln!(out, "{},{:.16e},{},{:.16e},{},{:.6e}", l.level, l.h, l.target_elements, f.error, slope, f.mismatch);
        }
        out
    }
}
