use std::path::PathBuf;

use clap::Args;
use eband_core::losmimo::{
    eigen_curve_sweep, log_grid, rayleigh_distance, write_sweep_csv, LosMimoLink, PhaseModel, SweepRow, DEFAULT_GAMMA,
};
use eband_core::quantities::Frequency;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::output::Sink;
use crate::Format;

#[derive(Debug, Args)]
pub struct EigenCurvesArgs {
    #[arg(long, default_value_t = 20)]
    nt: usize,
    #[arg(long, default_value_t = 20)]
    nr: usize,
    #[arg(long, default_value_t = 0.05)]
    dt_m: f64,
    #[arg(long, default_value_t = 0.05)]
    dr_m: f64,
    #[arg(long, default_value_t = 75.0)]
    freq_ghz: f64,
    /// Defaults to 0.2·D_Ray.
    #[arg(long)]
    dmin_m: Option<f64>,
    /// Defaults to 20·D_Ray.
    #[arg(long)]
    dmax_m: Option<f64>,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    gamma: f64,
    /// exact | paraxial
    #[arg(long, default_value = "paraxial")]
    phase_model: PhaseModel,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(a: &EigenCurvesArgs, format: Option<Format>) -> CliResult<()> {
    let lambda = Frequency::from_ghz(a.freq_ghz)?.wavelength();
    let d_ray = rayleigh_distance(a.nt, a.nr, a.dt_m, a.dr_m, lambda)?.m();
    let dmin = a.dmin_m.unwrap_or(0.2 * d_ray);
    let dmax = a.dmax_m.unwrap_or(20.0 * d_ray);
    if dmin > dmax {
        return Err(CliError::Usage(format!("--dmin-m {dmin} exceeds --dmax-m {dmax}")));
    }
    let grid = log_grid(dmin, dmax, a.points, Some(d_ray))?;
    let template = LosMimoLink::aligned(a.nt, a.nr, a.dt_m, a.dr_m, lambda, grid[0], a.phase_model)?;
    let rows = eigen_curve_sweep(&template, &grid, a.gamma)?;

    let sink = Sink::resolve(a.out.as_deref(), "eigencurves.csv");
    match format {
        Some(Format::Json) => sink.write_json(&json!({
            "schema_version": eband_core::SCHEMA_VERSION,
            "nt": a.nt,
            "nr": a.nr,
            "dt_m": a.dt_m,
            "dr_m": a.dr_m,
            "freq_ghz": a.freq_ghz,
            "phase_model": a.phase_model,
            "gamma": a.gamma,
            "d_ray_m": d_ray,
            "rows": rows,
        }))?,
        _ => sink.write_with(|w| write_sweep_csv(&rows, w))?,
    }
    eprint!("{}", summary(&rows, d_ray, a.gamma));
    Ok(())
}

/// D_Ray and, for every EDOF value seen, the farthest grid distance that reaches it.
fn summary(rows: &[SweepRow], d_ray: f64, gamma: f64) -> String {
    let mut s = format!("D_Ray = {d_ray:.4} m\n");
    if let Some(r) = rows.iter().find(|r| r.distance_m == d_ray) {
        s += &format!("EDOF({gamma}) at D_Ray = {}\n", r.edof);
    }
    let mut levels: Vec<usize> = rows.iter().map(|r| r.edof).collect();
    levels.sort_unstable();
    levels.dedup();
    for m in levels.into_iter().rev() {
        let far = rows.iter().filter(|r| r.edof >= m).map(|r| r.distance_m).fold(f64::NAN, f64::max);
        s += &format!("EDOF >= {m:>2} up to {far:.4} m\n");
    }
    s
}
