use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use eband_core::airframe::{
    build_frame_layout, emb_default_numerology, kmh_to_ms, validate_numerology, Numerology, ValidationInputs,
    ValidationReport,
};
use eband_core::quantities::Frequency;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::output::{read_input, Sink};
use crate::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Emb,
}

#[derive(Debug, Args)]
pub struct NumerologyArgs {
    #[arg(long, conflicts_with = "custom")]
    preset: Option<Preset>,
    /// Numerology JSON document (same field names as the JSON report).
    #[arg(long)]
    custom: Option<PathBuf>,
    #[arg(long, default_value_t = 120.0)]
    max_speed_kmh: f64,
    #[arg(long, default_value_t = 86.0)]
    fmax_ghz: f64,
    #[arg(long, default_value_t = 10.0)]
    clock_ppm: f64,
    #[arg(long, default_value_t = 100.0)]
    delay_spread_ns: f64,
    /// Write the symbol-level frame layout as CSV.
    #[arg(long)]
    export_layout: Option<PathBuf>,
    #[arg(long, default_value_t = 1, requires = "export_layout")]
    frames: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(a: &NumerologyArgs, format: Option<Format>) -> CliResult<()> {
    let n: Numerology = match &a.custom {
        Some(path) => serde_json::from_str(&read_input(path)?)
            .map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?,
        None => emb_default_numerology(),
    };
    n.check()?;
    for (flag, v) in
        [("--max-speed-kmh", a.max_speed_kmh), ("--clock-ppm", a.clock_ppm), ("--delay-spread-ns", a.delay_spread_ns)]
    {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(CliError::Usage(format!("{flag} must be a non-negative number, got {v}")));
        }
    }
    let inputs = ValidationInputs {
        max_speed_m_per_s: kmh_to_ms(a.max_speed_kmh),
        f_max: Frequency::from_ghz(a.fmax_ghz)?,
        clock_ppm: a.clock_ppm,
        max_delay_spread_s: a.delay_spread_ns * 1e-9,
        ..ValidationInputs::default()
    };
    let report = validate_numerology(&n, &inputs);

    if let Some(path) = &a.export_layout {
        let layout = build_frame_layout(&n, a.frames)?;
        Sink::resolve(Some(path), "layout.csv").write_with(|w| layout.write_csv(w))?;
    }

    let sink = Sink::resolve(a.out.as_deref(), "numerology.json");
    match format {
        Some(Format::Json) => sink.write_json(&json!({
            "schema_version": eband_core::SCHEMA_VERSION,
            "numerology": n,
            "samples_per_slot": n.samples_per_slot(),
            "samples_per_subframe": n.samples_per_subframe(),
            "cp_overhead": n.cp_samples_per_slot() as f64 / n.samples_per_slot() as f64,
            "inputs": inputs,
            "checks": report.checks,
            "all_passed": report.all_passed(),
        })),
        Some(Format::Csv) => sink.write_with(|w| {
            writeln!(w, "constraint,passed,value,limit")?;
            for c in &report.checks {
                writeln!(
                    w,
                    "{},{},{},{}",
                    serde_json::to_value(c.constraint).map_err(std::io::Error::other)?.as_str().unwrap_or(""),
                    c.passed,
                    c.value,
                    c.limit
                )?;
            }
            Ok(())
        }),
        None => sink.write_with(|w| write_table(w, &n, &report)),
    }
}

fn write_table(w: &mut dyn Write, n: &Numerology, report: &ValidationReport) -> std::io::Result<()> {
    writeln!(
        w,
        "numerology: {} MHz sampling, {} kHz spacing, K = {}, {} symbols/slot, CP {}/{}",
        n.sampling_rate_hz as f64 / 1e6,
        n.subcarrier_spacing_hz as f64 / 1e3,
        n.fft_size,
        n.symbols_per_slot,
        n.cp_first,
        n.cp_rest
    )?;
    writeln!(
        w,
        "samples/slot {}, samples/subframe {}, CP overhead {:.3} %",
        n.samples_per_slot(),
        n.samples_per_subframe(),
        100.0 * n.cp_samples_per_slot() as f64 / n.samples_per_slot() as f64
    )?;
    for c in &report.checks {
        let verdict = if c.passed { "PASS" } else { "FAIL" };
        writeln!(w, "{verdict}  {:<40} {}", c.constraint.label(), c.detail)?;
    }
    Ok(())
}
