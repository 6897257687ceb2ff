use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use eband_core::propagation::{
    link_budget, AntennaGains, LinkBudgetReport, LinkSpec, ShadowKey, WeatherState, DEFAULT_NLOS_REFERENCE_M,
};
use eband_core::quantities::{Dbm, Distance, Frequency};
use serde_json::json;

use crate::error::CliResult;
use crate::output::Sink;
use crate::Format;

#[derive(Debug, Args)]
pub struct LinkBudgetArgs {
    #[arg(long, default_value_t = 73.5)]
    freq_ghz: f64,
    #[arg(long)]
    dist_m: f64,
    #[arg(long, default_value_t = 30.0, allow_hyphen_values = true)]
    txpower_dbm: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    gain_tx_dbi: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    gain_rx_dbi: f64,
    #[arg(long, default_value_t = 0.0)]
    rain_mmh: f64,
    #[arg(long, default_value_t = 0.0)]
    fog_gm3: f64,
    #[arg(long, default_value_t = 0.0)]
    foliage_m: f64,
    /// Use the NLoS close-in model instead of free space.
    #[arg(long)]
    nlos: bool,
    /// NLoS reference distance.
    #[arg(long, default_value_t = DEFAULT_NLOS_REFERENCE_M)]
    nlos_ref_m: f64,
    /// Add log-normal shadowing to an NLoS link, keyed by this seed.
    #[arg(long, requires = "nlos")]
    shadow_seed: Option<u64>,
    /// Noise power; the default is thermal noise over 2 GHz with a 10 dB noise figure.
    #[arg(long, default_value_t = -71.0, allow_hyphen_values = true)]
    noise_dbm: f64,
    /// Allow transmit powers above the 3 W ceiling.
    #[arg(long)]
    force: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(a: &LinkBudgetArgs, format: Option<Format>) -> CliResult<()> {
    let spec = LinkSpec {
        tx_power: Dbm(a.txpower_dbm),
        gains: AntennaGains::from_dbi(a.gain_tx_dbi, a.gain_rx_dbi)?,
        frequency: Frequency::from_ghz(a.freq_ghz)?,
        distance: Distance::from_m(a.dist_m)?,
        weather: WeatherState { rain_mm_per_h: a.rain_mmh, fog_g_per_m3: a.fog_gm3, foliage_depth_m: a.foliage_m },
        los: !a.nlos,
        noise_power: Dbm(a.noise_dbm),
        nlos_reference: Distance::from_m(a.nlos_ref_m)?,
        shadowing: a.shadow_seed.map(|seed| ShadowKey::new(seed, 0, 1)),
        allow_power_override: a.force,
    };
    let r = link_budget(&spec)?;
    let sink = Sink::resolve(a.out.as_deref(), "linkbudget.json");
    match format {
        Some(Format::Json) => sink.write_json(&to_json(a, &r)),
        Some(Format::Csv) => sink.write_with(|w| {
            writeln!(w, "freq_ghz,dist_m,los,tx_power_dbm,free_space_gain_db,atmospheric_loss_db,rain_loss_db,fog_loss_db,foliage_loss_db,total_path_gain_db,received_power_dbm,noise_dbm,snr_db")?;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                a.freq_ghz,
                a.dist_m,
                r.los,
                r.tx_power_dbm,
                r.free_space_gain,
                r.atmospheric_loss,
                r.rain_loss,
                r.fog_loss,
                r.foliage_loss,
                r.total_path_gain,
                r.received_power,
                a.noise_dbm,
                r.snr
            )
        }),
        None => sink.write_with(|w| write_table(w, a, &r)),
    }
}

fn to_json(a: &LinkBudgetArgs, r: &LinkBudgetReport) -> serde_json::Value {
    json!({
        "schema_version": eband_core::SCHEMA_VERSION,
        "freq_ghz": a.freq_ghz,
        "dist_m": a.dist_m,
        "noise_dbm": a.noise_dbm,
        "report": r,
    })
}

fn write_table(w: &mut dyn Write, a: &LinkBudgetArgs, r: &LinkBudgetReport) -> std::io::Result<()> {
    let kind = if r.los { "LoS" } else { "NLoS" };
    writeln!(w, "link budget: {} GHz over {} m ({kind})", a.freq_ghz, a.dist_m)?;
    let rows = [
        ("tx power", r.tx_power_dbm, "dBm"),
        ("geometric gain", r.free_space_gain, "dB"),
        ("atmospheric loss", r.atmospheric_loss, "dB"),
        ("rain loss", r.rain_loss, "dB"),
        ("fog loss", r.fog_loss, "dB"),
        ("foliage loss", r.foliage_loss, "dB"),
        ("total path gain", r.total_path_gain, "dB"),
        ("received power", r.received_power, "dBm"),
        ("noise power", a.noise_dbm, "dBm"),
        ("snr", r.snr, "dB"),
    ];
    for (label, v, unit) in rows {
        writeln!(w, "  {label:<18}{v:>10.2} {unit}")?;
    }
    Ok(())
}
