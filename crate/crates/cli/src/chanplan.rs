use std::path::PathBuf;

use clap::Args;
use eband_core::airframe::{aggregate_channels, channel_plan, Region};
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::output::Sink;
use crate::Format;

#[derive(Debug, Args)]
pub struct ChanPlanArgs {
    /// us | uk | eu
    #[arg(long)]
    region: Region,
    /// Channels to bond: an inclusive range `i..j` or a list `i,j,k`.
    #[arg(long)]
    aggregate: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_indices(s: &str) -> CliResult<Vec<u32>> {
    let bad = || CliError::Usage(format!("cannot read channel list '{s}' (expected i..j or i,j,k)"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

pub fn run(a: &ChanPlanArgs, format: Option<Format>) -> CliResult<()> {
    let plan = channel_plan(a.region);
    let aggregate = match &a.aggregate {
        Some(s) => Some(aggregate_channels(&plan, &parse_indices(s)?)?),
        None => None,
    };
    let sink = Sink::resolve(a.out.as_deref(), "chanplan.json");
    match format {
        Some(Format::Csv) => sink.write_with(|w| {
            writeln!(w, "index,band,start_ghz,stop_ghz,width_mhz")?;
            for c in &plan.channels {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    c.index,
                    c.band,
                    c.span.start_ghz(),
                    c.span.stop_ghz(),
                    c.span.width_mhz()
                )?;
            }
            Ok(())
        }),
        _ => {
            let mut doc = plan.to_json();
            doc["channel_count"] = json!(plan.channels.len());
            doc["total_channel_mhz"] = json!(plan.total_channel_mhz());
            if let Some(g) = aggregate {
                doc["aggregate"] = json!({
                    "start_ghz": g.span.start_ghz(),
                    "stop_ghz": g.span.stop_ghz(),
                    "width_mhz": g.width_mhz(),
                    "channel_count": g.channel_count,
                });
            }
            sink.write_json(&doc)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_lists() {
        assert_eq!(parse_indices("3..5").unwrap(), vec![3, 4, 5]);
        assert_eq!(parse_indices("1, 2").unwrap(), vec![1, 2]);
        assert!(parse_indices("5..3").is_err());
        assert!(parse_indices("x").is_err());
    }
}
