use std::path::{Path, PathBuf};

use clap::Args;
use eband_core::coopsim::{simulate, Scenario};
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::output::{read_input, Sink};
use crate::Format;

#[derive(Debug, Args)]
pub struct CoopSimArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    drops: u64,
    /// Override a scenario field, e.g. `--set seed=9` or `--set weather.rain_mm_per_h=25`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Replaces the value at a dotted path (`a.b.0.c`); the path must already exist.
fn apply_override(doc: &mut Value, assignment: &str) -> CliResult<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("override '{assignment}' is not KEY=VALUE")))?;
    let mut slot = &mut *doc;
    for part in key.split('.') {
        slot = match slot {
            Value::Object(map) => map.get_mut(part),
            Value::Array(items) => part.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| CliError::Usage(format!("unknown scenario key '{key}'")))?;
    }
    *slot = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok(())
}

pub fn load_scenario(path: &Path, overrides: &[String]) -> CliResult<Scenario> {
    let text = read_input(path)?;
    let scenario = Scenario::from_json(&text).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
    if overrides.is_empty() {
        return Ok(scenario);
    }
    // round-trip through the full document so defaulted fields can be overridden too
    let mut doc = serde_json::to_value(&scenario).map_err(|e| CliError::Schema(e.to_string()))?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    Scenario::from_json(&doc.to_string()).map_err(|e| CliError::Schema(format!("after overrides: {e}")))
}

pub fn run(a: &CoopSimArgs, format: Option<Format>) -> CliResult<()> {
    let scenario = load_scenario(&a.scenario, &a.overrides)?;
    eprintln!("seed = {}", scenario.seed);
    let result = simulate(&scenario, a.drops as usize)?;
    match format {
        Some(Format::Csv) => {
            Sink::resolve(a.out.as_deref(), "coverage.csv").write_with(|w| result.write_outcomes_csv(w))
        }
        _ => {
            let doc = serde_json::to_value(&result).map_err(|e| CliError::Schema(e.to_string()))?;
            Sink::resolve(a.out.as_deref(), "coverage.json").write_json(&doc)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn override_paths() {
        let mut doc = json!({ "seed": 1, "weather": { "rain_mm_per_h": 0.0 }, "users": [{ "x": 1.0 }] });
        apply_override(&mut doc, "seed=9").unwrap();
        apply_override(&mut doc, "weather.rain_mm_per_h=25").unwrap();
        apply_override(&mut doc, "users.0.x=4.5").unwrap();
        assert_eq!(doc, json!({ "seed": 9, "weather": { "rain_mm_per_h": 25 }, "users": [{ "x": 4.5 }] }));
        assert!(apply_override(&mut doc, "bogus=1").is_err());
        assert!(apply_override(&mut doc, "users.3.x=1").is_err());
        assert!(apply_override(&mut doc, "seed").is_err());
    }
}
