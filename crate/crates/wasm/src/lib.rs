//! wasm-bindgen entry points for the static demo page in `www/`.
//!
//! Each export takes plain numbers and returns a JSON string. The work is
//! done by the `*_json` functions, which are ordinary Rust and are what the
//! native tests exercise.

use eband_core::coopsim::{simulate, BaseStation, Placement, Rect, Scenario, User};
use eband_core::losmimo::{eigen_curve_sweep, log_grid, rayleigh_distance, LosMimoLink, PhaseModel};
use eband_core::propagation::{link_budget, AntennaGains, LinkSpec, WeatherState};
use eband_core::quantities::{Dbm, Distance, Frequency};
use eband_core::rng::keyed_rng;
use rand::Rng;
use serde_json::json;
use wasm_bindgen::prelude::*;

type Out = Result<String, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Eigenvalue ratios of an aligned square ULA pair from 0.2 to 40 D_Ray.
pub fn eigen_curves_json(n: usize, spacing_m: f64, freq_ghz: f64, exact: bool, points: usize, gamma: f64) -> Out {
    if !(2..=64).contains(&n) {
        return Err(format!("array size {n} outside 2..64"));
    }
    if !(2..=400).contains(&points) {
        return Err(format!("point count {points} outside 2..400"));
    }
    let lambda = Frequency::from_ghz(freq_ghz).map_err(err)?.wavelength();
    let d_ray = rayleigh_distance(n, n, spacing_m, spacing_m, lambda).map_err(err)?.m();
    let grid = log_grid(0.2 * d_ray, 40.0 * d_ray, points, Some(d_ray)).map_err(err)?;
    let model = if exact { PhaseModel::Exact } else { PhaseModel::Paraxial };
    let link = LosMimoLink::aligned(n, n, spacing_m, spacing_m, lambda, grid[0], model).map_err(err)?;
    let rows = eigen_curve_sweep(&link, &grid, gamma).map_err(err)?;
    let doc = json!({
        "d_ray_m": d_ray,
        "distance_m": rows.iter().map(|r| r.distance_m).collect::<Vec<_>>(),
        "ratios": rows.iter().map(|r| &r.ratios).collect::<Vec<_>>(),
        "edof": rows.iter().map(|r| r.edof).collect::<Vec<_>>(),
    });
    Ok(doc.to_string())
}

/// Received power and SNR over log-spaced distances for one weather state.
#[allow(clippy::too_many_arguments)]
pub fn link_budget_sweep_json(
    freq_ghz: f64,
    tx_power_dbm: f64,
    gain_dbi: f64,
    rain_mm_per_h: f64,
    fog_g_per_m3: f64,
    foliage_m: f64,
    nlos: bool,
    noise_dbm: f64,
    dmax_m: f64,
) -> Out {
    let grid = log_grid(10.0, dmax_m.max(10.0), 120, None).map_err(err)?;
    let f = Frequency::from_ghz(freq_ghz).map_err(err)?;
    let gains = AntennaGains::from_dbi(gain_dbi, gain_dbi).map_err(err)?;
    let mut snr = Vec::with_capacity(grid.len());
    let mut rain = Vec::with_capacity(grid.len());
    for &d in &grid {
        let mut spec = LinkSpec::new(Dbm(tx_power_dbm), f, Distance::from_m(d).map_err(err)?, Dbm(noise_dbm));
        spec.gains = gains;
        spec.weather = WeatherState { rain_mm_per_h, fog_g_per_m3, foliage_depth_m: foliage_m };
        spec.los = !nlos;
        let r = link_budget(&spec).map_err(err)?;
        snr.push(r.snr);
        rain.push(r.rain_loss);
    }
    Ok(json!({ "distance_m": grid, "snr_db": snr, "rain_loss_db": rain }).to_string())
}

/// A random square deployment, simulated for `drops` drops; returns the
/// first drop's geometry and outcomes plus the averaged fractions.
pub fn coverage_demo_json(
    bs: usize,
    users: usize,
    buildings: usize,
    side_m: f64,
    threshold_db: f64,
    seed: u64,
    drops: usize,
) -> Out {
    if bs == 0 || bs > 100 || users > 1000 || buildings > 200 || !(50.0..=5000.0).contains(&side_m) {
        return Err("parameters out of demo range".into());
    }
    if !(1..=50).contains(&drops) {
        return Err(format!("drop count {drops} outside 1..50"));
    }
    let mut rng = keyed_rng(&[0xde30, seed]);
    let mut coord = || rng.random::<f64>() * side_m;
    let base_stations =
        (0..bs).map(|_| BaseStation { x: coord(), y: coord(), gain_dbi: 30.0, tx_power_dbm: 30.0 }).collect();
    let obstacles = (0..buildings)
        .map(|_| {
            let (x, y) = (coord(), coord());
            let (w, h) = (0.02 * side_m + 0.06 * coord(), 0.02 * side_m + 0.06 * coord());
            Rect::new(x, y, (x + w).min(side_m), (y + h).min(side_m))
        })
        .filter(|r| r.x_max > r.x_min && r.y_max > r.y_min)
        .collect();
    let scenario = Scenario {
        area: Rect::new(0.0, 0.0, side_m, side_m),
        base_stations,
        users: vec![User { x: 0.0, y: 0.0, gain_dbi: 10.0, vacant: true, has_traffic: true }; users],
        obstacles,
        carrier_ghz: 73.5,
        ds_threshold_db: threshold_db,
        noise_dbm: -71.0,
        weather: WeatherState::clear(),
        seed,
        user_tx_power_dbm: 23.0,
        relay_capacity: 1,
        nlos_reference_m: 5.0,
        shadowing: true,
        placement: Placement::Uniform,
    };
    let result = simulate(&scenario, drops).map_err(err)?;
    let first = eband_core::coopsim::draw_drop(&scenario, 0);
    Ok(json!({
        "side_m": side_m,
        "base_stations": scenario.base_stations,
        "obstacles": scenario.obstacles,
        "users": first.users.iter().map(|u| [u.x, u.y]).collect::<Vec<_>>(),
        "outcomes": result.rounds[0].outcomes,
        "fractions": result.fractions,
        "std_error": result.std_error,
    })
    .to_string())
}

fn js(r: Out) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn eigen_curves(
    n: usize,
    spacing_m: f64,
    freq_ghz: f64,
    exact: bool,
    points: usize,
    gamma: f64,
) -> Result<String, JsValue> {
    js(eigen_curves_json(n, spacing_m, freq_ghz, exact, points, gamma))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn link_budget_sweep(
    freq_ghz: f64,
    tx_power_dbm: f64,
    gain_dbi: f64,
    rain_mm_per_h: f64,
    fog_g_per_m3: f64,
    foliage_m: f64,
    nlos: bool,
    noise_dbm: f64,
    dmax_m: f64,
) -> Result<String, JsValue> {
    js(link_budget_sweep_json(
        freq_ghz,
        tx_power_dbm,
        gain_dbi,
        rain_mm_per_h,
        fog_g_per_m3,
        foliage_m,
        nlos,
        noise_dbm,
        dmax_m,
    ))
}

#[wasm_bindgen]
pub fn coverage_demo(
    bs: usize,
    users: usize,
    buildings: usize,
    side_m: f64,
    threshold_db: f64,
    seed: u32,
    drops: usize,
) -> Result<String, JsValue> {
    js(coverage_demo_json(bs, users, buildings, side_m, threshold_db, seed as u64, drops))
}
