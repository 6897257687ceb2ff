//! Link-budget engine for E-band links.
//!
//! Line-of-sight links use the free-space path gain
//! `G = G_T G_R λ² / (4πD)²`. Blocked links use a close-in reference
//! model with path-loss exponent 5.88 and optional log-normal shadowing
//! (σ = 14.19 dB) drawn from a keyed stream. Weather impairments are the
//! E-band figures for clear-air absorption, rain, fog and foliage; the rain
//! model is a power law through the two published anchors (10 dB/km at
//! 25 mm/h, 30 dB/km at 100 mm/h).
//!
//! Ice, snow and dust are treated as lossless at these wavelengths.

use std::f64::consts::PI;

use log::warn;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantities::{db_from_linear, DbValue, Dbm, Distance, Frequency, Wavelength};
use crate::rng::keyed_rng;

pub const NLOS_PATH_LOSS_EXPONENT: f64 = 5.88;
pub const NLOS_SHADOW_SIGMA_DB: f64 = 14.19;
pub const DEFAULT_NLOS_REFERENCE_M: f64 = 5.0;

/// Combined oxygen and water-vapour absorption across the E-band, dB/km.
pub const ATMOSPHERIC_LOSS_DB_PER_KM: f64 = 0.5;
pub const E_BAND_LOW_GHZ: f64 = 71.0;
pub const E_BAND_HIGH_GHZ: f64 = 86.0;

const RAIN_ANCHOR_RATE: f64 = 25.0;
const RAIN_ANCHOR_DB_PER_KM: f64 = 10.0;
/// ln 3 / ln 4: the exponent that maps 25 → 100 mm/h onto 10 → 30 dB/km.
const RAIN_EXPONENT: f64 = 0.792_481_250_360_578_1;

pub const FOG_DB_PER_KM_PER_G_M3: f64 = 4.0;
pub const FOLIAGE_DB_PER_M: f64 = 2.5;

/// 3 W expressed in dBm.
pub const TX_POWER_CEILING_DBM: f64 = 34.771_212_547_196_626;

/// Linear transmit and receive antenna gains.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaGains {
    g_t: f64,
    g_r: f64,
}

impl AntennaGains {
    pub fn new(g_t: f64, g_r: f64) -> Result<Self> {
        if !(g_t > 0.0 && g_r > 0.0 && g_t.is_finite() && g_r.is_finite()) {
            return Err(Error::domain(format!("antenna gains must be positive, got {g_t} and {g_r}")));
        }
        Ok(Self { g_t, g_r })
    }

    pub fn unity() -> Self {
        Self { g_t: 1.0, g_r: 1.0 }
    }

    pub fn from_dbi(g_t_dbi: f64, g_r_dbi: f64) -> Result<Self> {
        Self::new(DbValue(g_t_dbi).linear(), DbValue(g_r_dbi).linear())
    }

    pub fn tx(&self) -> f64 {
        self.g_t
    }

    pub fn rx(&self) -> f64 {
        self.g_r
    }

    pub fn total_db(&self) -> f64 {
        10.0 * (self.g_t * self.g_r).log10()
    }
}

/// Weather along the path. All fields are non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeatherState {
    #[serde(default)]
    pub rain_mm_per_h: f64,
    #[serde(default)]
    pub fog_g_per_m3: f64,
    #[serde(default)]
    pub foliage_depth_m: f64,
}

impl WeatherState {
    pub fn clear() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rain rate", self.rain_mm_per_h),
            ("fog density", self.fog_g_per_m3),
            ("foliage depth", self.foliage_depth_m),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

/// Key of one shadowing draw: the global seed and the two link endpoints.
/// Endpoint order does not matter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ShadowKey {
    pub seed: u64,
    pub a: u64,
    pub b: u64,
}

impl ShadowKey {
    pub fn new(seed: u64, a: u64, b: u64) -> Self {
        Self { seed, a, b }
    }

    /// Zero-mean normal shadowing term in dB with σ = 14.19 dB.
    pub fn sample_db(&self) -> f64 {
        let (lo, hi) = if self.a <= self.b { (self.a, self.b) } else { (self.b, self.a) };
        let z: f64 = StandardNormal.sample(&mut keyed_rng(&[0x5ad0, self.seed, lo, hi]));
        NLOS_SHADOW_SIGMA_DB * z
    }
}

fn positive_distance(d: Distance, what: &str) -> Result<f64> {
    if d.m() > 0.0 {
        Ok(d.m())
    } else {
        Err(Error::domain(format!("{what} must be positive, got {} m", d.m())))
    }
}

/// Free-space path gain (linear) between antennas with the given gains.
pub fn free_space_path_gain(gains: AntennaGains, lambda: Wavelength, d: Distance) -> Result<f64> {
    let d = positive_distance(d, "link distance")?;
    let l = lambda.m();
    Ok(gains.g_t * gains.g_r * l * l / (4.0 * PI * d).powi(2))
}

/// Free-space path loss with unity gains, in dB (positive for d > λ/4π).
pub fn free_space_path_loss(lambda: Wavelength, d: Distance) -> Result<DbValue> {
    let g = free_space_path_gain(AntennaGains::unity(), lambda, d)?;
    Ok(DbValue(-db_from_linear(g)?.db()))
}

/// NLoS path loss in dB: `FSPL(d0) + 10·n·log10(d/d0)` with `n = 5.88`,
/// plus a keyed log-normal shadowing term when `shadowing` is given.
pub fn nlos_path_loss(d: Distance, d0: Distance, lambda: Wavelength, shadowing: Option<ShadowKey>) -> Result<DbValue> {
    let d0m = positive_distance(d0, "reference distance")?;
    if d.m() < d0m {
        return Err(Error::domain(format!("NLoS distance {} m is below the reference distance {d0m} m", d.m())));
    }
    let mut pl = free_space_path_loss(lambda, d0)?.db() + 10.0 * NLOS_PATH_LOSS_EXPONENT * (d.m() / d0m).log10();
    if let Some(key) = shadowing {
        pl += key.sample_db();
    }
    Ok(DbValue(pl))
}

/// Gaseous absorption in dB/km; only valid inside 71–86 GHz.
pub fn atmospheric_attenuation(f: Frequency) -> Result<f64> {
    let ghz = f.ghz();
    if !(E_BAND_LOW_GHZ..=E_BAND_HIGH_GHZ).contains(&ghz) {
        return Err(Error::OutOfBand { freq_ghz: ghz, lo_ghz: E_BAND_LOW_GHZ, hi_ghz: E_BAND_HIGH_GHZ });
    }
    Ok(ATMOSPHERIC_LOSS_DB_PER_KM)
}

/// Rain specific attenuation in dB/km for a rain rate in mm/h.
pub fn rain_attenuation(rate_mm_per_h: f64) -> Result<f64> {
    if !(rate_mm_per_h >= 0.0 && rate_mm_per_h.is_finite()) {
        return Err(Error::domain(format!("rain rate must be non-negative, got {rate_mm_per_h}")));
    }
    if rate_mm_per_h == 0.0 {
        return Ok(0.0);
    }
    Ok(RAIN_ANCHOR_DB_PER_KM * (rate_mm_per_h / RAIN_ANCHOR_RATE).powf(RAIN_EXPONENT))
}

/// Fog specific attenuation in dB/km for a liquid water density in g/m³.
pub fn fog_attenuation(density_g_per_m3: f64) -> Result<f64> {
    if !(density_g_per_m3 >= 0.0 && density_g_per_m3.is_finite()) {
        return Err(Error::domain(format!("fog density must be non-negative, got {density_g_per_m3}")));
    }
    Ok(FOG_DB_PER_KM_PER_G_M3 * density_g_per_m3)
}

/// Total foliage loss in dB for a penetration depth in meters.
// Linear through the single 8 m / 20 dB figure; saturation at large depths is not modelled.
pub fn foliage_loss(depth_m: f64) -> Result<f64> {
    if !(depth_m >= 0.0 && depth_m.is_finite()) {
        return Err(Error::domain(format!("foliage depth must be non-negative, got {depth_m}")));
    }
    Ok(FOLIAGE_DB_PER_M * depth_m)
}

/// Number of half-wavelength-pitch elements that fit in an aperture, before flooring.
pub fn array_element_density(aperture_area_m2: f64, lambda: Wavelength) -> Result<f64> {
    if !(aperture_area_m2 > 0.0 && aperture_area_m2.is_finite()) {
        return Err(Error::domain(format!("aperture area must be positive, got {aperture_area_m2}")));
    }
    let pitch = lambda.m() / 2.0;
    Ok(aperture_area_m2 / (pitch * pitch))
}

pub fn array_element_count(aperture_area_m2: f64, lambda: Wavelength) -> Result<u64> {
    let n = array_element_density(aperture_area_m2, lambda)?;
    // absorb rounding so exact multiples of (λ/2)² do not floor one short
    Ok((n * (1.0 + 1e-12)).floor() as u64)
}

/// Inputs of one link-budget evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSpec {
    pub tx_power: Dbm,
    pub gains: AntennaGains,
    pub frequency: Frequency,
    pub distance: Distance,
    pub weather: WeatherState,
    pub los: bool,
    pub noise_power: Dbm,
    pub nlos_reference: Distance,
    pub shadowing: Option<ShadowKey>,
    /// Permit transmit powers above the 3 W ceiling (logged as a warning).
    pub allow_power_override: bool,
}

impl LinkSpec {
    /// A clear-weather LoS link with unity gains, default NLoS reference,
    /// no shadowing and the power ceiling enforced.
    pub fn new(tx_power: Dbm, frequency: Frequency, distance: Distance, noise_power: Dbm) -> Self {
        Self {
            tx_power,
            gains: AntennaGains::unity(),
            frequency,
            distance,
            weather: WeatherState::clear(),
            los: true,
            noise_power,
            nlos_reference: Distance::from_m(DEFAULT_NLOS_REFERENCE_M).expect("positive constant"),
            shadowing: None,
            allow_power_override: false,
        }
    }
}

/// Itemized link budget. `free_space_gain` is the geometric propagation
/// gain including both antenna gains: free-space for LoS links, the NLoS
/// model for blocked ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudgetReport {
    pub los: bool,
    pub tx_power_dbm: f64,
    pub free_space_gain: f64,
    pub atmospheric_loss: f64,
    pub rain_loss: f64,
    pub fog_loss: f64,
    pub foliage_loss: f64,
    pub total_path_gain: f64,
    pub received_power: f64,
    pub snr: f64,
}

pub fn link_budget(spec: &LinkSpec) -> Result<LinkBudgetReport> {
    let tx = spec.tx_power.dbm();
    if !tx.is_finite() {
        return Err(Error::domain(format!("transmit power must be finite, got {tx}")));
    }
    if tx > TX_POWER_CEILING_DBM {
        if spec.allow_power_override {
            warn!("transmit power {tx} dBm exceeds the 3 W ({TX_POWER_CEILING_DBM:.2} dBm) ceiling");
        } else {
            return Err(Error::Policy(format!(
                "transmit power {tx} dBm exceeds the 3 W ceiling of {TX_POWER_CEILING_DBM:.2} dBm"
            )));
        }
    }
    positive_distance(spec.distance, "link distance")?;
    spec.weather.validate()?;

    let lambda = spec.frequency.wavelength();
    let free_space_gain = if spec.los {
        db_from_linear(free_space_path_gain(spec.gains, lambda, spec.distance)?)?.db()
    } else {
        spec.gains.total_db() - nlos_path_loss(spec.distance, spec.nlos_reference, lambda, spec.shadowing)?.db()
    };

    let km = spec.distance.km();
    let atmospheric_loss = atmospheric_attenuation(spec.frequency)? * km;
    let rain_loss = rain_attenuation(spec.weather.rain_mm_per_h)? * km;
    let fog_loss = fog_attenuation(spec.weather.fog_g_per_m3)? * km;
    let foliage = foliage_loss(spec.weather.foliage_depth_m)?;

    let total_path_gain = free_space_gain - (atmospheric_loss + rain_loss + fog_loss + foliage);
    let received_power = tx + total_path_gain;
    Ok(LinkBudgetReport {
        los: spec.los,
        tx_power_dbm: tx,
        free_space_gain,
        atmospheric_loss,
        rain_loss,
        fog_loss,
        foliage_loss: foliage,
        total_path_gain,
        received_power,
        snr: received_power - spec.noise_power.dbm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lam(ghz: f64) -> Wavelength {
        Frequency::from_ghz(ghz).unwrap().wavelength()
    }

    fn m(x: f64) -> Distance {
        Distance::from_m(x).unwrap()
    }

    #[test]
    fn unity_gain_at_lambda_over_4pi() {
        let l = lam(75.0);
        let g = free_space_path_gain(AntennaGains::unity(), l, m(l.m() / (4.0 * PI))).unwrap();
        assert!((g - 1.0).abs() < 1e-12);
    }

    #[test]
    fn e_band_vs_wifi_gap() {
        let d = m(100.0);
        let g75 = free_space_path_gain(AntennaGains::unity(), lam(75.0), d).unwrap();
        let g24 = free_space_path_gain(AntennaGains::unity(), lam(2.4), d).unwrap();
        let gap = 10.0 * (g75 / g24).log10();
        assert!((gap + 29.9).abs() < 0.1, "{gap}");
    }

    #[test]
    fn inverse_square() {
        let g1 = free_space_path_gain(AntennaGains::unity(), lam(80.0), m(50.0)).unwrap();
        let g2 = free_space_path_gain(AntennaGains::unity(), lam(80.0), m(100.0)).unwrap();
        assert!((10.0 * (g2 / g1).log10() + 6.0206).abs() < 1e-4);
    }

    #[test]
    fn zero_distance_rejected() {
        assert!(free_space_path_gain(AntennaGains::unity(), lam(80.0), m(0.0)).is_err());
    }

    #[test]
    fn nlos_reference_and_decade() {
        let l = lam(73.5);
        let d0 = m(5.0);
        let fspl = free_space_path_loss(l, d0).unwrap().db();
        assert_eq!(nlos_path_loss(d0, d0, l, None).unwrap().db(), fspl);
        let decade = nlos_path_loss(m(50.0), d0, l, None).unwrap().db();
        assert!((decade - fspl - 58.8).abs() < 1e-9);
        assert!(matches!(nlos_path_loss(m(4.0), d0, l, None), Err(Error::Domain(_))));
    }

    #[test]
    fn shadowing_is_symmetric_and_keyed() {
        let a = ShadowKey::new(42, 3, 9).sample_db();
        assert_eq!(a, ShadowKey::new(42, 9, 3).sample_db());
        assert_ne!(a, ShadowKey::new(43, 3, 9).sample_db());
    }

    #[test]
    fn shadowing_sigma() {
        let n = 100_000u64;
        let xs: Vec<f64> = (0..n).map(|i| ShadowKey::new(7, i, n + i).sample_db()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var.sqrt() - NLOS_SHADOW_SIGMA_DB).abs() < 0.3, "sigma {}", var.sqrt());
        assert!(mean.abs() < 0.2);
    }

    #[test]
    fn atmospheric_band_limits() {
        for ghz in [71.0, 73.5, 86.0] {
            assert_eq!(atmospheric_attenuation(Frequency::from_ghz(ghz).unwrap()).unwrap(), 0.5);
        }
        assert!(matches!(atmospheric_attenuation(Frequency::from_ghz(60.0).unwrap()), Err(Error::OutOfBand { .. })));
    }

    #[test]
    fn rain_anchors() {
        assert_eq!(rain_attenuation(25.0).unwrap(), 10.0);
        assert!((rain_attenuation(100.0).unwrap() - 30.0).abs() < 1e-12);
        assert!((rain_attenuation(50.0).unwrap() - (300f64).sqrt()).abs() < 1e-12);
        assert_eq!(rain_attenuation(0.0).unwrap(), 0.0);
        assert!(rain_attenuation(-1.0).is_err());
        assert!((RAIN_EXPONENT - 3f64.ln() / 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn fog_and_foliage_anchors() {
        assert_eq!(fog_attenuation(0.1).unwrap(), 0.4);
        assert_eq!(fog_attenuation(0.0).unwrap(), 0.0);
        assert!((fog_attenuation(0.05).unwrap() - 0.2).abs() < 1e-15);
        assert!(fog_attenuation(-0.1).is_err());
        assert_eq!(foliage_loss(8.0).unwrap(), 20.0);
        assert_eq!(foliage_loss(4.0).unwrap(), 10.0);
        assert_eq!(foliage_loss(0.0).unwrap(), 0.0);
        assert!(foliage_loss(-2.0).is_err());
    }

    #[test]
    fn element_count() {
        let l = lam(75.0);
        let cell = (l.m() / 2.0).powi(2);
        assert_eq!(array_element_count(cell, l).unwrap(), 1);
        assert_eq!(array_element_count(25.0 * cell, l).unwrap(), 25);
        let ratio = array_element_density(1e-2, lam(80.0)).unwrap() / array_element_density(1e-2, lam(40.0)).unwrap();
        assert!((ratio - 4.0).abs() < 1e-12);
        assert!(array_element_count(0.0, l).is_err());
    }

    fn spec(d: f64) -> LinkSpec {
        LinkSpec::new(Dbm(30.0), Frequency::from_ghz(73.5).unwrap(), m(d), Dbm(-80.0))
    }

    #[test]
    fn heavy_rain_over_a_cell() {
        let mut s = spec(200.0);
        s.weather.rain_mm_per_h = 25.0;
        let r = link_budget(&s).unwrap();
        assert!((r.rain_loss - 2.0).abs() < 1e-12);
    }

    #[test]
    fn clear_weather_only_atmospheric() {
        let r = link_budget(&spec(1000.0)).unwrap();
        assert_eq!(r.total_path_gain, r.free_space_gain - r.atmospheric_loss);
        assert_eq!(r.atmospheric_loss, 0.5);
    }

    #[test]
    fn power_ceiling() {
        let mut s = spec(100.0);
        s.tx_power = Dbm(40.0);
        assert!(matches!(link_budget(&s), Err(Error::Policy(_))));
        s.allow_power_override = true;
        assert!(link_budget(&s).is_ok());
        s.tx_power = Dbm(34.77);
        s.allow_power_override = false;
        assert!(link_budget(&s).is_ok());
    }

    #[test]
    fn nlos_branch_uses_gains_and_model() {
        let mut s = spec(100.0);
        s.los = false;
        s.gains = AntennaGains::from_dbi(20.0, 10.0).unwrap();
        let r = link_budget(&s).unwrap();
        let pl = nlos_path_loss(m(100.0), m(5.0), s.frequency.wavelength(), None).unwrap().db();
        assert!((r.free_space_gain - (30.0 - pl)).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn received_power_decreases_with_distance(
            d in 5.0f64..5000.0, step in 0.01f64..100.0, los: bool,
            rain in 0.0f64..150.0, fog in 0.0f64..1.0,
        ) {
            let mut a = spec(d);
            a.los = los;
            a.weather = WeatherState { rain_mm_per_h: rain, fog_g_per_m3: fog, foliage_depth_m: 0.0 };
            let mut b = a;
            b.distance = m(d + step);
            prop_assert!(link_budget(&b).unwrap().received_power < link_budget(&a).unwrap().received_power);
        }

        #[test]
        fn report_identity(
            d in 1.0f64..10_000.0, rain in 0.0f64..150.0, fog in 0.0f64..1.0,
            foliage in 0.0f64..20.0, gt in -5.0f64..40.0, gr in -5.0f64..40.0,
            ghz in 71.0f64..86.0, los: bool,
        ) {
            let mut s = spec(d.max(5.0));
            s.los = los;
            s.frequency = Frequency::from_ghz(ghz).unwrap();
            s.gains = AntennaGains::from_dbi(gt, gr).unwrap();
            s.weather = WeatherState { rain_mm_per_h: rain, fog_g_per_m3: fog, foliage_depth_m: foliage };
            let r = link_budget(&s).unwrap();
            let losses = r.atmospheric_loss + r.rain_loss + r.fog_loss + r.foliage_loss;
            prop_assert!((r.total_path_gain - (r.free_space_gain - losses)).abs() < 1e-9);
            prop_assert!((r.received_power - (30.0 + r.total_path_gain)).abs() < 1e-9);
            prop_assert!((r.snr - (r.received_power + 80.0)).abs() < 1e-9);
        }

        #[test]
        fn frequency_ratio_law(f1 in 1.0f64..100.0, f2 in 1.0f64..100.0, d in 1.0f64..1000.0) {
            let g1 = free_space_path_loss(lam(f1), m(d)).unwrap().db();
            let g2 = free_space_path_loss(lam(f2), m(d)).unwrap().db();
            prop_assert!((g2 - g1 - 20.0 * (f2 / f1).log10()).abs() < 1e-9);
        }
    }
}
