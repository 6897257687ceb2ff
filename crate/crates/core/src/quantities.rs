//! Unit-carrying scalar types shared by the rest of the crate.
//!
//! Every constructor that can fail validates its input and returns
//! [`Error::Domain`]; once built, a value is known to satisfy its invariant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light used for every wavelength conversion, in m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Rounded speed of light used by the Doppler budget, in m/s. The numerology
/// design figures (120 km/h at 86 GHz giving 9.556 kHz) are computed with
/// this value.
pub const NOMINAL_SPEED_OF_LIGHT: f64 = 3.0e8;

/// Carrier or offset frequency in hertz, strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Frequency(f64);

impl Frequency {
    pub fn from_hz(hz: f64) -> Result<Self> {
        if hz.is_finite() && hz > 0.0 {
            Ok(Self(hz))
        } else {
            Err(Error::domain(format!("frequency must be positive, got {hz} Hz")))
        }
    }

    pub fn from_ghz(ghz: f64) -> Result<Self> {
        Self::from_hz(ghz * 1e9)
    }

    pub fn hz(self) -> f64 {
        self.0
    }

    pub fn ghz(self) -> f64 {
        self.0 / 1e9
    }

    pub fn wavelength(self) -> Wavelength {
        Wavelength(SPEED_OF_LIGHT / self.0)
    }
}

/// Wavelength in meters, strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Wavelength(f64);

impl Wavelength {
    pub fn from_m(m: f64) -> Result<Self> {
        if m.is_finite() && m > 0.0 {
            Ok(Self(m))
        } else {
            Err(Error::domain(format!("wavelength must be positive, got {m} m")))
        }
    }

    pub fn m(self) -> f64 {
        self.0
    }

    pub fn frequency(self) -> Frequency {
        Frequency(SPEED_OF_LIGHT / self.0)
    }

    /// Scales the wavelength by a positive factor.
    pub fn scaled(self, s: f64) -> Result<Self> {
        Self::from_m(self.0 * s)
    }
}

/// Non-negative distance in meters.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Distance(f64);

impl Distance {
    pub fn from_m(m: f64) -> Result<Self> {
        if m.is_finite() && m >= 0.0 {
            Ok(Self(m))
        } else {
            Err(Error::domain(format!("distance must be non-negative, got {m} m")))
        }
    }

    pub fn from_km(km: f64) -> Result<Self> {
        Self::from_m(km * 1e3)
    }

    pub fn m(self) -> f64 {
        self.0
    }

    pub fn km(self) -> f64 {
        self.0 / 1e3
    }
}

/// A ratio or level expressed in decibels.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct DbValue(pub f64);

impl DbValue {
    pub fn db(self) -> f64 {
        self.0
    }

    pub fn linear(self) -> f64 {
        linear_from_db(self)
    }
}

/// Power level in dBm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct Dbm(pub f64);

impl Dbm {
    pub fn from_watts(w: f64) -> Result<Self> {
        Ok(Dbm(db_from_linear(w * 1e3)?.0))
    }

    pub fn dbm(self) -> f64 {
        self.0
    }

    pub fn milliwatts(self) -> f64 {
        10f64.powf(self.0 / 10.0)
    }
}

pub fn wavelength_of(f: Frequency) -> Wavelength {
    f.wavelength()
}

pub fn db_from_linear(x: f64) -> Result<DbValue> {
    if x > 0.0 && x.is_finite() {
        Ok(DbValue(10.0 * x.log10()))
    } else {
        Err(Error::domain(format!("cannot express {x} in dB: value must be positive")))
    }
}

pub fn linear_from_db(d: DbValue) -> f64 {
    10f64.powf(d.0 / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wavelength_examples() {
        let one = wavelength_of(Frequency::from_hz(2.998e8).unwrap());
        assert_eq!(one.m(), 1.0);
        let l75 = wavelength_of(Frequency::from_ghz(75.0).unwrap()).m();
        assert!((l75 - 3.997e-3).abs() < 5e-7, "{l75}");
        let l86 = wavelength_of(Frequency::from_ghz(86.0).unwrap()).m();
        assert!((l86 - 3.486e-3).abs() < 5e-7, "{l86}");
    }

    #[test]
    fn non_positive_frequency_rejected() {
        assert!(matches!(Frequency::from_hz(0.0), Err(Error::Domain(_))));
        assert!(matches!(Frequency::from_hz(-3.0), Err(Error::Domain(_))));
        assert!(Frequency::from_hz(f64::NAN).is_err());
    }

    #[test]
    fn db_examples() {
        assert_eq!(db_from_linear(1.0).unwrap().db(), 0.0);
        assert!((db_from_linear(1000.0).unwrap().db() - 30.0).abs() < 1e-12);
        let back = linear_from_db(db_from_linear(0.37).unwrap());
        assert!((back - 0.37).abs() <= 1e-12 * 0.37);
        assert!(db_from_linear(0.0).is_err());
        assert!(db_from_linear(-1.0).is_err());
    }

    #[test]
    fn three_watts_in_dbm() {
        let p = Dbm::from_watts(3.0).unwrap();
        assert!((p.dbm() - 34.771).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn db_round_trip(exp in -12.0f64..12.0) {
            let x = 10f64.powf(exp);
            let back = linear_from_db(db_from_linear(x).unwrap());
            prop_assert!(((back - x) / x).abs() <= 1e-12);
        }

        #[test]
        fn wavelength_strictly_decreasing(a in 1e6f64..1e12, b in 1e6f64..1e12) {
            prop_assume!(a < b);
            let la = wavelength_of(Frequency::from_hz(a).unwrap()).m();
            let lb = wavelength_of(Frequency::from_hz(b).unwrap()).m();
            prop_assert!(la > lb);
        }
    }
}
