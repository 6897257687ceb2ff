//! OFDM numerology, sample-accurate frame layout and regional E-band
//! channel plans.
//!
//! All sample and frequency bookkeeping is integer: rates in Hz, plan edges
//! in MHz. The EMB preset samples at 245.76 MHz with 480 kHz subcarriers
//! (512-point FFT), 14 symbols per 31.25 µs slot, 32 slots per 1 ms
//! subframe and 10 subframes per frame.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantities::{Frequency, NOMINAL_SPEED_OF_LIGHT};

/// Base clock of the LTE family, Hz.
pub const BASE_CLOCK_HZ: u64 = 30_720_000;
pub const SUBFRAME_MS: u64 = 1;
pub const SUBFRAMES_PER_FRAME: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerology {
    pub sampling_rate_hz: u64,
    pub subcarrier_spacing_hz: u64,
    pub fft_size: u32,
    pub symbols_per_slot: u32,
    pub cp_first: u32,
    pub cp_rest: u32,
    pub slots_per_subframe: u32,
    pub subframes_per_frame: u32,
}

pub fn emb_default_numerology() -> Numerology {
    Numerology {
        sampling_rate_hz: 245_760_000,
        subcarrier_spacing_hz: 480_000,
        fft_size: 512,
        symbols_per_slot: 14,
        cp_first: 44,
        cp_rest: 36,
        slots_per_subframe: 32,
        subframes_per_frame: SUBFRAMES_PER_FRAME,
    }
}

impl Numerology {
    pub fn cp_samples_per_slot(&self) -> u64 {
        self.cp_first as u64 + (self.symbols_per_slot as u64 - 1) * self.cp_rest as u64
    }

    pub fn samples_per_slot(&self) -> u64 {
        self.symbols_per_slot as u64 * self.fft_size as u64 + self.cp_samples_per_slot()
    }

    pub fn samples_per_subframe(&self) -> u64 {
        self.slots_per_subframe as u64 * self.samples_per_slot()
    }

    pub fn samples_per_frame(&self) -> u64 {
        self.subframes_per_frame as u64 * self.samples_per_subframe()
    }

    pub fn slot_duration_s(&self) -> f64 {
        self.samples_per_slot() as f64 / self.sampling_rate_hz as f64
    }

    pub fn cp_duration_s(&self, first: bool) -> f64 {
        let cp = if first { self.cp_first } else { self.cp_rest };
        cp as f64 / self.sampling_rate_hz as f64
    }

    /// Checks every structural identity; the error names the first that fails.
    pub fn check(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InconsistentNumerology(msg));
        if self.sampling_rate_hz == 0 || self.subcarrier_spacing_hz == 0 || self.fft_size == 0 {
            return fail("sampling rate, subcarrier spacing and FFT size must be positive".into());
        }
        if self.symbols_per_slot == 0 || self.slots_per_subframe == 0 {
            return fail("symbols per slot and slots per subframe must be positive".into());
        }
        if self.fft_size as u64 * self.subcarrier_spacing_hz != self.sampling_rate_hz {
            return fail(format!(
                "fft_size × subcarrier_spacing = sampling_rate: {} × {} Hz ≠ {} Hz",
                self.fft_size, self.subcarrier_spacing_hz, self.sampling_rate_hz
            ));
        }
        if !self.sampling_rate_hz.is_multiple_of(1000) {
            return fail(format!(
                "sampling rate {} Hz is not a whole number of samples per 1 ms",
                self.sampling_rate_hz
            ));
        }
        let per_subframe = self.sampling_rate_hz / 1000 * SUBFRAME_MS;
        if self.samples_per_subframe() != per_subframe {
            return fail(format!(
                "slots_per_subframe × slot_samples = sampling_rate × 1 ms: {} × {} = {} ≠ {}",
                self.slots_per_subframe,
                self.samples_per_slot(),
                self.samples_per_subframe(),
                per_subframe
            ));
        }
        if self.subframes_per_frame != SUBFRAMES_PER_FRAME {
            return fail(format!("subframes_per_frame = 10 (10 ms frame): got {}", self.subframes_per_frame));
        }
        Ok(())
    }
}

/// One OFDM symbol in the expanded layout. `start_sample` counts from the
/// start of its frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolRecord {
    pub frame: u32,
    pub subframe: u32,
    pub slot: u32,
    pub symbol: u32,
    pub start_sample: u64,
    pub cp_samples: u32,
    pub useful_samples: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameLayout {
    pub numerology: Numerology,
    pub frames: u32,
    pub symbols: Vec<SymbolRecord>,
    pub samples_per_slot: u64,
    pub samples_per_subframe: u64,
    pub samples_per_frame: u64,
    pub cp_samples_per_slot: u64,
    /// CP samples over total samples.
    pub cp_overhead: f64,
}

pub fn build_frame_layout(n: &Numerology, frames: u32) -> Result<FrameLayout> {
    n.check()?;
    if frames == 0 {
        return Err(Error::domain("layout needs at least one frame"));
    }
    let per_frame = (n.subframes_per_frame * n.slots_per_subframe * n.symbols_per_slot) as usize;
    let mut symbols = Vec::with_capacity(per_frame * frames as usize);
    for frame in 0..frames {
        let mut cursor = 0u64;
        for subframe in 0..n.subframes_per_frame {
            for slot in 0..n.slots_per_subframe {
                for symbol in 0..n.symbols_per_slot {
                    let cp = if symbol == 0 { n.cp_first } else { n.cp_rest };
                    symbols.push(SymbolRecord {
                        frame,
                        subframe,
                        slot,
                        symbol,
                        start_sample: cursor,
                        cp_samples: cp,
                        useful_samples: n.fft_size,
                    });
                    cursor += cp as u64 + n.fft_size as u64;
                }
            }
        }
        debug_assert_eq!(cursor, n.samples_per_frame());
    }
    Ok(FrameLayout {
        numerology: *n,
        frames,
        symbols,
        samples_per_slot: n.samples_per_slot(),
        samples_per_subframe: n.samples_per_subframe(),
        samples_per_frame: n.samples_per_frame(),
        cp_samples_per_slot: n.cp_samples_per_slot(),
        cp_overhead: n.cp_samples_per_slot() as f64 / n.samples_per_slot() as f64,
    })
}

impl FrameLayout {
    /// `frame,subframe,slot,symbol,start_sample,cp_samples,useful_samples`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "frame,subframe,slot,symbol,start_sample,cp_samples,useful_samples")?;
        for s in &self.symbols {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                s.frame, s.subframe, s.slot, s.symbol, s.start_sample, s.cp_samples, s.useful_samples
            )?;
        }
        Ok(())
    }

    /// Layout totals without the per-symbol records.
    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema_version": crate::SCHEMA_VERSION,
            "numerology": self.numerology,
            "frames": self.frames,
            "symbols_per_frame": self.symbols.len() as u32 / self.frames,
            "samples_per_slot": self.samples_per_slot,
            "samples_per_subframe": self.samples_per_subframe,
            "samples_per_frame": self.samples_per_frame,
            "cp_samples_per_slot": self.cp_samples_per_slot,
            "cp_overhead": self.cp_overhead,
            "slot_duration_us": self.numerology.slot_duration_s() * 1e6,
            "frame_duration_ms": self.samples_per_frame as f64 / self.numerology.sampling_rate_hz as f64 * 1e3,
        })
    }
}

/// Doppler shift `v·f/c` in Hz, using the rounded 3×10⁸ m/s budget constant.
pub fn doppler_shift(speed_m_per_s: f64, f: Frequency) -> Result<f64> {
    if !(speed_m_per_s >= 0.0 && speed_m_per_s.is_finite()) {
        return Err(Error::domain(format!("speed must be non-negative, got {speed_m_per_s}")));
    }
    Ok(speed_m_per_s * f.hz() / NOMINAL_SPEED_OF_LIGHT)
}

pub fn coherence_time(doppler_hz: f64) -> Result<f64> {
    if !(doppler_hz > 0.0 && doppler_hz.is_finite()) {
        return Err(Error::domain(format!("Doppler shift must be positive, got {doppler_hz} Hz")));
    }
    Ok(1.0 / doppler_hz)
}

pub fn kmh_to_ms(kmh: f64) -> f64 {
    kmh / 3.6
}

/// Operating assumptions the numerology is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationInputs {
    pub max_speed_m_per_s: f64,
    pub f_max: Frequency,
    pub clock_ppm: f64,
    pub max_delay_spread_s: f64,
    /// Doppler must stay below `subcarrier_spacing / doppler_margin`.
    pub doppler_margin: f64,
}

impl Default for ValidationInputs {
    fn default() -> Self {
        Self {
            max_speed_m_per_s: kmh_to_ms(120.0),
            f_max: Frequency::from_ghz(86.0).expect("positive constant"),
            clock_ppm: 10.0,
            max_delay_spread_s: 100e-9,
            doppler_margin: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    FftPowerOfTwo,
    ClockGrid,
    Doppler,
    ClockDrift,
    CyclicPrefix,
}

impl Constraint {
    pub fn label(&self) -> &'static str {
        match self {
            Constraint::FftPowerOfTwo => "(a) FFT size is a power of two",
            Constraint::ClockGrid => "(b) spacing on the 30.72 MHz x 2^k grid",
            Constraint::Doppler => "(c) Doppler << subcarrier spacing",
            Constraint::ClockDrift => "(d) clock drift < 2 x subcarrier spacing",
            Constraint::CyclicPrefix => "(e) CP covers max delay spread",
        }
    }
}

/// Outcome of one constraint with the compared quantities in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub constraint: Constraint,
    pub passed: bool,
    pub value: f64,
    pub limit: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<ConstraintCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, c: Constraint) -> &ConstraintCheck {
        self.checks.iter().find(|x| x.constraint == c).expect("every constraint is reported")
    }
}

/// Exponent k with `x = 2^k`, if any. Works on the reduced ratio `num/den`.
fn power_of_two_ratio(num: u64, den: u64) -> Option<i32> {
    if num == 0 || den == 0 {
        return None;
    }
    let g = gcd(num, den);
    let (a, b) = (num / g, den / g);
    match (a.is_power_of_two(), b.is_power_of_two()) {
        (true, true) => Some(a.trailing_zeros() as i32 - b.trailing_zeros() as i32),
        _ => None,
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Five design constraints. Failures are report entries, never errors.
pub fn validate_numerology(n: &Numerology, inputs: &ValidationInputs) -> ValidationReport {
    let spacing = n.subcarrier_spacing_hz as f64;
    let mut checks = Vec::with_capacity(5);

    checks.push(ConstraintCheck {
        constraint: Constraint::FftPowerOfTwo,
        passed: n.fft_size.is_power_of_two(),
        value: n.fft_size as f64,
        limit: n.fft_size.next_power_of_two() as f64,
        detail: format!("K = {}", n.fft_size),
    });

    // Sampling rate must be 30.72 MHz·2^k and the spacing a power-of-two
    // fraction of it. (480 kHz = 30.72 MHz / 64.)
    let rate_exp = power_of_two_ratio(n.sampling_rate_hz, BASE_CLOCK_HZ);
    let spacing_exp = power_of_two_ratio(n.sampling_rate_hz, n.subcarrier_spacing_hz);
    let spacing_vs_base = power_of_two_ratio(n.subcarrier_spacing_hz, BASE_CLOCK_HZ);
    checks.push(ConstraintCheck {
        constraint: Constraint::ClockGrid,
        passed: rate_exp.is_some() && spacing_exp.is_some(),
        value: spacing,
        limit: BASE_CLOCK_HZ as f64,
        detail: match (rate_exp, spacing_exp, spacing_vs_base) {
            (Some(r), Some(s), Some(b)) => {
                format!("sampling rate = 30.72 MHz x 2^{r}, spacing = rate / 2^{s} = 30.72 MHz x 2^{b}")
            }
            _ => format!(
                "sampling rate {} Hz / spacing {} Hz is not a power-of-two division of 30.72 MHz",
                n.sampling_rate_hz, n.subcarrier_spacing_hz
            ),
        },
    });

    let fd = doppler_shift(inputs.max_speed_m_per_s, inputs.f_max).unwrap_or(f64::INFINITY);
    let doppler_limit = spacing / inputs.doppler_margin;
    checks.push(ConstraintCheck {
        constraint: Constraint::Doppler,
        passed: fd < doppler_limit,
        value: fd,
        limit: doppler_limit,
        detail: format!("f_d = {:.3} kHz vs {:.1} kHz", fd / 1e3, doppler_limit / 1e3),
    });

    let drift = inputs.clock_ppm * inputs.f_max.hz() / 1e6;
    checks.push(ConstraintCheck {
        constraint: Constraint::ClockDrift,
        passed: drift < 2.0 * spacing,
        value: drift,
        limit: 2.0 * spacing,
        detail: format!("drift = {:.0} kHz vs {:.0} kHz", drift / 1e3, 2.0 * spacing / 1e3),
    });

    let cp = n.cp_duration_s(false);
    checks.push(ConstraintCheck {
        constraint: Constraint::CyclicPrefix,
        passed: cp > inputs.max_delay_spread_s,
        value: cp,
        limit: inputs.max_delay_spread_s,
        detail: format!("CP = {:.1} ns vs delay spread {:.1} ns", cp * 1e9, inputs.max_delay_spread_s * 1e9),
    });

    ValidationReport { checks }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Region {
    UsCanada,
    UkAustralia,
    Europe,
}

impl std::str::FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "us" | "us_canada" => Ok(Region::UsCanada),
            "uk" | "uk_australia" => Ok(Region::UkAustralia),
            "eu" | "europe" => Ok(Region::Europe),
            other => Err(Error::domain(format!("unknown region '{other}' (expected us|uk|eu)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Duplex {
    #[serde(rename = "TDD")]
    Tdd,
    #[serde(rename = "FDD")]
    Fdd,
}

/// Closed-open frequency span `[start, stop)` in MHz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start_mhz: u32,
    pub stop_mhz: u32,
}

impl Span {
    pub const fn new(start_mhz: u32, stop_mhz: u32) -> Self {
        Self { start_mhz, stop_mhz }
    }

    pub fn width_mhz(&self) -> u32 {
        self.stop_mhz - self.start_mhz
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start_mhz <= other.start_mhz && other.stop_mhz <= self.stop_mhz
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start_mhz < other.stop_mhz && other.start_mhz < self.stop_mhz
    }

    pub fn start_ghz(&self) -> f64 {
        self.start_mhz as f64 / 1e3
    }

    pub fn stop_ghz(&self) -> f64 {
        self.stop_mhz as f64 / 1e3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Channel {
    /// 1-based, ascending in frequency across both bands.
    pub index: u32,
    /// Index into [`ChannelPlan::bands`].
    pub band: usize,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelPlan {
    pub region: Region,
    pub bands: Vec<Span>,
    pub channels: Vec<Channel>,
    pub guard_bands: Vec<Span>,
    /// Largest number of channels one aggregate may span; `None` = unlimited.
    pub max_aggregate: Option<u32>,
    pub duplex: Vec<Duplex>,
}

const LOWER_BAND: Span = Span::new(71_000, 76_000);
const UPPER_BAND: Span = Span::new(81_000, 86_000);
const GUARD_MHZ: u32 = 125;
const US_SEGMENT_MHZ: u32 = 1_250;
const EU_CHANNEL_MHZ: u32 = 250;

pub fn channel_plan(region: Region) -> ChannelPlan {
    let bands = vec![LOWER_BAND, UPPER_BAND];
    let guard_bands: Vec<Span> = match region {
        Region::UsCanada => vec![],
        Region::UkAustralia | Region::Europe => bands
            .iter()
            .flat_map(|b| {
                [Span::new(b.start_mhz, b.start_mhz + GUARD_MHZ), Span::new(b.stop_mhz - GUARD_MHZ, b.stop_mhz)]
            })
            .collect(),
    };
    let (width, max_aggregate) = match region {
        Region::UsCanada => (Some(US_SEGMENT_MHZ), None),
        Region::UkAustralia => (None, None),
        Region::Europe => (Some(EU_CHANNEL_MHZ), Some(19)),
    };
    let mut channels = Vec::new();
    if let Some(width) = width {
        let inset = if guard_bands.is_empty() { 0 } else { GUARD_MHZ };
        for (band_idx, band) in bands.iter().enumerate() {
            let mut start = band.start_mhz + inset;
            while start + width <= band.stop_mhz - inset {
                channels.push(Channel {
                    index: channels.len() as u32 + 1,
                    band: band_idx,
                    span: Span::new(start, start + width),
                });
                start += width;
            }
        }
    }
    ChannelPlan { region, bands, channels, guard_bands, max_aggregate, duplex: vec![Duplex::Tdd, Duplex::Fdd] }
}

impl ChannelPlan {
    /// Plan as a JSON document with GHz edges.
    pub fn to_json(&self) -> serde_json::Value {
        let span = |s: &Span| serde_json::json!({ "start_ghz": s.start_ghz(), "stop_ghz": s.stop_ghz() });
        serde_json::json!({
            "schema_version": crate::SCHEMA_VERSION,
            "region": self.region,
            "bands": self.bands.iter().map(span).collect::<Vec<_>>(),
            "guard_bands": self.guard_bands.iter().map(span).collect::<Vec<_>>(),
            "channels": self.channels.iter().map(|c| serde_json::json!({
                "index": c.index,
                "band": c.band,
                "start_ghz": c.span.start_ghz(),
                "stop_ghz": c.span.stop_ghz(),
                "width_mhz": c.span.width_mhz(),
            })).collect::<Vec<_>>(),
            "max_aggregate": self.max_aggregate,
            "duplex": self.duplex,
        })
    }

    pub fn total_channel_mhz(&self) -> u64 {
        self.channels.iter().map(|c| c.span.width_mhz() as u64).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aggregate {
    pub span: Span,
    pub channel_count: u32,
}

impl Aggregate {
    pub fn width_mhz(&self) -> u32 {
        self.span.width_mhz()
    }
}

/// Merges the given channel indices into one contiguous span.
pub fn aggregate_channels(plan: &ChannelPlan, indices: &[u32]) -> Result<Aggregate> {
    if indices.is_empty() {
        return Err(Error::Aggregation("no channels given".into()));
    }
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Aggregation("duplicate channel index".into()));
    }
    if let Some(max) = plan.max_aggregate {
        if sorted.len() as u32 > max {
            return Err(Error::Policy(format!(
                "{:?} allows at most {max} aggregated channels, requested {}",
                plan.region,
                sorted.len()
            )));
        }
    }
    let channels = sorted
        .iter()
        .map(|&i| {
            plan.channels
                .iter()
                .find(|c| c.index == i)
                .ok_or_else(|| Error::Aggregation(format!("channel {i} does not exist in the {:?} plan", plan.region)))
        })
        .collect::<Result<Vec<_>>>()?;
    if channels.iter().any(|c| c.band != channels[0].band) {
        return Err(Error::Aggregation("channels span more than one band".into()));
    }
    if let Some(w) = channels.windows(2).find(|w| w[0].span.stop_mhz != w[1].span.start_mhz) {
        return Err(Error::Aggregation(format!("channels {} and {} are not contiguous", w[0].index, w[1].index)));
    }
    Ok(Aggregate {
        span: Span::new(channels[0].span.start_mhz, channels[channels.len() - 1].span.stop_mhz),
        channel_count: channels.len() as u32,
    })
}
