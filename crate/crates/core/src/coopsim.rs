//! Round-based Monte-Carlo simulation of DS/IS user cooperation.
//!
//! One round is a static snapshot:
//!
//! 1. every BS broadcasts a level-1 pilot and each user measures its link
//!    SNR to every BS;
//! 2. users whose best BS link reaches the threshold become directly served
//!    (DS) and register with that BS;
//! 3. vacant DS users broadcast level-2 pilots and offer themselves as relays;
//! 4. the remaining indirectly served (IS) users, in ascending id order, pick
//!    the available relay with the best two-hop bottleneck SNR
//!    `min(SNR(IS, relay), SNR(relay, BS))`, if that reaches the threshold;
//! 5. users with traffic are given a traffic channel, directly or through
//!    their relay.
//!
//! Links are evaluated in 2D. A link whose segment crosses the interior of
//! an obstacle uses the NLoS model with shadowing keyed by the unordered
//! node pair and the round seed, so editing the scenario never re-rolls the
//! shadowing of an unrelated link.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::{
    link_budget, AntennaGains, LinkSpec, ShadowKey, WeatherState, DEFAULT_NLOS_REFERENCE_M, E_BAND_HIGH_GHZ,
    E_BAND_LOW_GHZ, TX_POWER_CEILING_DBM,
};
use crate::quantities::{Dbm, Distance, Frequency};
use crate::rng::{keyed_rng, mix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, o: &Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

/// Axis-aligned rectangle in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self { x_min, y_min, x_max, y_max }
    }

    pub fn contains(&self, p: &Point) -> bool {
        (self.x_min..=self.x_max).contains(&p.x) && (self.y_min..=self.y_max).contains(&p.y)
    }

    fn contains_open(&self, p: &Point) -> bool {
        self.x_min < p.x && p.x < self.x_max && self.y_min < p.y && p.y < self.y_max
    }

    fn is_proper(&self) -> bool {
        [self.x_min, self.y_min, self.x_max, self.y_max].iter().all(|v| v.is_finite())
            && self.x_min < self.x_max
            && self.y_min < self.y_max
    }

    /// Parameter interval of segment `p + t·(q − p)`, t ∈ [0, 1], inside the
    /// closed rectangle (Liang–Barsky).
    fn clip(&self, p: &Point, q: &Point) -> Option<(f64, f64)> {
        let dx = q.x - p.x;
        let dy = q.y - p.y;
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        for (den, num) in
            [(-dx, p.x - self.x_min), (dx, self.x_max - p.x), (-dy, p.y - self.y_min), (dy, self.y_max - p.y)]
        {
            if den == 0.0 {
                if num < 0.0 {
                    return None;
                }
            } else {
                let t = num / den;
                if den < 0.0 {
                    t0 = t0.max(t);
                } else {
                    t1 = t1.min(t);
                }
            }
        }
        (t0 <= t1).then_some((t0, t1))
    }

    /// Whether segment pq passes through the open interior. Touching an
    /// edge or a corner does not count.
    pub fn blocks(&self, p: &Point, q: &Point) -> bool {
        match self.clip(p, q) {
            Some((t0, t1)) if t0 < t1 => {
                // the clipped piece is convex; it reaches the interior iff its midpoint does
                let t = 0.5 * (t0 + t1);
                self.contains_open(&Point::new(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)))
            }
            _ => false,
        }
    }
}

pub fn los_blocked(p: &Point, q: &Point, obstacles: &[Rect]) -> bool {
    obstacles.iter().any(|o| o.blocks(p, q))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseStation {
    pub x: f64,
    pub y: f64,
    pub gain_dbi: f64,
    pub tx_power_dbm: f64,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct User {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub gain_dbi: f64,
    /// Vacant DS users volunteer as relays.
    #[serde(default = "yes")]
    pub vacant: bool,
    #[serde(default)]
    pub has_traffic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    /// Redraw every user uniformly in the area for each drop.
    #[default]
    Uniform,
    /// Keep the listed positions; only the shadowing changes between drops.
    Fixed,
}

fn default_user_power() -> f64 {
    23.0
}

fn default_relay_capacity() -> usize {
    1
}

fn default_nlos_reference() -> f64 {
    DEFAULT_NLOS_REFERENCE_M
}

/// Deployment scenario. Field names match the JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub area: Rect,
    pub base_stations: Vec<BaseStation>,
    pub users: Vec<User>,
    #[serde(default)]
    pub obstacles: Vec<Rect>,
    pub carrier_ghz: f64,
    pub ds_threshold_db: f64,
    pub noise_dbm: f64,
    #[serde(default)]
    pub weather: WeatherState,
    pub seed: u64,
    /// Transmit power for user-to-user links.
    #[serde(default = "default_user_power")]
    pub user_tx_power_dbm: f64,
    /// IS users a single relay may carry per round.
    #[serde(default = "default_relay_capacity")]
    pub relay_capacity: usize,
    #[serde(default = "default_nlos_reference")]
    pub nlos_reference_m: f64,
    #[serde(default = "yes")]
    pub shadowing: bool,
    #[serde(default)]
    pub placement: Placement,
}

impl Scenario {
    /// Collects every invariant violation into one configuration error.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !self.area.is_proper() {
            problems.push("area: must have positive width and height".to_string());
        }
        if self.base_stations.is_empty() {
            problems.push("base_stations: at least one BS is required".into());
        }
        for (i, b) in self.base_stations.iter().enumerate() {
            if !self.area.contains(&Point::new(b.x, b.y)) {
                problems.push(format!("base_stations[{i}]: position outside area"));
            }
            if !b.gain_dbi.is_finite() {
                problems.push(format!("base_stations[{i}].gain_dbi: must be finite"));
            }
            if !(b.tx_power_dbm.is_finite() && b.tx_power_dbm <= TX_POWER_CEILING_DBM) {
                problems.push(format!("base_stations[{i}].tx_power_dbm: must not exceed the 3 W ceiling"));
            }
        }
        for (i, u) in self.users.iter().enumerate() {
            if !self.area.contains(&Point::new(u.x, u.y)) {
                problems.push(format!("users[{i}]: position outside area"));
            }
            if !u.gain_dbi.is_finite() {
                problems.push(format!("users[{i}].gain_dbi: must be finite"));
            }
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !o.is_proper() {
                problems.push(format!("obstacles[{i}]: must have positive width and height"));
            }
        }
        if !(E_BAND_LOW_GHZ..=E_BAND_HIGH_GHZ).contains(&self.carrier_ghz) {
            problems.push(format!("carrier_ghz: {} outside 71-86 GHz", self.carrier_ghz));
        }
        if self.ds_threshold_db.is_nan() {
            problems.push("ds_threshold_db: must be a number".into());
        }
        if !self.noise_dbm.is_finite() {
            problems.push("noise_dbm: must be finite".into());
        }
        if self.weather.validate().is_err() {
            problems.push("weather: all fields must be non-negative".into());
        }
        if !(self.user_tx_power_dbm.is_finite() && self.user_tx_power_dbm <= TX_POWER_CEILING_DBM) {
            problems.push("user_tx_power_dbm: must not exceed the 3 W ceiling".into());
        }
        if !(self.nlos_reference_m > 0.0 && self.nlos_reference_m.is_finite()) {
            problems.push("nlos_reference_m: must be positive".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Config(format!("scenario JSON: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    fn position(&self, node: NodeId) -> Point {
        match node {
            NodeId::Bs(i) => Point::new(self.base_stations[i].x, self.base_stations[i].y),
            NodeId::User(j) => Point::new(self.users[j].x, self.users[j].y),
        }
    }

    fn gain_dbi(&self, node: NodeId) -> f64 {
        match node {
            NodeId::Bs(i) => self.base_stations[i].gain_dbi,
            NodeId::User(j) => self.users[j].gain_dbi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeId {
    Bs(usize),
    User(usize),
}

impl NodeId {
    /// Stable key: BS and user ids live in disjoint halves of the key space.
    pub fn key(self) -> u64 {
        match self {
            NodeId::Bs(i) => 2 * i as u64,
            NodeId::User(j) => 2 * j as u64 + 1,
        }
    }
}

/// SNR of the link between two nodes, in dB. Symmetric in its arguments.
///
/// A link touching a BS uses the BS transmit power; user-to-user links use
/// the scenario's user power. NLoS distances shorter than the reference
/// distance are evaluated at the reference distance.
pub fn link_snr(a: NodeId, b: NodeId, s: &Scenario) -> Result<f64> {
    if a == b {
        return Err(Error::domain("link endpoints must be distinct"));
    }
    let pa = s.position(a);
    let pb = s.position(b);
    let d = pa.distance(&pb);
    if d.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::DegenerateGeometry(format!("{a:?} and {b:?} share a position")));
    }
    let tx_power = match (a, b) {
        (NodeId::Bs(i), _) | (_, NodeId::Bs(i)) => s.base_stations[i].tx_power_dbm,
        _ => s.user_tx_power_dbm,
    };
    let los = !los_blocked(&pa, &pb, &s.obstacles);
    let distance = if los { d } else { d.max(s.nlos_reference_m) };
    let spec = LinkSpec {
        tx_power: Dbm(tx_power),
        gains: AntennaGains::from_dbi(s.gain_dbi(a), s.gain_dbi(b))?,
        frequency: Frequency::from_ghz(s.carrier_ghz)?,
        distance: Distance::from_m(distance)?,
        weather: s.weather,
        los,
        noise_power: Dbm(s.noise_dbm),
        nlos_reference: Distance::from_m(s.nlos_reference_m)?,
        shadowing: (!los && s.shadowing).then(|| ShadowKey::new(s.seed, a.key(), b.key())),
        allow_power_override: false,
    };
    Ok(link_budget(&spec)?.snr)
}

/// A user's best BS link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub user: usize,
    pub best_bs: usize,
    pub best_snr_db: f64,
    pub direct: bool,
}

/// Best BS per user (ties to the lowest BS id) and the DS/IS split.
pub fn classify_users(s: &Scenario) -> Result<Vec<Classification>> {
    if s.base_stations.is_empty() {
        return Err(Error::Config("scenario has no base stations".into()));
    }
    (0..s.users.len())
        .map(|u| {
            let mut best_bs = 0;
            let mut best = f64::NEG_INFINITY;
            for b in 0..s.base_stations.len() {
                let snr = link_snr(NodeId::User(u), NodeId::Bs(b), s)?;
                if snr > best {
                    best = snr;
                    best_bs = b;
                }
            }
            Ok(Classification { user: u, best_bs, best_snr_db: best, direct: best >= s.ds_threshold_db })
        })
        .collect()
}

/// A vacant DS user offering to relay, with its direct SNR to its serving BS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelayCandidate {
    pub user: usize,
    pub direct_snr_db: f64,
}

/// Relay with the best two-hop bottleneck SNR, ties to the lowest user id.
/// Returns `Ok(None)` when no candidate reaches the threshold.
pub fn relay_selection(is_user: usize, candidates: &[RelayCandidate], s: &Scenario) -> Result<Option<(usize, f64)>> {
    Ok(best_bottleneck(is_user, candidates, s)?.filter(|&(_, snr)| snr >= s.ds_threshold_db))
}

fn best_bottleneck(is_user: usize, candidates: &[RelayCandidate], s: &Scenario) -> Result<Option<(usize, f64)>> {
    let mut best: Option<(usize, f64)> = None;
    for c in candidates {
        let hop = link_snr(NodeId::User(is_user), NodeId::User(c.user), s)?;
        let bottleneck = hop.min(c.direct_snr_db);
        let better = match best {
            None => true,
            Some((id, snr)) => bottleneck > snr || (bottleneck == snr && c.user < id),
        };
        if better {
            best = Some((c.user, bottleneck));
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ServiceClass {
    #[serde(rename = "DS")]
    Ds,
    #[serde(rename = "IS_served")]
    IsServed,
    #[serde(rename = "IS_unserved")]
    IsUnserved,
}

impl ServiceClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            ServiceClass::Ds => "DS",
            ServiceClass::IsServed => "IS_served",
            ServiceClass::IsUnserved => "IS_unserved",
        }
    }
}

/// `serving_bs` is the registration BS: direct for DS users, the relay's BS
/// for served IS users. `bottleneck_snr_db` is the best two-hop SNR that was
/// available to an IS user, if any relay was.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserOutcome {
    pub user_id: usize,
    pub class: ServiceClass,
    pub serving_bs: Option<usize>,
    pub relay: Option<usize>,
    pub direct_snr_db: f64,
    pub bottleneck_snr_db: Option<f64>,
}

/// Abstract orthogonal pilots: one level-1 id per BS, then one level-2 id per vacant DS user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PilotAssignment {
    pub level1: Vec<(usize, u32)>,
    pub level2: Vec<(usize, u32)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Fractions {
    pub ds: f64,
    pub is_served: f64,
    pub unserved: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub drop: usize,
    pub shadow_seed: u64,
    pub fractions: Fractions,
    pub pilots: PilotAssignment,
    pub direct_registrations: usize,
    pub indirect_registrations: usize,
    pub traffic_channels: usize,
    pub outcomes: Vec<UserOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub schema_version: u32,
    pub seed: u64,
    pub drops: usize,
    /// Mean over drops.
    pub fractions: Fractions,
    /// Standard error of the mean over drops (zero for a single drop).
    pub std_error: Fractions,
    pub rounds: Vec<RoundRecord>,
}

impl CoverageResult {
    /// `user_id,class,serving_bs,relay,direct_snr_db,bottleneck_snr_db`, one
    /// block of users per drop in drop order.
    pub fn write_outcomes_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "user_id,class,serving_bs,relay,direct_snr_db,bottleneck_snr_db")?;
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rounds {
            for o in &r.outcomes {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    o.user_id,
                    o.class.as_str(),
                    opt(o.serving_bs),
                    opt(o.relay),
                    o.direct_snr_db,
                    o.bottleneck_snr_db.map(|v| v.to_string()).unwrap_or_default()
                )?;
            }
        }
        Ok(())
    }
}

fn play_round(s: &Scenario, drop: usize) -> Result<RoundRecord> {
    s.validate()?;
    // (1) level-1 pilots and classification
    let level1: Vec<(usize, u32)> = (0..s.base_stations.len()).map(|b| (b, b as u32)).collect();
    let classes = classify_users(s)?;

    // (2) DS registration
    let mut outcomes: Vec<UserOutcome> = classes
        .iter()
        .map(|c| UserOutcome {
            user_id: c.user,
            class: if c.direct { ServiceClass::Ds } else { ServiceClass::IsUnserved },
            serving_bs: c.direct.then_some(c.best_bs),
            relay: None,
            direct_snr_db: c.best_snr_db,
            bottleneck_snr_db: None,
        })
        .collect();

    // (3) vacant DS users announce themselves on level-2 pilots
    let first_pilot = level1.len() as u32;
    let mut level2 = Vec::new();
    let mut candidates = Vec::new();
    for (pilot, c) in (first_pilot..).zip(classes.iter().filter(|c| c.direct && s.users[c.user].vacant)) {
        level2.push((c.user, pilot));
        candidates.push(RelayCandidate { user: c.user, direct_snr_db: c.best_snr_db });
    }
    let mut capacity = vec![s.relay_capacity; s.users.len()];

    // (4) IS users pick relays, first come by id
    for c in classes.iter().filter(|c| !c.direct) {
        let available: Vec<RelayCandidate> = candidates.iter().copied().filter(|r| capacity[r.user] > 0).collect();
        let best = best_bottleneck(c.user, &available, s)?;
        let out = &mut outcomes[c.user];
        out.bottleneck_snr_db = best.map(|(_, snr)| snr);
        if let Some((relay, snr)) = best.filter(|&(_, snr)| snr >= s.ds_threshold_db) {
            capacity[relay] -= 1;
            out.class = ServiceClass::IsServed;
            out.relay = Some(relay);
            out.serving_bs = Some(classes[relay].best_bs);
            out.bottleneck_snr_db = Some(snr);
        }
    }

    // (5) traffic channels
    let traffic_channels =
        outcomes.iter().filter(|o| o.class != ServiceClass::IsUnserved && s.users[o.user_id].has_traffic).count();

    let count = |k: ServiceClass| outcomes.iter().filter(|o| o.class == k).count();
    let n = outcomes.len();
    let (ds, served, unserved) =
        (count(ServiceClass::Ds), count(ServiceClass::IsServed), count(ServiceClass::IsUnserved));
    let fractions = if n == 0 {
        Fractions::default()
    } else {
        let n = n as f64;
        Fractions { ds: ds as f64 / n, is_served: served as f64 / n, unserved: unserved as f64 / n }
    };
    debug_assert_eq!(ds + served + unserved, n);

    Ok(RoundRecord {
        drop,
        shadow_seed: s.seed,
        fractions,
        pilots: PilotAssignment { level1, level2 },
        direct_registrations: ds,
        indirect_registrations: served,
        traffic_channels,
        outcomes,
    })
}

fn aggregate(seed: u64, rounds: Vec<RoundRecord>) -> CoverageResult {
    let n = rounds.len() as f64;
    let pick = |f: fn(&Fractions) -> f64| -> (f64, f64) {
        let xs: Vec<f64> = rounds.iter().map(|r| f(&r.fractions)).collect();
        let mean = xs.iter().sum::<f64>() / n;
        let se = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() / n.sqrt()
        } else {
            0.0
        };
        (mean, se)
    };
    let (ds, ds_se) = pick(|f| f.ds);
    let (is_served, is_se) = pick(|f| f.is_served);
    let (unserved, un_se) = pick(|f| f.unserved);
    CoverageResult {
        schema_version: crate::SCHEMA_VERSION,
        seed,
        drops: rounds.len(),
        fractions: Fractions { ds, is_served, unserved },
        std_error: Fractions { ds: ds_se, is_served: is_se, unserved: un_se },
        rounds,
    }
}

/// One protocol round on the scenario exactly as given.
pub fn run_round(s: &Scenario) -> Result<CoverageResult> {
    Ok(aggregate(s.seed, vec![play_round(s, 0)?]))
}

/// The scenario realized for drop `d`: its own shadowing seed and, for
/// uniform placement, freshly drawn user positions. Each user's position is
/// keyed by (seed, drop, user id) alone.
pub fn draw_drop(s: &Scenario, d: usize) -> Scenario {
    let mut out = s.clone();
    out.seed = mix(&[s.seed, d as u64]);
    if s.placement == Placement::Uniform {
        let a = s.area;
        for (j, u) in out.users.iter_mut().enumerate() {
            let mut rng = keyed_rng(&[0x91ace, s.seed, d as u64, j as u64]);
            u.x = a.x_min + rng.random::<f64>() * (a.x_max - a.x_min);
            u.y = a.y_min + rng.random::<f64>() * (a.y_max - a.y_min);
        }
    }
    out
}

/// Monte-Carlo over `drops` independent drops, evaluated in parallel and
/// aggregated in drop order.
pub fn simulate(s: &Scenario, drops: usize) -> Result<CoverageResult> {
    if drops == 0 {
        return Err(Error::domain("simulation needs at least one drop"));
    }
    s.validate()?;
    let rounds = (0..drops).into_par_iter().map(|d| play_round(&draw_drop(s, d), d)).collect::<Result<Vec<_>>>()?;
    Ok(aggregate(s.seed, rounds))
}
