//! LoS-MIMO analysis for pairs of uniform linear arrays.
//!
//! Channel entries are unit-modulus, `h(r,t) = exp(−j·2π·d(r,t)/λ)`, so the
//! spectrum of the Gram matrix depends only on the geometry measured in
//! wavelengths. The equal-gain point of aligned broadside arrays sits at the
//! Rayleigh distance `max(Nt,Nr)·dt·dr/λ`; beyond it the weaker eigenmodes
//! fade and the effective degree of freedom (EDOF) shrinks.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{hermitian_eigenvalues, ComplexMatrix};
use crate::error::{Error, Result};
use crate::quantities::{Distance, Wavelength};

pub type Point3 = [f64; 3];

/// Default EDOF threshold: an eigenmode counts if it is within 10 dB of the strongest.
pub const DEFAULT_GAMMA: f64 = 0.1;

/// Relative slack when comparing `μ_m/μ_1` against γ, so that eigenvalues
/// that are equal analytically but differ by rounding still count at γ = 1.
pub const EDOF_RATIO_SLACK: f64 = 1e-9;

const BISECTION_REL_TOL: f64 = 1e-4;
const MAX_BRACKET_DOUBLINGS: usize = 64;

pub type ChannelMatrix = ComplexMatrix;

fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: Point3) -> f64 {
    dot(a, a).sqrt()
}

/// A uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UlaGeometry {
    n: usize,
    spacing: f64,
    center: Point3,
    axis: Point3,
}

impl UlaGeometry {
    /// `axis` is normalized; it must be non-zero.
    pub fn new(n: usize, spacing: f64, center: Point3, axis: Point3) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("array needs at least one antenna"));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::domain(format!("antenna spacing must be positive, got {spacing}")));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::domain("array center must be finite"));
        }
        let len = norm(axis);
        if !(len > 0.0 && len.is_finite()) {
            return Err(Error::domain("array axis must be a non-zero vector"));
        }
        Ok(Self { n, spacing, center, axis: [axis[0] / len, axis[1] / len, axis[2] / len] })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn center(&self) -> Point3 {
        self.center
    }

    pub fn axis(&self) -> Point3 {
        self.axis
    }

    /// `(n − 1)·spacing`.
    pub fn aperture(&self) -> f64 {
        (self.n - 1) as f64 * self.spacing
    }

    fn offset(&self, i: usize) -> Point3 {
        let k = (i as f64 - (self.n - 1) as f64 / 2.0) * self.spacing;
        [k * self.axis[0], k * self.axis[1], k * self.axis[2]]
    }

    pub fn with_center(mut self, center: Point3) -> Self {
        self.center = center;
        self
    }

    /// Same array with every length multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.n, self.spacing * s, self.center.map(|c| c * s), self.axis)
    }
}

pub fn antenna_positions(g: &UlaGeometry) -> Vec<Point3> {
    (0..g.n)
        .map(|i| {
            let o = g.offset(i);
            [g.center[0] + o[0], g.center[1] + o[1], g.center[2] + o[2]]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseModel {
    /// Exact Euclidean antenna-to-antenna distances.
    #[default]
    Exact,
    /// Second-order expansion of the distance about the link axis.
    Paraxial,
}

impl std::str::FromStr for PhaseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(PhaseModel::Exact),
            "paraxial" => Ok(PhaseModel::Paraxial),
            other => Err(Error::domain(format!("unknown phase model '{other}' (expected exact|paraxial)"))),
        }
    }
}

/// Transmit and receive ULAs plus the carrier wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosMimoLink {
    pub tx: UlaGeometry,
    pub rx: UlaGeometry,
    pub wavelength: Wavelength,
    pub phase_model: PhaseModel,
}

impl LosMimoLink {
    pub fn new(tx: UlaGeometry, rx: UlaGeometry, wavelength: Wavelength, phase_model: PhaseModel) -> Result<Self> {
        let d = norm(sub(rx.center, tx.center));
        if d.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::DegenerateGeometry("transmit and receive arrays share a center".into()));
        }
        Ok(Self { tx, rx, wavelength, phase_model })
    }

    /// Broadside arrays along x, facing each other across the z axis at distance `d`.
    pub fn aligned(
        nt: usize,
        nr: usize,
        dt: f64,
        dr: f64,
        wavelength: Wavelength,
        d: f64,
        phase_model: PhaseModel,
    ) -> Result<Self> {
        let tx = UlaGeometry::new(nt, dt, [0.0; 3], [1.0, 0.0, 0.0])?;
        let rx = UlaGeometry::new(nr, dr, [0.0, 0.0, d], [1.0, 0.0, 0.0])?;
        Self::new(tx, rx, wavelength, phase_model)
    }

    pub fn center_distance(&self) -> f64 {
        norm(sub(self.rx.center, self.tx.center))
    }

    /// Whether the separation is at least ten times the larger aperture.
    pub fn is_far_field(&self) -> bool {
        self.center_distance() >= 10.0 * self.tx.aperture().max(self.rx.aperture())
    }

    /// Same link with the receiver moved along the current link axis to distance `d`.
    pub fn at_distance(&self, d: f64) -> Result<Self> {
        let c = sub(self.rx.center, self.tx.center);
        let k = d / norm(c);
        let center = [self.tx.center[0] + k * c[0], self.tx.center[1] + k * c[1], self.tx.center[2] + k * c[2]];
        Self::new(self.tx, self.rx.with_center(center), self.wavelength, self.phase_model)
    }

    /// Same link with every length, including λ, multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::new(self.tx.scaled(s)?, self.rx.scaled(s)?, self.wavelength.scaled(s)?, self.phase_model)
    }
}

/// Nr×Nt matrix of unit-modulus LoS coefficients.
pub fn los_channel_matrix(link: &LosMimoLink) -> Result<ChannelMatrix> {
    let c = sub(link.rx.center, link.tx.center);
    let dc = norm(c);
    let u = c.map(|x| x / dc);
    let lambda = link.wavelength.m();
    // common phase of the center-to-center path, reduced to one cycle
    let base = (dc / lambda).rem_euclid(1.0);

    let tx_off: Vec<Point3> = (0..link.tx.n).map(|i| link.tx.offset(i)).collect();
    let rx_off: Vec<Point3> = (0..link.rx.n).map(|i| link.rx.offset(i)).collect();

    let mut h = ComplexMatrix::zeros(link.rx.n, link.tx.n);
    for (r, or) in rx_off.iter().enumerate() {
        for (t, ot) in tx_off.iter().enumerate() {
            let e = sub(*or, *ot);
            let ee = dot(e, e);
            // excess path over the center distance, computed without cancellation
            let excess = match link.phase_model {
                PhaseModel::Exact => {
                    let delta = [c[0] + e[0], c[1] + e[1], c[2] + e[2]];
                    let d = norm(delta);
                    if d <= 1e-12 * dc {
                        return Err(Error::DegenerateGeometry(format!(
                            "receive antenna {r} coincides with transmit antenna {t}"
                        )));
                    }
                    (2.0 * dot(c, e) + ee) / (d + dc)
                }
                PhaseModel::Paraxial => {
                    let eu = dot(e, u);
                    let axial = dc + eu;
                    if axial <= 1e-12 * dc {
                        return Err(Error::DegenerateGeometry(format!(
                            "antenna pair ({r}, {t}) is not in front of the link axis"
                        )));
                    }
                    let lateral = [e[0] - eu * u[0], e[1] - eu * u[1], e[2] - eu * u[2]];
                    eu + dot(lateral, lateral) / (2.0 * axial)
                }
            };
            let cycles = base + excess / lambda;
            h.set(r, t, Complex64::from_polar(1.0, -2.0 * PI * cycles));
        }
    }
    Ok(h)
}

/// Gram-matrix eigenvalues, descending and non-negative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenSpectrum {
    values: Vec<f64>,
}

impl EigenSpectrum {
    /// Sorts descending; rejects empty, negative or non-finite input.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("empty eigenvalue spectrum"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::domain("eigenvalues must be finite and non-negative"));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `μ_m/μ_1` for every mode; all zero if the spectrum is identically zero.
    pub fn ratios(&self) -> Vec<f64> {
        let top = self.values[0];
        self.values.iter().map(|v| if top > 0.0 { v / top } else { 0.0 }).collect()
    }
}

pub fn gram_eigenvalues(h: &ChannelMatrix) -> Result<EigenSpectrum> {
    if h.rows() == 0 || h.cols() == 0 {
        return Err(Error::domain("channel matrix is empty"));
    }
    let values = hermitian_eigenvalues(&h.gram())?;
    // Gram matrices are PSD; rounding can leave -1e-15 sized values
    EigenSpectrum::new(values.into_iter().map(|v| v.max(0.0)).collect())
}

fn check_gamma(gamma: f64, upper_inclusive: bool) -> Result<()> {
    let ok = gamma > 0.0 && if upper_inclusive { gamma <= 1.0 } else { gamma < 1.0 };
    if ok {
        Ok(())
    } else {
        let range = if upper_inclusive { "(0, 1]" } else { "(0, 1)" };
        Err(Error::domain(format!("threshold gamma must lie in {range}, got {gamma}")))
    }
}

/// Number of eigenmodes with `μ_m/μ_1 ≥ γ`.
pub fn edof(spectrum: &EigenSpectrum, gamma: f64) -> Result<usize> {
    check_gamma(gamma, true)?;
    let top = spectrum.values[0];
    if top == 0.0 {
        return Ok(0);
    }
    let cut = gamma * top * (1.0 - EDOF_RATIO_SLACK);
    Ok(spectrum.values.iter().take_while(|&&v| v >= cut).count())
}

/// `max(nt, nr)·dt·dr/λ`.
pub fn rayleigh_distance(nt: usize, nr: usize, dt: f64, dr: f64, lambda: Wavelength) -> Result<Distance> {
    if nt == 0 || nr == 0 {
        return Err(Error::domain("antenna counts must be at least 1"));
    }
    if !(dt > 0.0 && dr > 0.0) {
        return Err(Error::domain(format!("antenna spacings must be positive, got {dt} and {dr}")));
    }
    Distance::from_m(nt.max(nr) as f64 * dt * dr / lambda.m())
}

/// One sweep row: raw eigenvalues, their ratios to the largest, and EDOF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub distance_m: f64,
    pub eigenvalues: Vec<f64>,
    pub ratios: Vec<f64>,
    pub edof: usize,
}

/// `points` log-spaced distances over `[dmin, dmax]`. When `snap_to` lies in
/// the range, the nearest grid point is replaced by it exactly; a one-point
/// grid is then just `snap_to`.
pub fn log_grid(dmin: f64, dmax: f64, points: usize, snap_to: Option<f64>) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::domain("grid needs at least one point"));
    }
    if !(dmin > 0.0 && dmax >= dmin && dmax.is_finite()) {
        return Err(Error::domain(format!("invalid distance range [{dmin}, {dmax}]")));
    }
    if points == 1 {
        return Ok(vec![snap_to.filter(|s| (dmin..=dmax).contains(s)).unwrap_or(dmin)]);
    }
    let step = (dmax / dmin).ln() / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|i| dmin * (step * i as f64).exp()).collect();
    grid[points - 1] = dmax;
    if let Some(s) = snap_to.filter(|s| (dmin..=dmax).contains(s)) {
        let nearest = (0..points)
            .min_by(|&a, &b| (grid[a].ln() - s.ln()).abs().total_cmp(&(grid[b].ln() - s.ln()).abs()))
            .expect("non-empty grid");
        grid[nearest] = s;
    }
    Ok(grid)
}

/// Eigenvalue curves for `template` with the receiver placed at each distance
/// along the template's link axis.
pub fn eigen_curve_sweep(template: &LosMimoLink, distances: &[f64], gamma: f64) -> Result<Vec<SweepRow>> {
    check_gamma(gamma, true)?;
    if distances.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(Error::domain("sweep distances must be positive"));
    }
    if distances.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::domain("sweep distances must be sorted ascending"));
    }
    distances
        .par_iter()
        .map(|&d| {
            let spectrum = gram_eigenvalues(&los_channel_matrix(&template.at_distance(d)?)?)?;
            Ok(SweepRow {
                distance_m: d,
                ratios: spectrum.ratios(),
                edof: edof(&spectrum, gamma)?,
                eigenvalues: spectrum.values,
            })
        })
        .collect()
}

/// Writes `D_m,mu_1..mu_k,ratio_1..ratio_k,edof`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut w: W) -> std::io::Result<()> {
    let k = rows.first().map_or(0, |r| r.eigenvalues.len());
    let mut header = vec!["D_m".to_string()];
    header.extend((1..=k).map(|i| format!("mu_{i}")));
    header.extend((1..=k).map(|i| format!("ratio_{i}")));
    header.push("edof".into());
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        let mut fields = vec![r.distance_m.to_string()];
        fields.extend(r.eigenvalues.iter().map(f64::to_string));
        fields.extend(r.ratios.iter().map(f64::to_string));
        fields.push(r.edof.to_string());
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Aligned broadside array pair, the geometry family behind the
/// effective-multiplexing-distance law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayPair {
    pub nt: usize,
    pub nr: usize,
    pub dt: f64,
    pub dr: f64,
}

impl ArrayPair {
    pub fn square(n: usize, spacing: f64) -> Self {
        Self { nt: n, nr: n, dt: spacing, dr: spacing }
    }

    /// `D_t·D_r` with `D = (N − 1)·d`.
    pub fn aperture_product(&self) -> f64 {
        (self.nt - 1) as f64 * self.dt * (self.nr - 1) as f64 * self.dr
    }

    fn edof_at(&self, d: f64, gamma: f64, lambda: Wavelength, model: PhaseModel) -> Result<usize> {
        let link = LosMimoLink::aligned(self.nt, self.nr, self.dt, self.dr, lambda, d, model)?;
        edof(&gram_eigenvalues(&los_channel_matrix(&link)?)?, gamma)
    }
}

/// Farthest distance at which the aligned pair still has `EDOF ≥ m`.
///
/// Below the Rayleigh distance the spectrum aliases and EDOF oscillates, so
/// the near bound is `max(10·max aperture, D_Ray)`. From there the upper
/// bracket doubles until EDOF drops below `m`, then bisection runs to a
/// relative width of 1e-4. The returned distance is the feasible end.
pub fn effective_multiplexing_distance(
    m: usize,
    gamma: f64,
    pair: ArrayPair,
    lambda: Wavelength,
    model: PhaseModel,
) -> Result<Distance> {
    check_gamma(gamma, false)?;
    if m < 2 || m > pair.nt.min(pair.nr) {
        return Err(Error::domain(format!("mode count {m} must lie in [2, {}]", pair.nt.min(pair.nr))));
    }
    let d_ray = rayleigh_distance(pair.nt, pair.nr, pair.dt, pair.dr, lambda)?.m();
    let max_aperture = ((pair.nt - 1) as f64 * pair.dt).max((pair.nr - 1) as f64 * pair.dr);
    let mut lo = (10.0 * max_aperture).max(d_ray);
    let near = pair.edof_at(lo, gamma, lambda, model)?;
    if near < m {
        return Err(Error::Infeasible(format!("EDOF is {near} < {m} already at the near bound {lo} m")));
    }

    let mut hi = lo;
    let mut doublings = 0;
    loop {
        hi *= 2.0;
        doublings += 1;
        if pair.edof_at(hi, gamma, lambda, model)? < m {
            break;
        }
        lo = hi;
        if doublings == MAX_BRACKET_DOUBLINGS {
            return Err(Error::Range(format!("EDOF stays ≥ {m} out to {hi} m")));
        }
    }

    while hi - lo > BISECTION_REL_TOL * lo {
        let mid = 0.5 * (lo + hi);
        if pair.edof_at(mid, gamma, lambda, model)? >= m {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Distance::from_m(lo)
}

/// Per-geometry and pooled estimates of `c_m(γ) = D_max·λ/(D_t·D_r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmEstimate {
    pub m: usize,
    pub gamma: f64,
    pub per_geometry: Vec<(ArrayPair, f64)>,
    pub mean: f64,
    /// `(max − min)/mean` across the family.
    pub relative_spread: f64,
}

pub fn estimate_cm(
    m: usize,
    gamma: f64,
    family: &[ArrayPair],
    lambda: Wavelength,
    model: PhaseModel,
) -> Result<CmEstimate> {
    if family.is_empty() {
        return Err(Error::domain("geometry family is empty"));
    }
    let per_geometry = family
        .par_iter()
        .map(|&pair| {
            let d = effective_multiplexing_distance(m, gamma, pair, lambda, model)?.m();
            Ok((pair, d * lambda.m() / pair.aperture_product()))
        })
        .collect::<Result<Vec<_>>>()?;
    let cs: Vec<f64> = per_geometry.iter().map(|(_, c)| *c).collect();
    let mean = cs.iter().sum::<f64>() / cs.len() as f64;
    let max = cs.iter().cloned().fold(f64::MIN, f64::max);
    let min = cs.iter().cloned().fold(f64::MAX, f64::min);
    Ok(CmEstimate { m, gamma, per_geometry, mean, relative_spread: (max - min) / mean })
}
