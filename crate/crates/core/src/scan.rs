//! One-dimensional time scans of the witness (the Fig. 2-style curves).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{ConstantsOverrides, PhysicalConstants};
use crate::error::{Error, Result};
use crate::observable::TwoQubitState;
use crate::output::fmt_g9;
use crate::witness::{violation_with, BellSetting, ExtremaOptions};

/// One of the four measurement times of a [`BellSetting`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimeSlot {
    #[serde(rename = "t_n")]
    N,
    #[serde(rename = "t_m")]
    M,
    #[serde(rename = "t_nprime")]
    NPrime,
    #[serde(rename = "t_mprime")]
    MPrime,
}

impl TimeSlot {
    pub const ALL: [TimeSlot; 4] = [TimeSlot::N, TimeSlot::M, TimeSlot::NPrime, TimeSlot::MPrime];

    fn index(self) -> usize {
        match self {
            TimeSlot::N => 0,
            TimeSlot::M => 1,
            TimeSlot::NPrime => 2,
            TimeSlot::MPrime => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TimeSlot::N => "t_n",
            TimeSlot::M => "t_m",
            TimeSlot::NPrime => "t_nprime",
            TimeSlot::MPrime => "t_mprime",
        }
    }
}

impl FromStr for TimeSlot {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().trim_start_matches("t_");
        match key {
            "n" => Ok(TimeSlot::N),
            "m" => Ok(TimeSlot::M),
            "nprime" | "n'" => Ok(TimeSlot::NPrime),
            "mprime" | "m'" => Ok(TimeSlot::MPrime),
            _ => Err(Error::field("axis", format!("unknown time slot {s:?}"))),
        }
    }
}

/// The time slots that follow the scanned value; several slots may be tied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanAxis(Vec<TimeSlot>);

impl ScanAxis {
    pub fn new(slots: &[TimeSlot]) -> Result<Self> {
        let mut v: Vec<TimeSlot> = Vec::new();
        for s in slots {
            if !v.contains(s) {
                v.push(*s);
            }
        }
        if v.is_empty() {
            return Err(Error::field("axis", "no time slot selected"));
        }
        Ok(Self(v))
    }

    pub fn single(slot: TimeSlot) -> Self {
        Self(vec![slot])
    }

    pub fn slots(&self) -> &[TimeSlot] {
        &self.0
    }

    pub fn apply(&self, template: &BellSetting, t: f64) -> Result<BellSetting> {
        let mut times = template.times();
        for s in &self.0 {
            times[s.index()] = t;
        }
        template.with_times(times)
    }
}

impl fmt::Display for ScanAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.0.iter().map(|s| s.name()).collect();
        f.write_str(&names.join("+"))
    }
}

/// Parses `t_n`, `t_m+t_nprime`, `m,nprime`, ...
impl FromStr for ScanAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let slots = s
            .split(['+', ','])
            .filter(|p| !p.trim().is_empty())
            .map(TimeSlot::from_str)
            .collect::<Result<Vec<_>>>()?;
        Self::new(&slots)
    }
}

impl Serialize for ScanAxis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ScanAxis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `lo, lo + step, ...` up to `hi`; a step wider than the range yields `[lo]`.
pub fn scan_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    let finite = lo.is_finite() && hi.is_finite() && step.is_finite();
    if !finite || lo < 0.0 || step <= 0.0 || hi < lo {
        return Err(Error::EmptyRange { lo, hi, step });
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub t: f64,
    pub s_state: f64,
    pub s_sep_min: f64,
    pub s_sep_max: f64,
    pub delta_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub axis: ScanAxis,
    pub template: BellSetting,
    pub constants: ConstantsOverrides,
    pub constants_fingerprint: String,
    pub points: Vec<ScanPoint>,
}

pub const CSV_HEADER: &str = "t,s_state,s_sep_min,s_sep_max,delta_min";

impl ScanResult {
    pub fn to_csv(&self) -> String {
        points_to_csv(&self.points)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Points where the state lies below the separable minimum by more than `tol`.
    pub fn violating(&self, tol: f64) -> impl Iterator<Item = &ScanPoint> {
        self.points.iter().filter(move |p| p.delta_min < -tol)
    }

    pub fn min_delta(&self) -> Option<&ScanPoint> {
        self.points
            .iter()
            .min_by(|a, b| a.delta_min.total_cmp(&b.delta_min))
    }

    /// Linearly interpolated abscissae where `delta_min` changes sign.
    pub fn zero_crossings(&self) -> Vec<f64> {
        self.points
            .windows(2)
            .filter(|w| (w[0].delta_min < 0.0) != (w[1].delta_min < 0.0))
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                a.t + (b.t - a.t) * a.delta_min / (a.delta_min - b.delta_min)
            })
            .collect()
    }
}

pub fn points_to_csv(points: &[ScanPoint]) -> String {
    let mut out = String::with_capacity(64 * (points.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for p in points {
        let row = [p.t, p.s_state, p.s_sep_min, p.s_sep_max, p.delta_min].map(fmt_g9);
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_scan_csv(text: &str) -> Result<Vec<ScanPoint>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => {
            return Err(Error::Csv {
                line: 1,
                reason: format!("expected header {CSV_HEADER:?}"),
            })
        }
    }
    let mut points = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let vals = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Csv {
                line: i + 1,
                reason: e.to_string(),
            })?;
        if vals.len() != 5 {
            return Err(Error::Csv {
                line: i + 1,
                reason: format!("expected 5 fields, got {}", vals.len()),
            });
        }
        points.push(ScanPoint {
            t: vals[0],
            s_state: vals[1],
            s_sep_min: vals[2],
            s_sep_max: vals[3],
            delta_min: vals[4],
        });
    }
    Ok(points)
}

/// Evaluates the witness at every grid point along `axis`.
pub fn time_scan(
    template: &BellSetting,
    axis: &ScanAxis,
    lo: f64,
    hi: f64,
    step: f64,
    rho: &TwoQubitState,
    c: &PhysicalConstants,
) -> Result<ScanResult> {
    let grid = scan_grid(lo, hi, step)?;
    time_scan_at(template, axis, &grid, rho, c)
}

/// As [`time_scan`] on explicit, strictly increasing abscissae.
pub fn time_scan_at(
    template: &BellSetting,
    axis: &ScanAxis,
    grid: &[f64],
    rho: &TwoQubitState,
    c: &PhysicalConstants,
) -> Result<ScanResult> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::field(
            "scan",
            "grid must be non-empty and strictly increasing",
        ));
    }
    let opts = ExtremaOptions::default();
    let points = grid
        .par_iter()
        .map(|&t| {
            let s = axis.apply(template, t)?;
            let w = violation_with(&s, rho, c, &opts)?;
            Ok(ScanPoint {
                t,
                s_state: w.s_state,
                s_sep_min: w.s_sep_min,
                s_sep_max: w.s_sep_max,
                delta_min: w.delta_min,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult {
        axis: axis.clone(),
        template: *template,
        constants: ConstantsOverrides::from(c),
        constants_fingerprint: c.fingerprint(),
        points,
    })
}
