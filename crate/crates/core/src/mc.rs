//! Seeded Monte-Carlo emulation of the active-measurement experiment.
//!
//! Each event gets its own ChaCha8 stream (`stream = event_id`) under the run
//! seed, so generation split across threads reproduces the serial stream
//! record for record.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::linalg::ComplexVec4;
use crate::observable::{oracle_joint_probs, JointProbs};
use crate::witness::BellSetting;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Yes,
    No,
}

impl Outcome {
    pub fn symbol(self) -> &'static str {
        match self {
            Outcome::Yes => "Y",
            Outcome::No => "N",
        }
    }
}

/// Which of a party's two settings was chosen: `First` is n (Alice) or m (Bob).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Choice {
    First,
    Primed,
}

impl Choice {
    fn index(self) -> usize {
        match self {
            Choice::First => 0,
            Choice::Primed => 1,
        }
    }
}

fn alice_name(c: Choice) -> &'static str {
    ["n", "nprime"][c.index()]
}

fn bob_name(c: Choice) -> &'static str {
    ["m", "mprime"][c.index()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    pub event_id: u64,
    pub setting_a: Choice,
    pub setting_b: Choice,
    pub outcome_a: Outcome,
    pub outcome_b: Outcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_events: u64,
    pub seed: u64,
    pub efficiency_a: f64,
    pub efficiency_b: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_events: 1_000_000,
            seed: 1,
            efficiency_a: 1.0,
            efficiency_b: 1.0,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_events == 0 {
            return Err(Error::field("n_events", "must be >= 1"));
        }
        for (name, e) in [
            ("efficiency_a", self.efficiency_a),
            ("efficiency_b", self.efficiency_b),
        ] {
            if !(e > 0.0 && e <= 1.0) {
                return Err(Error::field(name, format!("{e} outside (0, 1]")));
            }
        }
        Ok(())
    }
}

/// Quantum outcome tables for the four setting pairs, `[alice][bob]`.
pub fn outcome_tables(
    s: &BellSetting,
    psi: &ComplexVec4,
    c: &PhysicalConstants,
) -> Result<[[JointProbs; 2]; 2]> {
    let alice = [s.n, s.nprime];
    let bob = [s.m, s.mprime];
    let p = |i: usize, j: usize| oracle_joint_probs(&alice[i], &bob[j], psi, c);
    Ok([[p(0, 0)?, p(0, 1)?], [p(1, 0)?, p(1, 1)?]])
}

/// Outcome table after independent Yes -> No losses on each side.
pub fn efficiency_folded(p: &JointProbs, eff_a: f64, eff_b: f64) -> JointProbs {
    JointProbs::from_marginals(eff_a * eff_b * p.p_yy, eff_a * p.p_a(), eff_b * p.p_b())
}

/// S computed from outcome tables, `E = P(YY) + P(NN) - P(YN) - P(NY)`.
pub fn s_from_tables(t: &[[JointProbs; 2]; 2]) -> f64 {
    t[0][0].correlation() - t[0][1].correlation() + t[1][0].correlation() + t[1][1].correlation()
}

fn draw_event(
    event_id: u64,
    seed: u64,
    tables: &[[JointProbs; 2]; 2],
    cfg: &McConfig,
) -> EventRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(event_id);
    let setting_a = if rng.random::<f64>() < 0.5 {
        Choice::First
    } else {
        Choice::Primed
    };
    let setting_b = if rng.random::<f64>() < 0.5 {
        Choice::First
    } else {
        Choice::Primed
    };
    let p = &tables[setting_a.index()][setting_b.index()];
    let u: f64 = rng.random();
    let (mut oa, mut ob) = if u < p.p_yy {
        (Outcome::Yes, Outcome::Yes)
    } else if u < p.p_yy + p.p_yn {
        (Outcome::Yes, Outcome::No)
    } else if u < p.p_yy + p.p_yn + p.p_ny {
        (Outcome::No, Outcome::Yes)
    } else {
        (Outcome::No, Outcome::No)
    };
    // a missed reaction in the absorber reads as "No"
    if oa == Outcome::Yes && rng.random::<f64>() >= cfg.efficiency_a {
        oa = Outcome::No;
    }
    if ob == Outcome::Yes && rng.random::<f64>() >= cfg.efficiency_b {
        ob = Outcome::No;
    }
    EventRecord {
        event_id,
        setting_a,
        setting_b,
        outcome_a: oa,
        outcome_b: ob,
    }
}

/// Generates `cfg.n_events` events with ids `0..n_events`.
pub fn generate_events(
    s: &BellSetting,
    psi: &ComplexVec4,
    c: &PhysicalConstants,
    cfg: &McConfig,
) -> Result<Vec<EventRecord>> {
    cfg.validate()?;
    let tables = outcome_tables(s, psi, c)?;
    Ok((0..cfg.n_events)
        .into_par_iter()
        .map(|id| draw_event(id, cfg.seed, &tables, cfg))
        .collect())
}

/// Serial generation of an id range; equals the matching slice of
/// [`generate_events`].
pub fn generate_range(
    s: &BellSetting,
    psi: &ComplexVec4,
    c: &PhysicalConstants,
    cfg: &McConfig,
    ids: std::ops::Range<u64>,
) -> Result<Vec<EventRecord>> {
    cfg.validate()?;
    let tables = outcome_tables(s, psi, c)?;
    Ok(ids
        .map(|id| draw_event(id, cfg.seed, &tables, cfg))
        .collect())
}

/// Outcome counts `[alice][bob][YY, YN, NY, NN]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tallies {
    pub counts: [[[u64; 4]; 2]; 2],
}

impl Tallies {
    pub fn from_events(events: &[EventRecord]) -> Self {
        events
            .par_iter()
            .fold(Tallies::default, |mut t, e| {
                t.add(e);
                t
            })
            .reduce(Tallies::default, Tallies::merge)
    }

    pub fn add(&mut self, e: &EventRecord) {
        let k = match (e.outcome_a, e.outcome_b) {
            (Outcome::Yes, Outcome::Yes) => 0,
            (Outcome::Yes, Outcome::No) => 1,
            (Outcome::No, Outcome::Yes) => 2,
            (Outcome::No, Outcome::No) => 3,
        };
        self.counts[e.setting_a.index()][e.setting_b.index()][k] += 1;
    }

    pub fn merge(mut self, other: Tallies) -> Tallies {
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..4 {
                    self.counts[i][j][k] += other.counts[i][j][k];
                }
            }
        }
        self
    }

    pub fn cell_total(&self, a: usize, b: usize) -> u64 {
        self.counts[a][b].iter().sum()
    }

    pub fn total(&self) -> u64 {
        (0..2)
            .flat_map(|a| (0..2).map(move |b| (a, b)))
            .map(|(a, b)| self.cell_total(a, b))
            .sum()
    }

    /// Yes frequency of Alice under her setting `a`, split by Bob's setting.
    pub fn alice_yes_rate(&self, a: usize, b: usize) -> (f64, u64) {
        let c = self.counts[a][b];
        let n = self.cell_total(a, b);
        ((c[0] + c[1]) as f64 / n as f64, n)
    }

    pub fn bob_yes_rate(&self, a: usize, b: usize) -> (f64, u64) {
        let c = self.counts[a][b];
        let n = self.cell_total(a, b);
        ((c[0] + c[2]) as f64 / n as f64, n)
    }

    /// z-scores of the no-signaling checks: Alice's Yes rate under n and n'
    /// compared across Bob's two settings, then Bob's under m and m' across
    /// Alice's. Cells without events give 0.
    pub fn no_signaling_z(&self) -> [f64; 4] {
        let z = |(p1, n1): (f64, u64), (p2, n2): (f64, u64)| {
            if n1 == 0 || n2 == 0 {
                return 0.0;
            }
            let p = (p1 * n1 as f64 + p2 * n2 as f64) / (n1 + n2) as f64;
            let var = p * (1.0 - p) * (1.0 / n1 as f64 + 1.0 / n2 as f64);
            if var > 0.0 {
                (p1 - p2) / var.sqrt()
            } else {
                0.0
            }
        };
        [
            z(self.alice_yes_rate(0, 0), self.alice_yes_rate(0, 1)),
            z(self.alice_yes_rate(1, 0), self.alice_yes_rate(1, 1)),
            z(self.bob_yes_rate(0, 0), self.bob_yes_rate(1, 0)),
            z(self.bob_yes_rate(0, 1), self.bob_yes_rate(1, 1)),
        ]
    }

    /// First setting pair without events, as (alice, bob) names.
    pub fn missing_cell(&self) -> Option<(&'static str, &'static str)> {
        for a in [Choice::First, Choice::Primed] {
            for b in [Choice::First, Choice::Primed] {
                if self.cell_total(a.index(), b.index()) == 0 {
                    return Some((alice_name(a), bob_name(b)));
                }
            }
        }
        None
    }
}

/// Estimated S with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub s_hat: f64,
    pub stderr: f64,
    /// `E_hat[alice][bob]`.
    pub e_hat: [[f64; 2]; 2],
    pub counts: Tallies,
    pub n_events: u64,
}

pub fn estimate_from_tallies(t: &Tallies) -> Result<Estimate> {
    if let Some((a, b)) = t.missing_cell() {
        return Err(Error::MissingCell(a.into(), b.into()));
    }
    let mut e_hat = [[0.0; 2]; 2];
    let mut var = 0.0;
    for (a, row) in e_hat.iter_mut().enumerate() {
        for (b, e) in row.iter_mut().enumerate() {
            let c = t.counts[a][b];
            let n = t.cell_total(a, b) as f64;
            *e = (c[0] as f64 + c[3] as f64 - c[1] as f64 - c[2] as f64) / n;
            // the product of outcomes is +-1 with mean E: variance (1 - E^2)/n
            var += (1.0 - *e * *e).max(0.0) / n;
        }
    }
    Ok(Estimate {
        s_hat: e_hat[0][0] - e_hat[0][1] + e_hat[1][0] + e_hat[1][1],
        stderr: var.sqrt(),
        e_hat,
        counts: *t,
        n_events: t.total(),
    })
}

pub fn estimate_s(events: &[EventRecord]) -> Result<Estimate> {
    estimate_from_tallies(&Tallies::from_events(events))
}

pub const EVENTS_CSV_HEADER: &str = "event_id,setting_a,setting_b,outcome_a,outcome_b";

pub fn events_to_csv(events: &[EventRecord]) -> String {
    let mut out = String::with_capacity(24 * (events.len() + 1));
    out.push_str(EVENTS_CSV_HEADER);
    out.push('\n');
    for e in events {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            e.event_id,
            alice_name(e.setting_a),
            bob_name(e.setting_b),
            e.outcome_a.symbol(),
            e.outcome_b.symbol()
        ));
    }
    out
}

pub fn write_events_csv(events: &[EventRecord], path: &Path) -> Result<()> {
    std::fs::write(path, events_to_csv(events))?;
    Ok(())
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "S_hat = {:.5} +- {:.5} ({} events)",
            self.s_hat, self.stderr, self.n_events
        )
    }
}
