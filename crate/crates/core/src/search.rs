//! Searches over the four measurement times: the strongest violation of the
//! separable bound, and the largest |S| against the stable bound 2.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::nelder_mead::{self, NelderMeadOptions};
use crate::observable::{correlation_of, EffectiveObservable, TwoQubitState};
use crate::quasispin::{Measurement, Strangeness};
use crate::witness::{
    delta_min, s_function, violation, BellSetting, ExtremaOptions, WitnessResult,
};

/// Largest time box accepted by the searches.
pub const MAX_TIME_BOX: f64 = 100.0;

#[derive(Debug, Clone, Copy)]
pub struct TimeSearchOptions {
    /// Start-grid levels per time axis, spanning [0, t_max].
    pub grid_levels: usize,
    /// Best grid points refined by Nelder-Mead.
    pub restarts: usize,
    pub simplex: NelderMeadOptions,
}

impl Default for TimeSearchOptions {
    fn default() -> Self {
        Self {
            grid_levels: 6,
            restarts: 8,
            simplex: NelderMeadOptions {
                initial_step: 0.0, // replaced by t_max / 10
                diameter_tol: 1e-5,
                max_evals: 600,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartDiagnostic {
    pub start: [f64; 4],
    pub times: [f64; 4],
    pub value: f64,
    pub evals: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSearchResult {
    pub setting: BellSetting,
    pub witness: WitnessResult,
    pub restarts: Vec<RestartDiagnostic>,
}

fn check_box(t_max: f64) -> Result<()> {
    if !t_max.is_finite() || !(0.0..=MAX_TIME_BOX).contains(&t_max) {
        return Err(Error::field(
            "t_max",
            format!("{t_max} outside [0, {MAX_TIME_BOX}]"),
        ));
    }
    Ok(())
}

fn clamp_times(x: &[f64], t_max: f64) -> [f64; 4] {
    [0, 1, 2, 3].map(|i| x[i].clamp(0.0, t_max))
}

fn level_grid(levels: usize, t_max: f64) -> Vec<[f64; 4]> {
    let l = levels.max(2);
    let vals: Vec<f64> = (0..l).map(|i| t_max * i as f64 / (l - 1) as f64).collect();
    let mut out = Vec::with_capacity(l.pow(4));
    for &a in &vals {
        for &b in &vals {
            for &c in &vals {
                for &d in &vals {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    out
}

/// Multi-start minimization of `f` over `[0, t_max]^4`; returns diagnostics
/// sorted by value (best first).
fn multistart<F>(f: F, t_max: f64, opts: &TimeSearchOptions) -> Vec<RestartDiagnostic>
where
    F: Fn(&[f64; 4]) -> f64 + Sync,
{
    let grid = level_grid(opts.grid_levels, t_max);
    let mut scored: Vec<(f64, [f64; 4])> = grid.par_iter().map(|t| (f(t), *t)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let simplex = NelderMeadOptions {
        initial_step: t_max / 10.0,
        ..opts.simplex
    };
    let mut restarts: Vec<RestartDiagnostic> = scored
        .iter()
        .take(opts.restarts.max(1))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(_, start)| {
            let m = nelder_mead::minimize(|x| f(&clamp_times(x, t_max)), start, &simplex);
            let times = clamp_times(&m.x, t_max);
            RestartDiagnostic {
                start: *start,
                times,
                value: m.value,
                evals: m.evals,
                converged: m.converged,
            }
        })
        .collect();
    restarts.sort_by(|a, b| a.value.total_cmp(&b.value));
    restarts
}

/// Minimizes `delta_min` over the four times with every question fixed to `q`.
pub fn optimize_times(
    q: Strangeness,
    t_max: f64,
    rho: &TwoQubitState,
    c: &PhysicalConstants,
) -> Result<TimeSearchResult> {
    optimize_times_with(q, t_max, rho, c, &TimeSearchOptions::default())
}

pub fn optimize_times_with(
    q: Strangeness,
    t_max: f64,
    rho: &TwoQubitState,
    c: &PhysicalConstants,
    opts: &TimeSearchOptions,
) -> Result<TimeSearchResult> {
    check_box(t_max)?;
    let inner = ExtremaOptions::default();
    let objective = |t: &[f64; 4]| {
        BellSetting::strangeness(q, *t)
            .and_then(|s| delta_min(&s, rho, c, &inner))
            .map(|(d, _, _)| d)
            .unwrap_or(f64::INFINITY)
    };
    let restarts = if t_max == 0.0 {
        vec![RestartDiagnostic {
            start: [0.0; 4],
            times: [0.0; 4],
            value: objective(&[0.0; 4]),
            evals: 1,
            converged: true,
        }]
    } else {
        multistart(objective, t_max, opts)
    };
    let setting = BellSetting::strangeness(q, restarts[0].times)?;
    let witness = violation(&setting, rho, c)?;
    Ok(TimeSearchResult {
        setting,
        witness,
        restarts,
    })
}

/// Largest |S| found and where.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshExtreme {
    pub max_abs_s: f64,
    pub s: f64,
    pub times: [f64; 4],
}

/// Exhaustive |S| maximum over all assignments of `grid` values to the four
/// times. Correlations are tabulated once, so the cost is `O(grid^4)` additions.
pub fn chsh_extreme_on_grid(
    q: Strangeness,
    grid: &[f64],
    rho: &TwoQubitState,
    c: &PhysicalConstants,
) -> Result<ChshExtreme> {
    let ms = grid
        .iter()
        .map(|&t| Measurement::strangeness(q, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(chsh_extreme_over(&ms, rho, c)?.0)
}

/// Largest |S| when each of the four slots may be any of `candidates`
/// (mixed questions included). Also returns the maximizing setting.
pub fn chsh_extreme_over(
    candidates: &[Measurement],
    rho: &TwoQubitState,
    c: &PhysicalConstants,
) -> Result<(ChshExtreme, BellSetting)> {
    if candidates.is_empty() {
        return Err(Error::field("candidates", "no measurements to search"));
    }
    let obs = candidates
        .iter()
        .map(|m| EffectiveObservable::new(m, c))
        .collect::<Result<Vec<_>>>()?;
    let n = obs.len();
    let table: Vec<f64> = obs
        .iter()
        .flat_map(|a| obs.iter().map(move |b| correlation_of(a, b, rho)))
        .collect();
    let e = |i: usize, j: usize| table[i * n + j];
    let best = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut best = (0.0_f64, 0.0, [0usize; 4]);
            for b in 0..n {
                let eab = e(a, b);
                for ap in 0..n {
                    let eapb = e(ap, b);
                    for bp in 0..n {
                        let s = eab - e(a, bp) + eapb + e(ap, bp);
                        if s.abs() > best.0 {
                            best = (s.abs(), s, [a, b, ap, bp]);
                        }
                    }
                }
            }
            best
        })
        .reduce(
            || (0.0, 0.0, [0; 4]),
            |x, y| {
                if y.0 > x.0 || (y.0 == x.0 && y.2 < x.2) {
                    y
                } else {
                    x
                }
            },
        );
    let [a, b, ap, bp] = best.2;
    let setting = BellSetting::new(candidates[a], candidates[b], candidates[ap], candidates[bp]);
    Ok((
        ChshExtreme {
            max_abs_s: best.0,
            s: best.1,
            times: setting.times(),
        },
        setting,
    ))
}

/// Grid plus Nelder-Mead search for the largest |S| within `[0, t_max]^4`.
pub fn optimize_chsh(
    q: Strangeness,
    t_max: f64,
    rho: &TwoQubitState,
    c: &PhysicalConstants,
) -> Result<ChshExtreme> {
    optimize_chsh_mixed([q; 4], t_max, rho, c)
}

/// As [`optimize_chsh`] with a separate question for each of `(n, m, n', m')`.
pub fn optimize_chsh_mixed(
    questions: [Strangeness; 4],
    t_max: f64,
    rho: &TwoQubitState,
    c: &PhysicalConstants,
) -> Result<ChshExtreme> {
    check_box(t_max)?;
    let [qn, qm, qnp, qmp] = questions;
    let setting = |t: &[f64; 4]| -> Result<BellSetting> {
        Ok(BellSetting::new(
            Measurement::strangeness(qn, t[0])?,
            Measurement::strangeness(qm, t[1])?,
            Measurement::strangeness(qnp, t[2])?,
            Measurement::strangeness(qmp, t[3])?,
        ))
    };
    let s_at = |t: &[f64; 4]| {
        setting(t)
            .and_then(|s| s_function(&s, rho, c))
            .unwrap_or(0.0)
    };
    if t_max == 0.0 {
        let s = s_at(&[0.0; 4]);
        return Ok(ChshExtreme {
            max_abs_s: s.abs(),
            s,
            times: [0.0; 4],
        });
    }
    let opts = TimeSearchOptions {
        grid_levels: 11,
        restarts: 16,
        simplex: NelderMeadOptions {
            initial_step: 0.0,
            diameter_tol: 1e-9,
            max_evals: 4000,
        },
    };
    let mut best = ChshExtreme {
        max_abs_s: 0.0,
        s: 0.0,
        times: [0.0; 4],
    };
    for sign in [1.0, -1.0] {
        let r = multistart(|t| -sign * s_at(t), t_max, &opts);
        let s = s_at(&r[0].times);
        if s.abs() > best.max_abs_s {
            best = ChshExtreme {
                max_abs_s: s.abs(),
                s,
                times: r[0].times,
            };
        }
    }
    Ok(best)
}
