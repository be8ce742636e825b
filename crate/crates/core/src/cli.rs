//! Command-line front end: `eval | scan | optimize | simulate | constants`.
//!
//! Settings resolve in three layers: built-in defaults, then the `--config`
//! JSON document, then explicit flags. Everything is validated before any
//! computation starts. Exit codes: 0 success, 2 configuration or I/O error,
//! 3 when `--assert-violation` is set and a violation below `-tol` is found.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::constants::{ConstantsOverrides, PhysicalConstants, TAU_L_SECONDS, TAU_S_SECONDS};
use crate::error::{Error, Result};
use crate::mc::{self, McConfig};
use crate::observable::{psi_minus, TwoQubitState};
use crate::output::{fingerprint, round_g9};
use crate::quasispin::{Measurement, Quasispin, Strangeness};
use crate::scan::{time_scan, ScanAxis, TimeSlot};
use crate::search::{optimize_chsh, optimize_times};
use crate::witness::{violation, BellSetting};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "kaon-bell",
    version,
    about = "Bell witness for decaying entangled kaon pairs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: GlobalFlags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// S on the antisymmetric state and its separable bounds for one setting.
    Eval,
    /// Witness along one time axis, written as CSV with a JSON sidecar.
    Scan {
        /// Time(s) to vary, e.g. `t_n` or `t_m+t_nprime`.
        #[arg(long)]
        axis: Option<String>,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
    /// Multi-start search for the most negative delta_min in [0, t_max]^4.
    Optimize {
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Monte-Carlo event stream and estimated S.
    Simulate,
    /// Resolved physical constants.
    Constants,
}

#[derive(Debug, Args)]
pub struct GlobalFlags {
    /// Run configuration (JSON, unknown keys rejected).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Constant overrides (JSON with gamma_l, delta_m, eps_re, eps_im).
    #[arg(long, global = true)]
    pub constants: Option<PathBuf>,
    /// Base constant set before overrides.
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Measurement times `t_n,t_m,t_nprime,t_mprime` in units of tau_S.
    #[arg(long, global = true)]
    pub times: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub question: Option<Question>,
    /// Doubles delta_m.
    #[arg(long, global = true)]
    pub doubled_oscillation: bool,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub events: Option<u64>,
    #[arg(long, global = true)]
    pub efficiency_a: Option<f64>,
    #[arg(long, global = true)]
    pub efficiency_b: Option<f64>,
    /// Exit with code 3 when a violation below `-tol` is found.
    #[arg(long, global = true)]
    pub assert_violation: bool,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    #[default]
    Pdg,
    Calibrated,
    CpConserving,
}

impl Preset {
    pub fn constants(self) -> PhysicalConstants {
        match self {
            Preset::Pdg => PhysicalConstants::pdg(),
            Preset::Calibrated => PhysicalConstants::calibrated(),
            Preset::CpConserving => PhysicalConstants::pdg().cp_conserving(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Question {
    K0,
    K0bar,
}

impl From<Question> for Strangeness {
    fn from(q: Question) -> Self {
        match q {
            Question::K0 => Strangeness::K0,
            Question::K0bar => Strangeness::K0bar,
        }
    }
}

/// A measured quasispin: a strangeness question or explicit Bloch angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuasispinSpec {
    Named(Strangeness),
    Angles { theta: f64, phi: f64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingConfig {
    pub t_n: Option<f64>,
    pub t_m: Option<f64>,
    pub t_nprime: Option<f64>,
    pub t_mprime: Option<f64>,
    /// Per-slot quasispins; unset slots use the global question.
    pub n: Option<QuasispinSpec>,
    pub m: Option<QuasispinSpec>,
    pub nprime: Option<QuasispinSpec>,
    pub mprime: Option<QuasispinSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub axis: Option<ScanAxis>,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    pub n_events: Option<u64>,
    pub seed: Option<u64>,
    pub efficiency_a: Option<f64>,
    pub efficiency_b: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

/// The `--config` document. Every section is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub preset: Option<Preset>,
    pub constants: Option<ConstantsOverrides>,
    pub doubled_oscillation: Option<bool>,
    pub question: Option<Strangeness>,
    pub setting: Option<SettingConfig>,
    pub scan: Option<ScanConfig>,
    pub optimize: Option<OptimizeConfig>,
    pub mc: Option<McSpec>,
    pub output: Option<OutputConfig>,
    pub assert_tolerance: Option<f64>,
}

impl RunConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::field("--config", format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text).map_err(|e| Error::field("--config", e.to_string()))
    }
}

/// Fully resolved and validated run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub constants: PhysicalConstants,
    pub question: Strangeness,
    pub setting: BellSetting,
    pub axis: ScanAxis,
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub t_max: f64,
    pub mc: McConfig,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub assert_violation: bool,
    pub tol: f64,
}

const DEFAULT_TIMES: [f64; 4] = [0.0, 1.34, 1.34, 2.80];

fn check_time(field: &str, t: f64) -> Result<f64> {
    if t.is_finite() && t >= 0.0 {
        Ok(t)
    } else {
        Err(Error::field(field, format!("{t} must be finite and >= 0")))
    }
}

fn parse_times(s: &str) -> Result<[f64; 4]> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::field("--times", e.to_string()))?;
    <[f64; 4]>::try_from(v).map_err(|v| {
        Error::field(
            "--times",
            format!("expected 4 comma-separated times, got {}", v.len()),
        )
    })
}

fn quasispin_of(spec: Option<QuasispinSpec>, q: Strangeness, field: &str) -> Result<Quasispin> {
    match spec {
        None => Ok(q.quasispin()),
        Some(QuasispinSpec::Named(s)) => Ok(s.quasispin()),
        Some(QuasispinSpec::Angles { theta, phi }) => {
            Quasispin::new(theta, phi).map_err(|e| Error::field(field, e.to_string()))
        }
    }
}

/// Merges defaults, the config file and flags, validating each field.
pub fn resolve(flags: &GlobalFlags, cfg: &RunConfig) -> Result<Resolved> {
    let mut c = flags.preset.or(cfg.preset).unwrap_or_default().constants();
    if let Some(o) = &cfg.constants {
        c = c
            .apply(o)
            .map_err(|e| Error::field("constants", e.to_string()))?;
    }
    if let Some(path) = &flags.constants {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::field("--constants", format!("{}: {e}", path.display())))?;
        let o: ConstantsOverrides =
            serde_json::from_str(&text).map_err(|e| Error::field("--constants", e.to_string()))?;
        c = c
            .apply(&o)
            .map_err(|e| Error::field("--constants", e.to_string()))?;
    }
    if flags.doubled_oscillation || cfg.doubled_oscillation.unwrap_or(false) {
        c = c.with_doubled_oscillation();
    }

    let question = flags
        .question
        .map(Strangeness::from)
        .or(cfg.question)
        .unwrap_or_default();
    let sc = cfg.setting.clone().unwrap_or_default();
    let times = match &flags.times {
        Some(s) => {
            let t = parse_times(s)?;
            for (name, v) in [
                "--times (t_n)",
                "--times (t_m)",
                "--times (t_nprime)",
                "--times (t_mprime)",
            ]
            .iter()
            .zip(t)
            {
                check_time(name, v)?;
            }
            t
        }
        None => {
            let pick = [sc.t_n, sc.t_m, sc.t_nprime, sc.t_mprime];
            let names = [
                "setting.t_n",
                "setting.t_m",
                "setting.t_nprime",
                "setting.t_mprime",
            ];
            let mut t = DEFAULT_TIMES;
            for i in 0..4 {
                if let Some(v) = pick[i] {
                    t[i] = check_time(names[i], v)?;
                }
            }
            t
        }
    };
    let setting = BellSetting::new(
        Measurement::new(quasispin_of(sc.n, question, "setting.n")?, times[0])?,
        Measurement::new(quasispin_of(sc.m, question, "setting.m")?, times[1])?,
        Measurement::new(
            quasispin_of(sc.nprime, question, "setting.nprime")?,
            times[2],
        )?,
        Measurement::new(
            quasispin_of(sc.mprime, question, "setting.mprime")?,
            times[3],
        )?,
    );

    let scan = cfg.scan.clone().unwrap_or_default();
    let opt = cfg.optimize.clone().unwrap_or_default();
    let mc_spec = cfg.mc.clone().unwrap_or_default();
    let output = cfg.output.clone().unwrap_or_default();
    let mc = McConfig {
        n_events: flags
            .events
            .or(mc_spec.n_events)
            .unwrap_or(McConfig::default().n_events),
        seed: flags
            .seed
            .or(mc_spec.seed)
            .unwrap_or(McConfig::default().seed),
        efficiency_a: flags.efficiency_a.or(mc_spec.efficiency_a).unwrap_or(1.0),
        efficiency_b: flags.efficiency_b.or(mc_spec.efficiency_b).unwrap_or(1.0),
    };
    mc.validate()?;
    let tol = flags.tol.or(cfg.assert_tolerance).unwrap_or(1e-6);
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::field(
            "tol",
            format!("{tol} must be finite and >= 0"),
        ));
    }
    Ok(Resolved {
        constants: c,
        question,
        setting,
        axis: scan.axis.unwrap_or_else(|| ScanAxis::single(TimeSlot::N)),
        lo: scan.lo.unwrap_or(0.0),
        hi: scan.hi.unwrap_or(1.6),
        step: scan.step.unwrap_or(0.02),
        t_max: opt.t_max.unwrap_or(5.0),
        mc,
        out: flags.out.clone().or(output.out),
        format: flags.format.or(output.format),
        assert_violation: flags.assert_violation,
        tol,
    })
}

/// Hash of the resolved constants and measurement setting.
pub fn config_fingerprint(c: &PhysicalConstants, s: &BellSetting) -> String {
    let setting = serde_json::to_string(s).expect("setting serializes");
    fingerprint(&format!("{}|{}", c.fingerprint(), setting))
}

/// Rounds every float in a JSON tree to 9 significant digits.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round_g9(x)))
            .map(Value::Number)
            .unwrap_or(Value::Null),
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => {
            Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect())
        }
        other => other,
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&round_floats(serde_json::to_value(v)?))?;
    s.push('\n');
    Ok(s)
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| Error::field("--out", format!("{}: {e}", path.display())))
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn constants_json(c: &PhysicalConstants) -> Value {
    json!({
        "gamma_s": c.gamma_s(),
        "gamma_l": c.gamma_l(),
        "delta_m": c.delta_m(),
        "eps_re": c.eps().re,
        "eps_im": c.eps().im,
        "delta": c.delta(),
        "fingerprint": c.fingerprint(),
    })
}

fn header(r: &Resolved) -> Value {
    json!({
        "config_fingerprint": config_fingerprint(&r.constants, &r.setting),
        "constants": constants_json(&r.constants),
        "question": r.question,
        "times": {
            "t_n": r.setting.n.time,
            "t_m": r.setting.m.time,
            "t_nprime": r.setting.nprime.time,
            "t_mprime": r.setting.mprime.time,
        },
        "setting": r.setting,
    })
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Value::Object(a), Value::Object(b)) = (&mut a, b) {
        a.extend(b);
    }
    a
}

/// Runs one command and returns its exit status.
fn dispatch(cmd: &Command, r: &Resolved, out: &mut dyn Write) -> Result<i32> {
    let psi = psi_minus();
    let rho = TwoQubitState::pure(&psi)?;
    let c = &r.constants;
    let status = |hit: bool| {
        if r.assert_violation && hit {
            EXIT_VIOLATION
        } else {
            EXIT_OK
        }
    };
    match cmd {
        Command::Eval => {
            let w = violation(&r.setting, &rho, c)?;
            let text = match r.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&merge(header(r), serde_json::to_value(w)?))?,
                Format::Csv => {
                    let t = r.setting.times();
                    let row = [
                        t[0],
                        t[1],
                        t[2],
                        t[3],
                        w.s_state,
                        w.s_sep_min,
                        w.s_sep_max,
                        w.delta_min,
                    ]
                    .map(crate::output::fmt_g9)
                    .join(",");
                    format!(
                        "t_n,t_m,t_nprime,t_mprime,s_state,s_sep_min,s_sep_max,delta_min\n{row}\n"
                    )
                }
            };
            if let Some(p) = &r.out {
                write_file(p, &text)?;
            }
            out.write_all(text.as_bytes())?;
            Ok(status(w.delta_min < -r.tol))
        }
        Command::Scan { .. } => {
            let res = time_scan(&r.setting, &r.axis, r.lo, r.hi, r.step, &rho, c)?;
            let min = res.min_delta().copied();
            let meta = merge(
                header(r),
                json!({
                    "axis": res.axis,
                    "lo": r.lo,
                    "hi": r.hi,
                    "step": r.step,
                    "points": res.points.len(),
                    "min_delta": min,
                    "zero_crossings": res.zero_crossings(),
                }),
            );
            let format = r.format.unwrap_or(Format::Csv);
            match (&r.out, format) {
                (Some(p), Format::Csv) => {
                    write_file(p, &res.to_csv())?;
                    let m = to_json(&meta)?;
                    write_file(&sidecar(p), &m)?;
                    out.write_all(m.as_bytes())?;
                }
                (Some(p), Format::Json) => {
                    let text = to_json(&merge(meta, json!({ "scan": res.points })))?;
                    write_file(p, &text)?;
                    out.write_all(text.as_bytes())?;
                }
                (None, Format::Csv) => out.write_all(res.to_csv().as_bytes())?,
                (None, Format::Json) => {
                    out.write_all(to_json(&merge(meta, json!({ "scan": res.points })))?.as_bytes())?
                }
            }
            let hit = res.violating(r.tol).next().is_some();
            Ok(status(hit))
        }
        Command::Optimize { .. } => {
            let best = optimize_times(r.question, r.t_max, &rho, c)?;
            let chsh = optimize_chsh(r.question, r.t_max, &rho, c)?;
            let doc = merge(
                header(r),
                json!({
                    "t_max": r.t_max,
                    "best_times": best.setting.times(),
                    "best_setting": best.setting,
                    "witness": best.witness,
                    "restarts": best.restarts,
                    "chsh": {
                        "max_abs_s": chsh.max_abs_s,
                        "s": chsh.s,
                        "times": chsh.times,
                        "exceeds_stable_bound": chsh.max_abs_s > 2.0 + 1e-6,
                    },
                }),
            );
            let text = to_json(&doc)?;
            if let Some(p) = &r.out {
                write_file(p, &text)?;
            }
            out.write_all(text.as_bytes())?;
            Ok(status(best.witness.delta_min < -r.tol))
        }
        Command::Simulate => {
            let events = mc::generate_events(&r.setting, &psi, c, &r.mc)?;
            let tallies = mc::Tallies::from_events(&events);
            let tables = mc::outcome_tables(&r.setting, &psi, c)?;
            let detected = tables.map(|row| {
                row.map(|p| mc::efficiency_folded(&p, r.mc.efficiency_a, r.mc.efficiency_b))
            });
            let (estimate, warning) = match mc::estimate_from_tallies(&tallies) {
                Ok(e) => (Some(e), None),
                Err(e @ Error::MissingCell(..)) => (None, Some(e.to_string())),
                Err(e) => return Err(e),
            };
            let cell = |a: usize, b: usize| {
                let k = tallies.counts[a][b];
                json!({ "YY": k[0], "YN": k[1], "NY": k[2], "NN": k[3] })
            };
            let z = tallies.no_signaling_z();
            let doc = merge(
                header(r),
                json!({
                    "seed": r.mc.seed,
                    "n_events": r.mc.n_events,
                    "efficiency_a": r.mc.efficiency_a,
                    "efficiency_b": r.mc.efficiency_b,
                    "tallies": {
                        "n,m": cell(0, 0), "n,mprime": cell(0, 1),
                        "nprime,m": cell(1, 0), "nprime,mprime": cell(1, 1),
                    },
                    "e_hat": estimate.map(|e| e.e_hat),
                    "s_hat": estimate.map(|e| e.s_hat),
                    "stderr": estimate.map(|e| e.stderr),
                    "s_analytic": mc::s_from_tables(&tables),
                    "s_analytic_detected": mc::s_from_tables(&detected),
                    "no_signaling_z": z,
                    "warning": warning,
                }),
            );
            let text = to_json(&doc)?;
            if let Some(p) = &r.out {
                write_file(p, &mc::events_to_csv(&events))?;
                write_file(&sidecar(p), &text)?;
            }
            out.write_all(text.as_bytes())?;
            Ok(EXIT_OK)
        }
        Command::Constants => {
            let text = match r.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&merge(
                    constants_json(c),
                    json!({ "tau_s_seconds": TAU_S_SECONDS, "tau_l_seconds": TAU_L_SECONDS }),
                ))?,
                Format::Csv => {
                    let mut s = String::from("name,value\n");
                    for (k, v) in [
                        ("gamma_s", c.gamma_s()),
                        ("gamma_l", c.gamma_l()),
                        ("delta_m", c.delta_m()),
                        ("eps_re", c.eps().re),
                        ("eps_im", c.eps().im),
                        ("delta", c.delta()),
                    ] {
                        s.push_str(&format!("{k},{}\n", crate::output::fmt_g9(v)));
                    }
                    s
                }
            };
            if let Some(p) = &r.out {
                write_file(p, &text)?;
            }
            out.write_all(text.as_bytes())?;
            Ok(EXIT_OK)
        }
    }
}

fn resolve_cli(cli: &Cli) -> Result<Resolved> {
    let cfg = match &cli.flags.config {
        Some(p) => RunConfig::from_json_file(p)?,
        None => RunConfig::default(),
    };
    let mut cfg = cfg;
    match &cli.command {
        Command::Scan { axis, lo, hi, step } => {
            let s = cfg.scan.get_or_insert_with(Default::default);
            if let Some(a) = axis {
                s.axis = Some(
                    a.parse()
                        .map_err(|e: Error| Error::field("--axis", e.to_string()))?,
                );
            }
            s.lo = lo.or(s.lo);
            s.hi = hi.or(s.hi);
            s.step = step.or(s.step);
        }
        Command::Optimize { t_max } => {
            let o = cfg.optimize.get_or_insert_with(Default::default);
            o.t_max = t_max.or(o.t_max);
        }
        _ => {}
    }
    resolve(&cli.flags, &cfg)
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
                return EXIT_OK;
            }
            let _ = err.write_all(text.as_bytes());
            return EXIT_CONFIG;
        }
    };
    match resolve_cli(&cli).and_then(|r| dispatch(&cli.command, &r, out)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}
