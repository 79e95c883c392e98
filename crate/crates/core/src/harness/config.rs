//! Scenario configuration files.
//!
//! The format is flat `key = value` lines grouped under optional `[section]`
//! headers. `#` starts a comment. Every key name is unique across sections,
//! so a key may also appear before any header. Keys left out keep the value
//! of the base scenario (the `fig3-top` preset unless another base is
//! given).
//!
//! | section        | keys |
//! |----------------|------|
//! | `[protocol]`   | `theta`, `trigger_rate_hz`, `mu`, `eta_b`, `eta_c` |
//! | `[trajectory]` | `kind` (`constant`, `linear`, `step`, `piecewise`), `offset`, `rate`, `at`, `amplitude`, `initial`, `schedule` |
//! | `[feedback]`   | `mode` (`fast`, `slow`), `window`, `grid_resolution`, `max_kick` (or `none`), `fast_basis` (`r0`, `r1`, `average`) |
//! | `[run]`        | `duration_s`, `seed`, `replicas` |
//! | `[output]`     | `out_dir`, `events_csv`, `events_decimation` |
//!
//! Angles accept plain numbers or multiples of π such as `pi/3`, `-pi/4`,
//! `2*pi/3`. A schedule is a comma-separated list of `time:value` pairs,
//! e.g. `schedule = 7.5:2, 15:0, 22.5:2`. Changing `mode` without `window`
//! selects that mode's default window (5000 fast, 1000 slow).

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::channel::NoiseTrajectory;
use crate::error::Error;
use crate::feedback::{FastBasis, FeedbackConfig, FeedbackMode, DEFAULT_FAST_WINDOW, DEFAULT_SLOW_WINDOW};
use crate::quantum::ProtocolParams;

/// Where and what to write.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub out_dir: Option<PathBuf>,
    pub events_csv: bool,
    /// Keep every n-th click in `events.csv`.
    pub events_decimation: u64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            out_dir: None,
            events_csv: false,
            events_decimation: 100,
        }
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub protocol: ProtocolParams,
    pub trajectory: NoiseTrajectory,
    /// `feedback.theta` always equals `protocol.theta`.
    pub feedback: FeedbackConfig,
    pub duration_s: f64,
    pub seed: u64,
    pub replicas: u32,
    pub output: OutputConfig,
}

/// Built-in scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Linear drift of 0.05 rad/s under fast feedback, 60 s.
    Fig3Top,
    /// 2-rad steps at 7.5 s, 15 s and 22.5 s under slow feedback, 30 s.
    Fig3Bottom,
    /// No drift, fast feedback, 60 s.
    ZeroNoise,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Fig3Top, Preset::Fig3Bottom, Preset::ZeroNoise];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig3Top => "fig3-top",
            Preset::Fig3Bottom => "fig3-bottom",
            Preset::ZeroNoise => "zero-noise",
        }
    }

    pub fn config(&self) -> ScenarioConfig {
        let protocol = ProtocolParams::reference();
        let base = ScenarioConfig {
            protocol,
            trajectory: NoiseTrajectory::Linear { offset: 0.0, rate: 0.05 },
            feedback: FeedbackConfig::fast(protocol.theta),
            duration_s: 60.0,
            seed: 1,
            replicas: 1,
            output: OutputConfig::default(),
        };
        match self {
            Preset::Fig3Top => base,
            Preset::Fig3Bottom => ScenarioConfig {
                trajectory: NoiseTrajectory::Piecewise {
                    initial: 0.0,
                    schedule: vec![(7.5, 2.0), (15.0, 0.0), (22.5, 2.0)],
                },
                feedback: FeedbackConfig::slow(protocol.theta),
                duration_s: 30.0,
                ..base
            },
            Preset::ZeroNoise => ScenarioConfig {
                trajectory: NoiseTrajectory::zero(),
                ..base
            },
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown preset '{s}', expected fig3-top, fig3-bottom or zero-noise"))
    }
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Preset::Fig3Top.config()
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), Error> {
        self.protocol.validate()?;
        self.trajectory.validate()?;
        self.feedback.validate()?;
        if self.feedback.theta != self.protocol.theta {
            return Err(Error::Domain {
                name: "feedback theta",
                bound: "equal to protocol theta",
                value: self.feedback.theta,
            });
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::Domain {
                name: "duration_s",
                bound: "(0, ∞)",
                value: self.duration_s,
            });
        }
        if self.replicas < 1 {
            return Err(Error::Domain {
                name: "replicas",
                bound: "[1, ∞)",
                value: self.replicas as f64,
            });
        }
        if self.output.events_decimation < 1 {
            return Err(Error::Domain {
                name: "events_decimation",
                bound: "[1, ∞)",
                value: self.output.events_decimation as f64,
            });
        }
        Ok(())
    }

    /// Seed of replica `i`.
    pub fn replica_seed(&self, i: u32) -> u64 {
        self.seed.wrapping_add(i as u64)
    }
}

const KEYS: &[(&str, &str)] = &[
    ("theta", "protocol"),
    ("trigger_rate_hz", "protocol"),
    ("mu", "protocol"),
    ("eta_b", "protocol"),
    ("eta_c", "protocol"),
    ("kind", "trajectory"),
    ("offset", "trajectory"),
    ("rate", "trajectory"),
    ("at", "trajectory"),
    ("amplitude", "trajectory"),
    ("initial", "trajectory"),
    ("schedule", "trajectory"),
    ("mode", "feedback"),
    ("window", "feedback"),
    ("grid_resolution", "feedback"),
    ("max_kick", "feedback"),
    ("fast_basis", "feedback"),
    ("duration_s", "run"),
    ("seed", "run"),
    ("replicas", "run"),
    ("out_dir", "output"),
    ("events_csv", "output"),
    ("events_decimation", "output"),
];

/// Parses configuration text on top of the `fig3-top` defaults.
pub fn load_config(text: &str) -> Result<ScenarioConfig, HarnessError> {
    load_config_with_base(text, ScenarioConfig::default())
}

/// Parses configuration text on top of `base`.
pub fn load_config_with_base(text: &str, base: ScenarioConfig) -> Result<ScenarioConfig, HarnessError> {
    let entries = tokenize(text)?;
    resolve(&entries, base)
}

struct Entry {
    line: usize,
    value: String,
}

fn tokenize(text: &str) -> Result<HashMap<&'static str, Entry>, HarnessError> {
    let mut section: Option<String> = None;
    let mut out: HashMap<&'static str, Entry> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| HarnessError::Parse {
                line,
                message: format!("unterminated section header '{content}'"),
            })?;
            let name = name.trim();
            if !KEYS.iter().any(|(_, s)| *s == name) {
                return Err(HarnessError::Parse {
                    line,
                    message: format!("unknown section [{name}]"),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| HarnessError::Parse {
            line,
            message: format!("expected 'key = value', got '{content}'"),
        })?;
        let key = key.trim();
        let &(key, home) = KEYS.iter().find(|(k, _)| *k == key).ok_or_else(|| HarnessError::Parse {
            line,
            message: format!("unknown key '{key}'"),
        })?;
        if let Some(s) = &section {
            if s != home {
                return Err(HarnessError::Parse {
                    line,
                    message: format!("key '{key}' belongs in [{home}], not [{s}]"),
                });
            }
        }
        if let Some(prev) = out.get(key) {
            return Err(HarnessError::Parse {
                line,
                message: format!("duplicate key '{key}' (first set on line {})", prev.line),
            });
        }
        out.insert(
            key,
            Entry {
                line,
                value: value.trim().to_string(),
            },
        );
    }
    Ok(out)
}

/// Parses a number or a multiple of π (`pi`, `pi/3`, `-2*pi/3`, `0.5pi`).
pub fn parse_angle(s: &str) -> Option<f64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let (pre, post) = s.split_once("pi")?;
    let pre = pre.strip_suffix('*').unwrap_or(pre);
    let factor = match pre {
        "" | "+" => 1.0,
        "-" => -1.0,
        p => p.parse::<f64>().ok()?,
    };
    let divisor = match post {
        "" => 1.0,
        d => d.strip_prefix('/')?.parse::<f64>().ok()?,
    };
    Some(factor * PI / divisor)
}

fn resolve(entries: &HashMap<&'static str, Entry>, base: ScenarioConfig) -> Result<ScenarioConfig, HarnessError> {
    let bad = |key: &str, what: &str| {
        let e = &entries[key];
        HarnessError::Parse {
            line: e.line,
            message: format!("{key}: expected {what}, got '{}'", e.value),
        }
    };
    let angle = |key: &str| -> Result<Option<f64>, HarnessError> {
        entries
            .get(key)
            .map(|e| parse_angle(&e.value).ok_or_else(|| bad(key, "a number or multiple of pi")))
            .transpose()
    };
    let number = |key: &str| -> Result<Option<f64>, HarnessError> {
        entries
            .get(key)
            .map(|e| e.value.parse::<f64>().map_err(|_| bad(key, "a number")))
            .transpose()
    };
    let integer = |key: &str| -> Result<Option<u64>, HarnessError> {
        entries
            .get(key)
            .map(|e| {
                e.value
                    .replace('_', "")
                    .parse::<u64>()
                    .or_else(|_| {
                        // Allow 5e3-style literals when they are whole numbers.
                        e.value
                            .parse::<f64>()
                            .ok()
                            .filter(|v| v.fract() == 0.0 && *v >= 0.0 && *v <= u64::MAX as f64)
                            .map(|v| v as u64)
                            .ok_or(())
                    })
                    .map_err(|_| bad(key, "a non-negative integer"))
            })
            .transpose()
    };
    let text = |key: &str| entries.get(key).map(|e| e.value.as_str());

    let mut cfg = base;

    if let Some(v) = angle("theta")? {
        cfg.protocol.theta = v;
    }
    if let Some(v) = number("trigger_rate_hz")? {
        cfg.protocol.trigger_rate_hz = v;
    }
    if let Some(v) = number("mu")? {
        cfg.protocol.mu = v;
    }
    if let Some(v) = number("eta_b")? {
        cfg.protocol.eta_b = v;
    }
    if let Some(v) = number("eta_c")? {
        cfg.protocol.eta_c = v;
    }

    let traj_keys = ["kind", "offset", "rate", "at", "amplitude", "initial", "schedule"];
    if traj_keys.iter().any(|k| entries.contains_key(k)) {
        let kind = match text("kind") {
            Some(k) => k.to_string(),
            None => match &cfg.trajectory {
                NoiseTrajectory::Constant { .. } => "constant",
                NoiseTrajectory::Linear { .. } => "linear",
                NoiseTrajectory::Step { .. } => "step",
                NoiseTrajectory::Piecewise { .. } => "piecewise",
            }
            .to_string(),
        };
        let (b_offset, b_rate, b_at, b_amp, b_initial, b_schedule) = match &cfg.trajectory {
            NoiseTrajectory::Constant { offset } => (*offset, 0.0, 0.0, 0.0, *offset, Vec::new()),
            NoiseTrajectory::Linear { offset, rate } => (*offset, *rate, 0.0, 0.0, *offset, Vec::new()),
            NoiseTrajectory::Step { offset, at, amplitude } => (*offset, 0.0, *at, *amplitude, *offset, Vec::new()),
            NoiseTrajectory::Piecewise { initial, schedule } => (*initial, 0.0, 0.0, 0.0, *initial, schedule.clone()),
        };
        let offset = angle("offset")?.unwrap_or(b_offset);
        cfg.trajectory = match kind.as_str() {
            "constant" => NoiseTrajectory::Constant { offset },
            "linear" => NoiseTrajectory::Linear {
                offset,
                rate: number("rate")?.unwrap_or(b_rate),
            },
            "step" => NoiseTrajectory::Step {
                offset,
                at: number("at")?.unwrap_or(b_at),
                amplitude: angle("amplitude")?.unwrap_or(b_amp),
            },
            "piecewise" => NoiseTrajectory::Piecewise {
                initial: angle("initial")?.unwrap_or(b_initial),
                schedule: match text("schedule") {
                    Some(s) => parse_schedule(s).ok_or_else(|| bad("schedule", "'time:value' pairs separated by commas"))?,
                    None => b_schedule,
                },
            },
            _ => return Err(bad("kind", "constant, linear, step or piecewise")),
        };
    }

    if let Some(m) = text("mode") {
        let mode = match m {
            "fast" => FeedbackMode::Fast,
            "slow" => FeedbackMode::Slow,
            _ => return Err(bad("mode", "fast or slow")),
        };
        if mode != cfg.feedback.mode {
            cfg.feedback.window = match mode {
                FeedbackMode::Fast => DEFAULT_FAST_WINDOW,
                FeedbackMode::Slow => DEFAULT_SLOW_WINDOW,
            };
        }
        cfg.feedback.mode = mode;
    }
    if let Some(v) = integer("window")? {
        cfg.feedback.window = v;
    }
    if let Some(v) = angle("grid_resolution")? {
        cfg.feedback.grid_resolution = v;
    }
    if let Some(v) = text("max_kick") {
        cfg.feedback.max_kick = match v {
            "none" | "off" => None,
            _ => Some(parse_angle(v).ok_or_else(|| bad("max_kick", "an angle or 'none'"))?),
        };
    }
    if let Some(v) = text("fast_basis") {
        cfg.feedback.fast_basis = match v {
            "r0" => FastBasis::R0,
            "r1" => FastBasis::R1,
            "average" => FastBasis::Average,
            _ => return Err(bad("fast_basis", "r0, r1 or average")),
        };
    }
    cfg.feedback.theta = cfg.protocol.theta;

    if let Some(v) = number("duration_s")? {
        cfg.duration_s = v;
    }
    if let Some(v) = integer("seed")? {
        cfg.seed = v;
    }
    if let Some(v) = integer("replicas")? {
        cfg.replicas = u32::try_from(v).map_err(|_| bad("replicas", "an integer below 2^32"))?;
    }
    if let Some(v) = text("out_dir") {
        cfg.output.out_dir = Some(PathBuf::from(v));
    }
    if let Some(v) = text("events_csv") {
        cfg.output.events_csv = match v {
            "true" | "yes" | "1" => true,
            "false" | "no" | "0" => false,
            _ => return Err(bad("events_csv", "true or false")),
        };
    }
    if let Some(v) = integer("events_decimation")? {
        cfg.output.events_decimation = v;
    }

    cfg.validate().map_err(HarnessError::Validation)?;
    Ok(cfg)
}

fn parse_schedule(s: &str) -> Option<Vec<(f64, f64)>> {
    if s.trim().is_empty() {
        return Some(Vec::new());
    }
    s.split(',')
        .map(|pair| {
            let (t, v) = pair.split_once(':')?;
            Some((t.trim().parse::<f64>().ok()?, parse_angle(v)?))
        })
        .collect()
}
