//! CSV and JSON outputs.
//!
//! Output directory layout:
//!
//! ```text
//! <out>/summary.json
//! <out>/kicks.csv            single replica
//! <out>/events.csv           single replica, only with events_csv = true
//! <out>/replica_<i>/kicks.csv, events.csv   when replicas > 1
//! ```
//!
//! Floats are written with Rust's shortest round-trip formatting; optional
//! values are empty cells. Files contain no timestamps, so a rerun with the
//! same configuration reproduces them byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::run::{ReplicaRun, ScenarioRun};
use super::stats::{ResidualRow, RunSummary};
use super::{HarnessError, ScenarioConfig};
use crate::channel::DetectionEvent;
use crate::feedback::{control_function, KickRecord};

pub const KICKS_CSV_HEADER: &str =
    "kick_index,time_s,window_events,r0_star,r1_star,eps_hat_rad,applied_correction_rad,abstained,true_eps_rad,residual_rad";

const EVENTS_CSV_HEADER: &str = "pulse_index,time_s,alice_bit,bob_basis,outcome,true_eps_rad,residual_eps_rad";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Renders the kick log joined with its ground-truth residuals.
pub fn kicks_csv(kicks: &[KickRecord], rows: &[ResidualRow]) -> String {
    let mut out = String::with_capacity(128 * (kicks.len() + 1));
    out.push_str(KICKS_CSV_HEADER);
    out.push('\n');
    for (k, r) in kicks.iter().zip(rows) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            k.kick_index,
            k.time_s,
            k.window_events,
            opt(k.r0_star),
            opt(k.r1_star),
            opt(k.eps_hat),
            k.applied_correction,
            k.abstained,
            r.true_eps,
            r.residual
        );
    }
    out
}

fn events_csv(events: &[DetectionEvent]) -> String {
    let mut out = String::with_capacity(64 * (events.len() + 1));
    out.push_str(EVENTS_CSV_HEADER);
    out.push('\n');
    for e in events {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            e.pulse_index,
            e.time_s,
            e.alice_bit,
            e.bob_basis,
            e.outcome.as_str(),
            e.true_eps,
            e.residual_eps
        );
    }
    out
}

/// Contents of `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub seed: u64,
    pub config: ScenarioConfig,
    pub summary: RunSummary,
}

/// Files written by [`emit_outputs`].
#[derive(Debug, Clone, Default)]
pub struct OutputPaths {
    pub summary: PathBuf,
    pub kicks: Vec<PathBuf>,
    pub events: Vec<PathBuf>,
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), HarnessError> {
    fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

fn replica_dir(out: &Path, run: &ScenarioRun, replica: &ReplicaRun) -> PathBuf {
    if run.replicas.len() == 1 {
        out.to_path_buf()
    } else {
        out.join(format!("replica_{}", replica.replica))
    }
}

/// Writes kicks CSVs, optional events CSVs and `summary.json` under `out`.
pub fn emit_outputs(run: &ScenarioRun, out: &Path) -> Result<OutputPaths, HarnessError> {
    fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let mut paths = OutputPaths::default();
    for replica in &run.replicas {
        let dir = replica_dir(out, run, replica);
        fs::create_dir_all(&dir).map_err(|e| HarnessError::io(&dir, e))?;
        let kicks = dir.join("kicks.csv");
        write_file(&kicks, kicks_csv(&replica.log.kicks, &replica.series.rows).as_bytes())?;
        paths.kicks.push(kicks);
        if run.config.output.events_csv {
            let events = dir.join("events.csv");
            write_file(&events, events_csv(&replica.log.events).as_bytes())?;
            paths.events.push(events);
        }
    }
    let summary = out.join("summary.json");
    let file = SummaryFile {
        seed: run.config.seed,
        config: run.config.clone(),
        summary: run.summary.clone(),
    };
    let mut json = serde_json::to_vec_pretty(&file).map_err(|e| HarnessError::Json {
        path: summary.clone(),
        source: e,
    })?;
    json.push(b'\n');
    write_file(&summary, &json)?;
    paths.summary = summary;
    Ok(paths)
}

pub fn load_summary(path: &Path) -> Result<SummaryFile, HarnessError> {
    let bytes = fs::read(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| HarnessError::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

/// One sample of a control-function curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub theta: f64,
    pub eps: f64,
    pub r0: f64,
    pub r1: f64,
}

/// Samples `R_0` and `R_1` on `points` equally spaced ε in [−π, π] for each θ.
pub fn control_curves(thetas: &[f64], points: usize) -> crate::Result<Vec<CurveRow>> {
    let points = points.max(2);
    let mut rows = Vec::with_capacity(thetas.len() * points);
    for &theta in thetas {
        for i in 0..points {
            let eps = -std::f64::consts::PI + std::f64::consts::TAU * i as f64 / (points - 1) as f64;
            rows.push(CurveRow {
                theta,
                eps,
                r0: control_function(0, theta, eps)?,
                r1: control_function(1, theta, eps)?,
            });
        }
    }
    Ok(rows)
}

pub fn write_curves_csv<W: Write>(rows: &[CurveRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "theta_rad,eps_rad,r0,r1")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.theta, r.eps, r.r0, r.r1)?;
    }
    Ok(())
}
