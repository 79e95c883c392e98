//! Residual misalignment statistics over a kick log.

use serde::{Deserialize, Serialize};

use crate::channel::NoiseTrajectory;
use crate::error::{Error, Result};
use crate::feedback::KickRecord;
use crate::wrap_angle;

/// Which kicks are left out of the statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionPolicy {
    /// Keep every kick.
    None,
    /// Drop the first kick at or after each trajectory discontinuity: its
    /// residual is the jump itself and its window straddles the step.
    #[default]
    StepWindows,
}

/// Ground truth for one kick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub true_eps: f64,
    /// `wrap(true ε at the kick − correction in force before the kick)`.
    pub residual: f64,
    pub excluded: bool,
}

/// Per-kick residuals with their summary.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    pub rows: Vec<ResidualRow>,
    pub mean: f64,
    pub std: f64,
    pub kick_count: u64,
    pub abstain_count: u64,
    pub excluded_count: u64,
}

impl ResidualSeries {
    pub fn retained(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().filter(|r| !r.excluded).map(|r| r.residual)
    }
}

/// Mean and sample standard deviation (zero for a single sample).
pub(crate) fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Residual at every kick and the statistics over the retained ones.
pub fn residual_stats(kicks: &[KickRecord], trajectory: &NoiseTrajectory, policy: ExclusionPolicy) -> Result<ResidualSeries> {
    if kicks.is_empty() {
        return Err(Error::EmptyLog);
    }
    let mut excluded = vec![false; kicks.len()];
    if policy == ExclusionPolicy::StepWindows {
        for t in trajectory.discontinuities() {
            if let Some(i) = kicks.iter().position(|k| k.time_s >= t) {
                excluded[i] = true;
            }
        }
    }
    let rows: Vec<ResidualRow> = kicks
        .iter()
        .zip(&excluded)
        .map(|(k, &excluded)| {
            let true_eps = trajectory.eval(k.time_s);
            ResidualRow {
                true_eps,
                residual: wrap_angle(true_eps - k.correction_before),
                excluded,
            }
        })
        .collect();
    let retained: Vec<f64> = rows.iter().filter(|r| !r.excluded).map(|r| r.residual).collect();
    if retained.is_empty() {
        return Err(Error::EmptyLog);
    }
    let (mean, std) = mean_std(&retained);
    Ok(ResidualSeries {
        mean,
        std,
        kick_count: kicks.len() as u64,
        abstain_count: kicks.iter().filter(|k| k.abstained).count() as u64,
        excluded_count: excluded.iter().filter(|&&e| e).count() as u64,
        rows,
    })
}

/// How well the controller caught up with one trajectory jump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecovery {
    pub step_time_s: f64,
    /// True misalignment after the jump.
    pub target: f64,
    /// Index of the first kick whose whole window follows the jump.
    pub kick_index: u64,
    /// Correction in force after that kick.
    pub correction_after: f64,
    /// `wrap(correction_after − target)`.
    pub error: f64,
}

/// For each discontinuity, the correction after the first kick whose
/// counting window opened at or after the jump. `None` entries are skipped
/// when the run ended before such a kick.
pub fn step_recovery(kicks: &[KickRecord], trajectory: &NoiseTrajectory) -> Vec<StepRecovery> {
    trajectory
        .discontinuities()
        .into_iter()
        .filter_map(|t| {
            let k = kicks.iter().find(|k| k.window_start_s >= t)?;
            let target = trajectory.eval(t);
            Some(StepRecovery {
                step_time_s: t,
                target,
                kick_index: k.kick_index,
                correction_after: k.applied_correction,
                error: wrap_angle(k.applied_correction - target),
            })
        })
        .collect()
}

/// Statistics of one replica.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicaSummary {
    pub replica: u32,
    pub seed: u64,
    pub residual_mean: f64,
    pub residual_std: f64,
    pub kick_count: u64,
    pub abstain_count: u64,
    pub excluded_count: u64,
    pub pulses: u64,
    pub clicks: u64,
    pub bit_errors: u64,
    pub step_recovery: Vec<StepRecovery>,
}

/// Pooled statistics over all replicas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub residual_mean: f64,
    pub residual_std: f64,
    pub kick_count: u64,
    pub abstain_count: u64,
    pub excluded_count: u64,
    pub exclusion: ExclusionPolicy,
    pub replicas: Vec<ReplicaSummary>,
}
