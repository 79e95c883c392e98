use rayon::prelude::*;

use super::stats::{mean_std, residual_stats, step_recovery, ExclusionPolicy, ReplicaSummary, ResidualSeries, RunSummary};
use super::{HarnessError, ScenarioConfig};
use crate::channel::{run_transmission, EventRecording, TransmissionLog};
use crate::error::Error;
use crate::feedback::FeedbackController;

/// One seeded replica with its logs and residuals.
#[derive(Debug, Clone)]
pub struct ReplicaRun {
    pub replica: u32,
    pub seed: u64,
    pub log: TransmissionLog,
    pub series: ResidualSeries,
}

impl ReplicaRun {
    fn summary(&self, config: &ScenarioConfig) -> ReplicaSummary {
        ReplicaSummary {
            replica: self.replica,
            seed: self.seed,
            residual_mean: self.series.mean,
            residual_std: self.series.std,
            kick_count: self.series.kick_count,
            abstain_count: self.series.abstain_count,
            excluded_count: self.series.excluded_count,
            pulses: self.log.pulses,
            clicks: self.log.clicks,
            bit_errors: self.log.bit_errors,
            step_recovery: step_recovery(&self.log.kicks, &config.trajectory),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub summary: RunSummary,
    pub replicas: Vec<ReplicaRun>,
}

fn run_replica(config: &ScenarioConfig, replica: u32, policy: ExclusionPolicy) -> Result<ReplicaRun, Error> {
    let seed = config.replica_seed(replica);
    let mut controller = FeedbackController::new(config.feedback)?;
    let recording = if config.output.events_csv {
        EventRecording::Every(config.output.events_decimation)
    } else {
        EventRecording::None
    };
    let log = run_transmission(
        &config.protocol,
        &config.trajectory,
        &mut controller,
        config.duration_s,
        seed,
        recording,
    )?;
    let series = residual_stats(&log.kicks, &config.trajectory, policy)?;
    Ok(ReplicaRun {
        replica,
        seed,
        log,
        series,
    })
}

/// Runs every replica (in parallel, replica `i` seeded with `seed + i`) and
/// pools the residuals. Results do not depend on execution order.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioRun, HarnessError> {
    config.validate().map_err(HarnessError::Validation)?;
    let policy = ExclusionPolicy::StepWindows;
    let replicas = (0..config.replicas)
        .into_par_iter()
        .map(|i| run_replica(config, i, policy))
        .collect::<Result<Vec<_>, _>>()?;

    let pooled: Vec<f64> = replicas.iter().flat_map(|r| r.series.retained()).collect();
    let (residual_mean, residual_std) = mean_std(&pooled);
    let summary = RunSummary {
        residual_mean,
        residual_std,
        kick_count: replicas.iter().map(|r| r.series.kick_count).sum(),
        abstain_count: replicas.iter().map(|r| r.series.abstain_count).sum(),
        excluded_count: replicas.iter().map(|r| r.series.excluded_count).sum(),
        exclusion: policy,
        replicas: replicas.iter().map(|r| r.summary(config)).collect(),
    };
    Ok(ScenarioRun {
        config: config.clone(),
        summary,
        replicas,
    })
}
