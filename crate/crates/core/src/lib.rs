//! Simulation and control library for the B92 key distribution protocol
//! running over a channel whose phase reference drifts in time.
//!
//! Two nonorthogonal signal states give Bob an asymmetric mixture of
//! conclusive and inconclusive outcomes. The ratio of the two tallies in
//! each measurement basis is a function of the misalignment angle only, so
//! Bob can estimate the drift from his own counts and re-zero his phase
//! modulator without reference pulses or public discussion.
//!
//! * [`quantum`]: signal states, the drift rotation and exact outcome probabilities.
//! * [`channel`]: seeded per-pulse Monte Carlo over a noise trajectory.
//! * [`feedback`]: control functions, fast/slow estimators and the kick controller.
//! * [`security`]: error and conclusive rates, binary entropy and secure gain.
//! * [`harness`]: scenario configuration, replica runner, residual statistics and outputs.

pub mod channel;
pub mod error;
pub mod feedback;
pub mod harness;
pub mod quantum;
pub mod security;

pub use channel::{
    run_transmission, simulate_pulse, DetectionEvent, NoOpController, NoiseTrajectory, Observation,
    Outcome, TransmissionLog,
};
pub use error::{Error, Result};
pub use feedback::{
    control_function, control_slope_at_zero, estimate_fast, estimate_slow, ControlEstimate,
    Controller, FastBasis, FeedbackConfig, FeedbackController, FeedbackMode, KickRecord,
};
pub use quantum::{ProtocolParams, StateVector};
pub use security::{
    binary_entropy, estimate_rates_from_eps, gain_threshold, secure_gain, BuiltinBound, ObservedRates,
    PhaseErrorBound, SecurityRates,
};

use std::f64::consts::{PI, TAU};

/// Wraps an angle onto the half-open interval (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}
