//! Seeded Monte Carlo of the quantum link.
//!
//! Each trigger either produces no usable click (probability `1 − η`) or a
//! click whose class is drawn by the Born rule for the prepared state, the
//! basis Bob picked and the residual misalignment left after his current
//! modulator correction. Only clicks are materialized: the gaps between
//! them are drawn from a geometric distribution, which is exact for
//! independent Bernoulli(η) triggers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feedback::{Controller, KickRecord};
use crate::quantum::{drifted_state, orthogonal_state, Bit, ProtocolParams};
use crate::wrap_angle;

/// Deterministic true misalignment of the channel as a function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseTrajectory {
    Constant { offset: f64 },
    Linear { offset: f64, rate: f64 },
    /// `offset` before `at`, `offset + amplitude` from `at` on.
    Step { offset: f64, at: f64, amplitude: f64 },
    /// Piecewise constant: `initial`, then each `(time, value)` from `time` on.
    Piecewise { initial: f64, schedule: Vec<(f64, f64)> },
}

impl NoiseTrajectory {
    pub fn zero() -> Self {
        NoiseTrajectory::Constant { offset: 0.0 }
    }

    /// True misalignment at time `t`, wrapped to (−π, π].
    pub fn eval(&self, t: f64) -> f64 {
        let raw = match self {
            NoiseTrajectory::Constant { offset } => *offset,
            NoiseTrajectory::Linear { offset, rate } => offset + rate * t,
            NoiseTrajectory::Step { offset, at, amplitude } => {
                if t >= *at {
                    offset + amplitude
                } else {
                    *offset
                }
            }
            NoiseTrajectory::Piecewise { initial, schedule } => schedule
                .iter()
                .take_while(|(time, _)| *time <= t)
                .last()
                .map_or(*initial, |&(_, v)| v),
        };
        wrap_angle(raw)
    }

    /// Times at which the trajectory jumps.
    pub fn discontinuities(&self) -> Vec<f64> {
        match self {
            NoiseTrajectory::Step { at, .. } => vec![*at],
            NoiseTrajectory::Piecewise { schedule, .. } => schedule.iter().map(|&(t, _)| t).collect(),
            _ => Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &'static str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain {
                    name,
                    bound: "finite reals",
                    value: v,
                })
            }
        };
        match self {
            NoiseTrajectory::Constant { offset } => finite("offset", *offset),
            NoiseTrajectory::Linear { offset, rate } => {
                finite("offset", *offset)?;
                finite("rate", *rate)
            }
            NoiseTrajectory::Step { offset, at, amplitude } => {
                finite("offset", *offset)?;
                finite("amplitude", *amplitude)?;
                if !(at.is_finite() && *at >= 0.0) {
                    return Err(Error::Domain {
                        name: "step time",
                        bound: "[0, ∞)",
                        value: *at,
                    });
                }
                Ok(())
            }
            NoiseTrajectory::Piecewise { initial, schedule } => {
                finite("initial", *initial)?;
                let mut prev = f64::NEG_INFINITY;
                for &(t, v) in schedule {
                    finite("step value", v)?;
                    if !(t.is_finite() && t >= 0.0 && t > prev) {
                        return Err(Error::Domain {
                            name: "step time",
                            bound: "strictly increasing non-negative times",
                            value: t,
                        });
                    }
                    prev = t;
                }
                Ok(())
            }
        }
    }
}

/// Outcome class of one trigger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Vacuum,
    Conclusive,
    Inconclusive,
}

impl Outcome {
    pub fn as_str(&self) -> &'static str {
        match self {
            Outcome::Vacuum => "vacuum",
            Outcome::Conclusive => "conclusive",
            Outcome::Inconclusive => "inconclusive",
        }
    }
}

/// Everything Bob's controller is allowed to see about a trigger.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub time_s: f64,
    pub bob_basis: Bit,
    pub outcome: Outcome,
}

/// Outcome of a single trigger before it is placed in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PulseDraw {
    pub alice_bit: Bit,
    pub bob_basis: Bit,
    pub outcome: Outcome,
}

impl PulseDraw {
    /// A conclusive result in basis k decodes bit `k ⊕ 1`.
    pub fn is_bit_error(&self) -> bool {
        self.outcome == Outcome::Conclusive && (self.bob_basis ^ 1) != self.alice_bit
    }
}

/// Full record of one trigger. `true_eps` and `alice_bit` are ground truth
/// for analysis and never reach the controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionEvent {
    pub pulse_index: u64,
    pub time_s: f64,
    pub alice_bit: Bit,
    pub bob_basis: Bit,
    pub outcome: Outcome,
    pub true_eps: f64,
    /// Misalignment actually seen by the photon after Bob's correction.
    pub residual_eps: f64,
}

impl DetectionEvent {
    pub fn observation(&self) -> Observation {
        Observation {
            time_s: self.time_s,
            bob_basis: self.bob_basis,
            outcome: self.outcome,
        }
    }

    pub fn is_bit_error(&self) -> bool {
        PulseDraw {
            alice_bit: self.alice_bit,
            bob_basis: self.bob_basis,
            outcome: self.outcome,
        }
        .is_bit_error()
    }
}

/// Creates the simulation RNG for a seed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws the bit, the basis and the class of a click that is known to be
/// non-vacuum.
pub fn draw_click<R: Rng + ?Sized>(theta: f64, eps_effective: f64, rng: &mut R) -> PulseDraw {
    let alice_bit: Bit = rng.random_range(0..2u8);
    let bob_basis: Bit = rng.random_range(0..2u8);
    let received = drifted_state(alice_bit, theta, eps_effective);
    // theta has been validated by the caller, orthogonal_state cannot fail.
    let bar = orthogonal_state(bob_basis, theta).expect("validated theta");
    let p_con = bar.overlap(&received);
    let outcome = if rng.random::<f64>() < p_con {
        Outcome::Conclusive
    } else {
        Outcome::Inconclusive
    };
    PulseDraw {
        alice_bit,
        bob_basis,
        outcome,
    }
}

/// One trigger: vacuum with probability `1 − η`, otherwise a Born-rule click.
pub fn simulate_pulse<R: Rng + ?Sized>(params: &ProtocolParams, eps_effective: f64, rng: &mut R) -> PulseDraw {
    let eta = params.eta();
    if rng.random::<f64>() >= eta {
        let alice_bit = rng.random_range(0..2u8);
        let bob_basis = rng.random_range(0..2u8);
        return PulseDraw {
            alice_bit,
            bob_basis,
            outcome: Outcome::Vacuum,
        };
    }
    draw_click(params.theta, eps_effective, rng)
}

/// A controller that never corrects.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoOpController;

impl Controller for NoOpController {
    fn correction(&self) -> f64 {
        0.0
    }

    fn offer(&mut self, _obs: Observation) -> Option<KickRecord> {
        None
    }
}

/// Which events to keep in the log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EventRecording {
    #[default]
    None,
    /// Keep every n-th click (n ≥ 1).
    Every(u64),
}

/// Result of one transmission run.
#[derive(Debug, Clone, Default)]
pub struct TransmissionLog {
    /// Number of triggers fired.
    pub pulses: u64,
    /// Number of non-vacuum triggers.
    pub clicks: u64,
    pub conclusive: [u64; 2],
    pub inconclusive: [u64; 2],
    pub bit_errors: u64,
    /// Recorded clicks (decimated per [`EventRecording`]).
    pub events: Vec<DetectionEvent>,
    pub kicks: Vec<KickRecord>,
}

/// Runs `⌊f · duration⌋` triggers through the channel, feeding every click
/// to `controller` and applying its corrections to all later triggers.
pub fn run_transmission<C: Controller + ?Sized>(
    params: &ProtocolParams,
    trajectory: &NoiseTrajectory,
    controller: &mut C,
    duration_s: f64,
    seed: u64,
    recording: EventRecording,
) -> Result<TransmissionLog> {
    params.validate()?;
    trajectory.validate()?;
    if !(duration_s.is_finite() && duration_s > 0.0) {
        return Err(Error::Domain {
            name: "duration",
            bound: "(0, ∞)",
            value: duration_s,
        });
    }
    let f = params.trigger_rate_hz;
    let pulses = (f * duration_s).floor() as u64;
    let eta = params.eta();
    let gap = if eta < 1.0 {
        Some(Geometric::new(eta).expect("eta validated in (0, 1)"))
    } else {
        None
    };
    let keep_every = match recording {
        EventRecording::None => 0,
        EventRecording::Every(n) => n.max(1),
    };

    let mut rng = seeded_rng(seed);
    let mut log = TransmissionLog {
        pulses,
        ..Default::default()
    };
    let mut next: u64 = 0;
    loop {
        let skip = gap.as_ref().map_or(0, |g| g.sample(&mut rng));
        let Some(index) = next.checked_add(skip) else { break };
        if index >= pulses {
            break;
        }
        next = index + 1;

        let time_s = index as f64 / f;
        let true_eps = trajectory.eval(time_s);
        let residual_eps = wrap_angle(true_eps - controller.correction());
        let draw = draw_click(params.theta, residual_eps, &mut rng);

        let b = (draw.bob_basis & 1) as usize;
        match draw.outcome {
            Outcome::Conclusive => log.conclusive[b] += 1,
            Outcome::Inconclusive => log.inconclusive[b] += 1,
            Outcome::Vacuum => {}
        }
        if draw.is_bit_error() {
            log.bit_errors += 1;
        }
        let event = DetectionEvent {
            pulse_index: index,
            time_s,
            alice_bit: draw.alice_bit,
            bob_basis: draw.bob_basis,
            outcome: draw.outcome,
            true_eps,
            residual_eps,
        };
        if keep_every > 0 && log.clicks.is_multiple_of(keep_every) {
            log.events.push(event);
        }
        log.clicks += 1;

        if let Some(kick) = controller.offer(event.observation()) {
            log.kicks.push(kick);
        }
    }
    Ok(log)
}
