//! Drift estimation from Bob's own tallies and the kick controller.
//!
//! The control function `R_k(θ, ε)` is the ratio of inconclusive to
//! conclusive probabilities in basis `B_k`. It does not depend on the
//! transmission, so Bob can compare the ratio he observes over a window
//! with its zero-drift value and infer the misalignment.
//!
//! Two estimators are provided:
//!
//! * **fast**: inverts the tangent of `R_0` at ε = 0. Valid only close to
//!   zero, where `R_0` is monotone.
//! * **slow**: matches both observed ratios jointly by minimizing
//!   `|R_0(ε) − R_0*| + |R_1(ε) − R_1*|` over (−π, π]. The pair of ratios is
//!   injective in ε, a single ratio is not.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::channel::{Observation, Outcome};
use crate::error::{check_theta, Error, Result};
use crate::quantum::Bit;
use crate::wrap_angle;

const DENOMINATOR_FLOOR: f64 = 1e-15;

#[inline]
fn ratio_parts(k: Bit, theta: f64, eps: f64) -> (f64, f64) {
    let sign = if k & 1 == 0 { 1.0 } else { -1.0 };
    let s = eps.cos() + (2.0 * theta - sign * eps).cos();
    (2.0 + s, 2.0 - s)
}

#[inline]
fn ratio_unchecked(k: Bit, theta: f64, eps: f64) -> f64 {
    let (num, den) = ratio_parts(k, theta, eps);
    num / den
}

/// `R_k(θ, ε) = {2 + cos ε + cos[2θ − (−1)^k ε]} / {2 − cos ε − cos[2θ − (−1)^k ε]}`
pub fn control_function(k: Bit, theta: f64, eps: f64) -> Result<f64> {
    check_theta(theta)?;
    let (num, den) = ratio_parts(k, theta, eps);
    if den <= DENOMINATOR_FLOOR {
        return Err(Error::DegenerateRatio(den));
    }
    Ok(num / den)
}

/// `dR_0/dε` at ε = 0, equal to `4 sin 2θ / (1 − cos 2θ)²`.
pub fn control_slope_at_zero(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let d = 1.0 - (2.0 * theta).cos();
    Ok(4.0 * (2.0 * theta).sin() / (d * d))
}

/// Open interval of ε on which `R_0(θ, ·)` is strictly increasing.
///
/// `R_0` grows with `cos ε + cos(2θ − ε)`, whose derivative vanishes at
/// ε = θ and ε = θ − π, so the interval is `(θ − π, θ)`. `R_1` is its mirror
/// image.
pub fn monotone_interval(theta: f64) -> (f64, f64) {
    (theta - PI, theta)
}

/// Per-basis conclusive and inconclusive tallies over a window.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ControlEstimate {
    pub n_con: [u64; 2],
    pub n_inc: [u64; 2],
}

impl ControlEstimate {
    /// Counts one event; vacuum is ignored.
    pub fn record(&mut self, basis: Bit, outcome: Outcome) {
        let b = (basis & 1) as usize;
        match outcome {
            Outcome::Conclusive => self.n_con[b] += 1,
            Outcome::Inconclusive => self.n_inc[b] += 1,
            Outcome::Vacuum => {}
        }
    }

    pub fn total(&self) -> u64 {
        self.n_con.iter().chain(self.n_inc.iter()).sum()
    }

    /// Observed `R_k* = n_inc[k] / n_con[k]`, undefined without conclusive counts.
    pub fn ratio(&self, k: Bit) -> Option<f64> {
        let b = (k & 1) as usize;
        (self.n_con[b] > 0).then(|| self.n_inc[b] as f64 / self.n_con[b] as f64)
    }

    fn ratio_or_abstain(&self, k: Bit) -> Result<f64> {
        self.ratio(k).ok_or(Error::Abstain { basis: k & 1 })
    }
}

/// Tangent inversion of `R_k` around the zero-drift setpoint for a single basis.
fn tangent_estimate(r_star: f64, k: Bit, theta: f64) -> Result<f64> {
    let setpoint = control_function(k, theta, 0.0)?;
    let slope = control_slope_at_zero(theta)?;
    // R_1(θ, ε) = R_0(θ, −ε): the basis-1 tangent has the opposite sign.
    let slope = if k & 1 == 0 { slope } else { -slope };
    Ok((r_star - setpoint) / slope)
}

/// Fast estimate from basis 0: `(R_0* − R_0(θ, 0)) / R_0'(θ, 0)`.
pub fn estimate_fast(est: &ControlEstimate, theta: f64) -> Result<f64> {
    estimate_fast_from_ratio(est.ratio_or_abstain(0)?, theta)
}

/// Tangent inversion of an observed basis-0 ratio.
pub fn estimate_fast_from_ratio(r0_star: f64, theta: f64) -> Result<f64> {
    tangent_estimate(r0_star, 0, theta)
}

/// Which tallies drive the fast estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FastBasis {
    #[default]
    R0,
    R1,
    /// Mean of the two single-basis tangent estimates.
    Average,
}

/// Fast estimate using the configured basis.
pub fn estimate_fast_with(est: &ControlEstimate, theta: f64, basis: FastBasis) -> Result<f64> {
    match basis {
        FastBasis::R0 => estimate_fast(est, theta),
        FastBasis::R1 => tangent_estimate(est.ratio_or_abstain(1)?, 1, theta),
        FastBasis::Average => {
            let a = tangent_estimate(est.ratio_or_abstain(0)?, 0, theta)?;
            let b = tangent_estimate(est.ratio_or_abstain(1)?, 1, theta)?;
            Ok(0.5 * (a + b))
        }
    }
}

/// Tabulated control functions for the joint two-ratio inversion.
///
/// The grid is `{i · resolution}` restricted to (−π, π], so it always
/// contains ε = 0.
#[derive(Debug, Clone)]
pub struct SlowInverter {
    theta: f64,
    resolution: f64,
    grid: Vec<f64>,
    r0: Vec<f64>,
    r1: Vec<f64>,
}

impl SlowInverter {
    pub fn new(theta: f64, resolution: f64) -> Result<Self> {
        check_theta(theta)?;
        if !(resolution.is_finite() && resolution > 0.0 && resolution < PI) {
            return Err(Error::Domain {
                name: "grid_resolution",
                bound: "(0, π)",
                value: resolution,
            });
        }
        let m = (PI / resolution).floor() as i64;
        let grid: Vec<f64> = (-m..=m)
            .map(|i| i as f64 * resolution)
            .filter(|&e| e > -PI && e <= PI)
            .collect();
        let r0 = grid.iter().map(|&e| ratio_unchecked(0, theta, e)).collect();
        let r1 = grid.iter().map(|&e| ratio_unchecked(1, theta, e)).collect();
        Ok(Self {
            theta,
            resolution,
            grid,
            r0,
            r1,
        })
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    fn objective(&self, eps: f64, r0_star: f64, r1_star: f64) -> f64 {
        (ratio_unchecked(0, self.theta, eps) - r0_star).abs() + (ratio_unchecked(1, self.theta, eps) - r1_star).abs()
    }

    /// Joint inversion of an observed ratio pair.
    pub fn invert(&self, r0_star: f64, r1_star: f64) -> f64 {
        let mut best = 0usize;
        let mut best_val = f64::INFINITY;
        for (i, &e) in self.grid.iter().enumerate() {
            let v = (self.r0[i] - r0_star).abs() + (self.r1[i] - r1_star).abs();
            if v < best_val || (v == best_val && e.abs() < self.grid[best].abs()) {
                best = i;
                best_val = v;
            }
        }
        let center = self.grid[best];
        let refined = golden_section(
            |e| self.objective(e, r0_star, r1_star),
            center - self.resolution,
            center + self.resolution,
            1e-3 * self.resolution,
        );
        if self.objective(refined, r0_star, r1_star) < best_val {
            wrap_angle(refined)
        } else {
            center
        }
    }

    pub fn estimate(&self, est: &ControlEstimate) -> Result<f64> {
        let r0 = est.ratio_or_abstain(0)?;
        let r1 = est.ratio_or_abstain(1)?;
        Ok(self.invert(r0, r1))
    }
}

/// Golden-section search for the minimum of a unimodal function on `[a, b]`.
fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Slow estimate: grid scan over (−π, π] at `resolution`, then a
/// golden-section refinement inside the winning cell. Ties on the grid go to
/// the smallest |ε|.
pub fn estimate_slow(est: &ControlEstimate, theta: f64, resolution: f64) -> Result<f64> {
    // Check the tallies first so an empty window abstains without building a table.
    est.ratio_or_abstain(0)?;
    est.ratio_or_abstain(1)?;
    SlowInverter::new(theta, resolution)?.estimate(est)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeedbackMode {
    Fast,
    Slow,
}

impl FeedbackMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            FeedbackMode::Fast => "fast",
            FeedbackMode::Slow => "slow",
        }
    }
}

/// Controller settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackConfig {
    pub mode: FeedbackMode,
    /// Non-vacuum events per kick.
    pub window: u64,
    pub theta: f64,
    /// Grid step of the slow estimator, radians.
    pub grid_resolution: f64,
    /// Optional clamp on fast-mode kicks, radians.
    pub max_kick: Option<f64>,
    pub fast_basis: FastBasis,
}

pub const DEFAULT_FAST_WINDOW: u64 = 5_000;
pub const DEFAULT_SLOW_WINDOW: u64 = 1_000;
pub const DEFAULT_GRID_RESOLUTION: f64 = 1e-3;

impl FeedbackConfig {
    pub fn fast(theta: f64) -> Self {
        Self {
            mode: FeedbackMode::Fast,
            window: DEFAULT_FAST_WINDOW,
            theta,
            grid_resolution: DEFAULT_GRID_RESOLUTION,
            max_kick: None,
            fast_basis: FastBasis::R0,
        }
    }

    pub fn slow(theta: f64) -> Self {
        Self {
            mode: FeedbackMode::Slow,
            window: DEFAULT_SLOW_WINDOW,
            ..Self::fast(theta)
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_theta(self.theta)?;
        if self.window < 1 {
            return Err(Error::Domain {
                name: "window",
                bound: "[1, ∞)",
                value: self.window as f64,
            });
        }
        if !(self.grid_resolution.is_finite() && self.grid_resolution > 0.0 && self.grid_resolution < PI) {
            return Err(Error::Domain {
                name: "grid_resolution",
                bound: "(0, π)",
                value: self.grid_resolution,
            });
        }
        if let Some(m) = self.max_kick {
            if !(m.is_finite() && m > 0.0) {
                return Err(Error::Domain {
                    name: "max_kick",
                    bound: "(0, ∞)",
                    value: m,
                });
            }
        }
        Ok(())
    }
}

/// One completed counting window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KickRecord {
    pub kick_index: u64,
    /// Time of the event that closed the window.
    pub time_s: f64,
    /// Time of the first event counted in the window.
    pub window_start_s: f64,
    pub window_events: u64,
    pub r0_star: Option<f64>,
    pub r1_star: Option<f64>,
    /// `None` when the estimator abstained.
    pub eps_hat: Option<f64>,
    pub correction_before: f64,
    pub applied_correction: f64,
    pub abstained: bool,
}

/// Anything that can steer Bob's modulator from the observations it is shown.
///
/// Observations carry only Bob's basis, the outcome class and the time, so
/// implementations cannot read Alice's bits or the true channel angle.
pub trait Controller {
    /// Current modulator offset, radians.
    fn correction(&self) -> f64;

    /// Feeds one observation; returns a record when a window closes.
    fn offer(&mut self, obs: Observation) -> Option<KickRecord>;
}

/// Windowed kick controller running the fast or slow estimator.
#[derive(Debug, Clone)]
pub struct FeedbackController {
    config: FeedbackConfig,
    inverter: Option<SlowInverter>,
    applied_correction: f64,
    window: ControlEstimate,
    window_start_s: Option<f64>,
    history: Vec<KickRecord>,
}

impl FeedbackController {
    pub fn new(config: FeedbackConfig) -> Result<Self> {
        config.validate()?;
        let inverter = match config.mode {
            FeedbackMode::Slow => Some(SlowInverter::new(config.theta, config.grid_resolution)?),
            FeedbackMode::Fast => None,
        };
        Ok(Self {
            config,
            inverter,
            applied_correction: 0.0,
            window: ControlEstimate::default(),
            window_start_s: None,
            history: Vec::new(),
        })
    }

    pub fn config(&self) -> &FeedbackConfig {
        &self.config
    }

    /// Tallies of the window in progress.
    pub fn pending(&self) -> &ControlEstimate {
        &self.window
    }

    pub fn history(&self) -> &[KickRecord] {
        &self.history
    }

    fn estimate(&self) -> Result<f64> {
        match (&self.inverter, self.config.mode) {
            (Some(inv), FeedbackMode::Slow) => inv.estimate(&self.window),
            _ => {
                let e = estimate_fast_with(&self.window, self.config.theta, self.config.fast_basis)?;
                Ok(match self.config.max_kick {
                    Some(m) => e.clamp(-m, m),
                    None => e,
                })
            }
        }
    }

    /// Counts the event and, when the window is full, computes the kick.
    pub fn offer_event(&mut self, time_s: f64, basis: Bit, outcome: Outcome) -> Option<KickRecord> {
        if outcome == Outcome::Vacuum {
            return None;
        }
        self.window.record(basis, outcome);
        let window_start_s = *self.window_start_s.get_or_insert(time_s);
        let window_events = self.window.total();
        if window_events < self.config.window {
            return None;
        }

        let correction_before = self.applied_correction;
        let eps_hat = match self.estimate() {
            Ok(e) => Some(e),
            Err(Error::Abstain { .. }) => None,
            Err(e) => unreachable!("configuration was validated: {e}"),
        };
        if let Some(e) = eps_hat {
            self.applied_correction = wrap_angle(self.applied_correction + e);
        }
        let record = KickRecord {
            kick_index: self.history.len() as u64,
            time_s,
            window_start_s,
            window_events,
            r0_star: self.window.ratio(0),
            r1_star: self.window.ratio(1),
            eps_hat,
            correction_before,
            applied_correction: self.applied_correction,
            abstained: eps_hat.is_none(),
        };
        self.window = ControlEstimate::default();
        self.window_start_s = None;
        self.history.push(record);
        Some(record)
    }
}

impl Controller for FeedbackController {
    fn correction(&self) -> f64 {
        self.applied_correction
    }

    fn offer(&mut self, obs: Observation) -> Option<KickRecord> {
        self.offer_event(obs.time_s, obs.bob_basis, obs.outcome)
    }
}
