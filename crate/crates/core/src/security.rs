//! Error rates, binary entropy and the secure gain of B92 under phase drift.
//!
//! The bit-error and conclusive rates depend on the misalignment only, so
//! both can be evaluated from Bob's own drift estimate. The phase-error
//! bound needed for the gain is supplied through [`PhaseErrorBound`];
//! the optimized bound from the unconditional security analysis is not
//! reconstructed here.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_eta, check_theta, Error, Result};

/// Threshold reported for θ = π/3 with the optimized phase-error bound of
/// the full security proof. Kept for comparison only; the built-in bounds
/// do not reproduce it.
pub const OPTIMIZED_BOUND_THRESHOLD_RAD: f64 = 0.27646;

/// Absolute tolerance of [`gain_threshold`].
pub const THRESHOLD_TOLERANCE: f64 = 1e-5;

/// Bit-error rate per pulse, `η (1 − cos ε) / 4`. Independent of θ.
pub fn lambda_bit(eps: f64, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(eta * (1.0 - eps.cos()) / 4.0)
}

/// Conclusive-count rate per pulse, `η (1 − cos ε cos²θ) / 2`; the mean of
/// the two basis conclusive probabilities.
pub fn lambda_con(theta: f64, eps: f64, eta: f64) -> Result<f64> {
    check_theta(theta)?;
    check_eta(eta)?;
    let c = theta.cos();
    Ok(eta * (1.0 - eps.cos() * c * c) / 2.0)
}

/// Shannon binary entropy in bits, with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            name: "entropy argument",
            bound: "[0, 1]",
            value: x,
        });
    }
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(term(x) + term(1.0 - x))
}

/// Upper bound on the phase-error rate given the observed rates.
pub trait PhaseErrorBound {
    fn phase_error(&self, lambda_bit: f64, lambda_con: f64, theta: f64) -> f64;
}

impl<F> PhaseErrorBound for F
where
    F: Fn(f64, f64, f64) -> f64,
{
    fn phase_error(&self, lambda_bit: f64, lambda_con: f64, theta: f64) -> f64 {
        self(lambda_bit, lambda_con, theta)
    }
}

/// Bounds that need no external optimization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinBound {
    /// Phase errors equal bit errors.
    Naive,
    /// Phase bits carry no information: `max(Λ_bit, Λ_con / 2)`.
    WorstCase,
}

impl PhaseErrorBound for BuiltinBound {
    fn phase_error(&self, lambda_bit: f64, lambda_con: f64, _theta: f64) -> f64 {
        match self {
            BuiltinBound::Naive => lambda_bit,
            BuiltinBound::WorstCase => lambda_bit.max(0.5 * lambda_con),
        }
    }
}

impl std::str::FromStr for BuiltinBound {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "naive" => Ok(BuiltinBound::Naive),
            "worst-case" => Ok(BuiltinBound::WorstCase),
            other => Err(format!("unknown bound '{other}', expected naive or worst-case")),
        }
    }
}

/// `G = Λ_con [1 − h(Λ_bit/Λ_con) − h(Λ̄_ph/Λ_con)]`. May be negative.
pub fn secure_gain(lambda_bit: f64, lambda_con: f64, lambda_ph_bar: f64) -> Result<f64> {
    if lambda_con <= 0.0 {
        return Err(Error::UndefinedGain);
    }
    let hb = binary_entropy(lambda_bit / lambda_con)?;
    let hp = binary_entropy(lambda_ph_bar / lambda_con)?;
    Ok(lambda_con * (1.0 - hb - hp))
}

/// A full set of rates together with the resulting gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityRates {
    pub lambda_bit: f64,
    pub lambda_con: f64,
    pub lambda_ph_bar: f64,
    pub gain: f64,
}

impl SecurityRates {
    pub fn evaluate<B: PhaseErrorBound + ?Sized>(theta: f64, eps: f64, eta: f64, bound: &B) -> Result<Self> {
        estimate_rates_from_eps(eps, theta, eta)?.with_bound(theta, bound)
    }

    pub fn has_positive_gain(&self) -> bool {
        self.gain > 0.0
    }
}

/// Bit-error and conclusive rates without a phase-error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservedRates {
    pub lambda_bit: f64,
    pub lambda_con: f64,
}

impl ObservedRates {
    pub fn with_bound<B: PhaseErrorBound + ?Sized>(&self, theta: f64, bound: &B) -> Result<SecurityRates> {
        let lambda_ph_bar = bound.phase_error(self.lambda_bit, self.lambda_con, theta);
        let gain = secure_gain(self.lambda_bit, self.lambda_con, lambda_ph_bar)?;
        Ok(SecurityRates {
            lambda_bit: self.lambda_bit,
            lambda_con: self.lambda_con,
            lambda_ph_bar,
            gain,
        })
    }
}

/// Rates Bob can compute alone by plugging his drift estimate ε̂ into the
/// closed forms, with no data exchanged with Alice.
pub fn estimate_rates_from_eps(eps_hat: f64, theta: f64, eta: f64) -> Result<ObservedRates> {
    Ok(ObservedRates {
        lambda_bit: lambda_bit(eps_hat, eta)?,
        lambda_con: lambda_con(theta, eps_hat, eta)?,
    })
}

/// Secure gain at misalignment `eps`.
pub fn gain_at<B: PhaseErrorBound + ?Sized>(theta: f64, eps: f64, eta: f64, bound: &B) -> Result<f64> {
    Ok(SecurityRates::evaluate(theta, eps, eta, bound)?.gain)
}

pub fn has_positive_gain<B: PhaseErrorBound + ?Sized>(theta: f64, eps: f64, eta: f64, bound: &B) -> Result<bool> {
    Ok(gain_at(theta, eps, eta, bound)? > 0.0)
}

const THRESHOLD_SCAN_POINTS: usize = 4096;

/// Largest |ε| up to which the gain stays positive, at a given η.
///
/// The positive region around ε = 0 is bracketed by a scan of [0, π) and the
/// first sign change is bisected to [`THRESHOLD_TOLERANCE`]. Returns π when
/// the gain is positive over the whole scan.
pub fn gain_threshold_at_eta<B: PhaseErrorBound + ?Sized>(theta: f64, eta: f64, bound: &B) -> Result<f64> {
    let g = |e: f64| gain_at(theta, e, eta, bound);
    let g0 = g(0.0)?;
    if g0 <= 0.0 {
        return Err(Error::NoPositiveRegion(g0));
    }
    let step = PI / THRESHOLD_SCAN_POINTS as f64;
    let mut lo = 0.0;
    let mut hi = None;
    for i in 1..THRESHOLD_SCAN_POINTS {
        let e = i as f64 * step;
        if g(e)? <= 0.0 {
            hi = Some(e);
            break;
        }
        lo = e;
    }
    let Some(mut hi) = hi else { return Ok(PI) };
    while hi - lo > THRESHOLD_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if g(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Misalignment threshold for positive gain. The sign of G does not depend
/// on η, so the search runs at η = 1.
pub fn gain_threshold<B: PhaseErrorBound + ?Sized>(theta: f64, bound: &B) -> Result<f64> {
    gain_threshold_at_eta(theta, 1.0, bound)
}
