//! B92 states on the real slice of the qubit, the phase-drift rotation and
//! the exact detection probabilities seen by Bob.
//!
//! Amplitudes are expressed in the eigenbasis {|0_x⟩, |1_x⟩} of the Pauli X
//! operator. A drift about the Y axis keeps every amplitude real, so a pair
//! of `f64` fully describes each state.

use serde::{Deserialize, Serialize};

use crate::error::{check_eta, check_theta, Error, Result};

/// A bit value; only the lowest bit is significant.
pub type Bit = u8;

#[inline]
fn parity_sign(j: Bit) -> f64 {
    if j & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Real pure state `c0|0_x⟩ + c1|1_x⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub c0: f64,
    pub c1: f64,
}

impl StateVector {
    pub const fn new(c0: f64, c1: f64) -> Self {
        Self { c0, c1 }
    }

    pub fn inner(&self, other: &StateVector) -> f64 {
        self.c0 * other.c0 + self.c1 * other.c1
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner(self)
    }

    /// `|⟨self|other⟩|²`
    pub fn overlap(&self, other: &StateVector) -> f64 {
        let a = self.inner(other);
        a * a
    }

    /// Projector `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> DensityMatrix2 {
        DensityMatrix2 {
            m00: self.c0 * self.c0,
            m01: self.c0 * self.c1,
            m10: self.c1 * self.c0,
            m11: self.c1 * self.c1,
        }
    }
}

/// Real symmetric 2×2 density matrix in the {|0_x⟩, |1_x⟩} basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2 {
    pub m00: f64,
    pub m01: f64,
    pub m10: f64,
    pub m11: f64,
}

impl DensityMatrix2 {
    pub fn trace(&self) -> f64 {
        self.m00 + self.m11
    }

    pub fn mix(&self, other: &DensityMatrix2, weight: f64) -> DensityMatrix2 {
        let w = weight;
        let v = 1.0 - weight;
        DensityMatrix2 {
            m00: w * self.m00 + v * other.m00,
            m01: w * self.m01 + v * other.m01,
            m10: w * self.m10 + v * other.m10,
            m11: w * self.m11 + v * other.m11,
        }
    }

    /// `⟨ψ|ρ|ψ⟩`
    pub fn expectation(&self, psi: &StateVector) -> f64 {
        psi.c0 * (self.m00 * psi.c0 + self.m01 * psi.c1) + psi.c1 * (self.m10 * psi.c0 + self.m11 * psi.c1)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let half_tr = 0.5 * self.trace();
        let half_diff = 0.5 * (self.m00 - self.m11);
        let off = 0.5 * (self.m01 + self.m10);
        let r = half_diff.hypot(off);
        (half_tr - r, half_tr + r)
    }
}

/// Physical parameters of the link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Characteristic angle between the signal states, radians in (0, π/2).
    pub theta: f64,
    /// Trigger rate in Hz.
    pub trigger_rate_hz: f64,
    /// Mean photon number per pulse.
    pub mu: f64,
    /// Detector efficiency.
    pub eta_b: f64,
    /// Channel transmittance.
    pub eta_c: f64,
}

impl ProtocolParams {
    /// θ = π/3, 2 MHz trigger, μ = 0.5, η_B = 0.1, η_C = 0.1.
    pub fn reference() -> Self {
        Self {
            theta: std::f64::consts::FRAC_PI_3,
            trigger_rate_hz: 2.0e6,
            mu: 0.5,
            eta_b: 0.1,
            eta_c: 0.1,
        }
    }

    /// Total transmission, the per-pulse probability of a usable click.
    /// Double-click losses are not modelled and enter as a factor of one.
    pub fn eta(&self) -> f64 {
        self.mu * self.eta_b * self.eta_c
    }

    pub fn validate(&self) -> Result<()> {
        check_theta(self.theta)?;
        if !(self.trigger_rate_hz.is_finite() && self.trigger_rate_hz > 0.0) {
            return Err(Error::Domain {
                name: "trigger_rate_hz",
                bound: "(0, ∞)",
                value: self.trigger_rate_hz,
            });
        }
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::Domain {
                name: "mu",
                bound: "(0, ∞)",
                value: self.mu,
            });
        }
        for (name, v) in [("eta_b", self.eta_b), ("eta_c", self.eta_c)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain {
                    name,
                    bound: "[0, 1]",
                    value: v,
                });
            }
        }
        check_eta(self.eta())
    }
}

/// `|φ_j⟩ = cos(θ/2)|0_x⟩ + (−1)^j sin(θ/2)|1_x⟩`
pub fn signal_state(j: Bit, theta: f64) -> Result<StateVector> {
    check_theta(theta)?;
    let (s, c) = (0.5 * theta).sin_cos();
    Ok(StateVector::new(c, parity_sign(j) * s))
}

/// `|φ̄_j⟩ = sin(θ/2)|0_x⟩ − (−1)^j cos(θ/2)|1_x⟩`, orthogonal to `|φ_j⟩`.
pub fn orthogonal_state(j: Bit, theta: f64) -> Result<StateVector> {
    check_theta(theta)?;
    let (s, c) = (0.5 * theta).sin_cos();
    Ok(StateVector::new(s, -parity_sign(j) * c))
}

/// Alice's average state `diag(cos²(θ/2), sin²(θ/2))`.
pub fn source_density(theta: f64) -> Result<DensityMatrix2> {
    check_theta(theta)?;
    let (s, c) = (0.5 * theta).sin_cos();
    Ok(DensityMatrix2 {
        m00: c * c,
        m01: 0.0,
        m10: 0.0,
        m11: s * s,
    })
}

/// Applies `exp(i ε Y / 2)` to a real state.
///
/// On real amplitudes this is a plane rotation by ε/2 towards |1_x⟩, so a
/// positive drift moves `|φ_0⟩` away from `|0_x⟩` and `|φ_1⟩` towards it.
pub fn rotate(state: StateVector, eps: f64) -> StateVector {
    let (s, c) = (0.5 * eps).sin_cos();
    StateVector::new(c * state.c0 - s * state.c1, s * state.c0 + c * state.c1)
}

/// The signal state as received after a drift ε, written in closed form.
pub fn drifted_state(j: Bit, theta: f64, eps: f64) -> StateVector {
    if j & 1 == 0 {
        let (s, c) = (0.5 * (theta + eps)).sin_cos();
        StateVector::new(c, s)
    } else {
        let (s, c) = (0.5 * (theta - eps)).sin_cos();
        StateVector::new(c, -s)
    }
}

/// Bob's average received state for equiprobable bits.
pub fn received_density(theta: f64, eps: f64) -> DensityMatrix2 {
    let p0 = drifted_state(0, theta, eps).projector();
    let p1 = drifted_state(1, theta, eps).projector();
    p0.mix(&p1, 0.5)
}

#[inline]
fn basis_cosine(k: Bit, theta: f64, eps: f64) -> f64 {
    (2.0 * theta - parity_sign(k) * eps).cos()
}

/// Probability of an inconclusive outcome when measuring in basis `B_k`:
/// `η {2 + cos ε + cos[2θ − (−1)^k ε]} / 4`.
pub fn p_inconclusive(k: Bit, theta: f64, eps: f64, eta: f64) -> Result<f64> {
    check_theta(theta)?;
    check_eta(eta)?;
    Ok(eta * (2.0 + eps.cos() + basis_cosine(k, theta, eps)) / 4.0)
}

/// Probability of a conclusive outcome when measuring in basis `B_k`:
/// `η {2 − cos ε − cos[2θ − (−1)^k ε]} / 4`.
pub fn p_conclusive(k: Bit, theta: f64, eps: f64, eta: f64) -> Result<f64> {
    check_theta(theta)?;
    check_eta(eta)?;
    Ok(eta * (2.0 - eps.cos() - basis_cosine(k, theta, eps)) / 4.0)
}
