use thiserror::Error;

/// Errors raised by the protocol, estimation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of the function.
    #[error("{name} must lie in {bound}, got {value}")]
    Domain {
        name: &'static str,
        bound: &'static str,
        value: f64,
    },

    /// The control-function denominator vanished.
    #[error("control function undefined: denominator {0:e} is not positive")]
    DegenerateRatio(f64),

    /// The secure gain is undefined because no conclusive counts are expected.
    #[error("secure gain undefined: conclusive rate is zero")]
    UndefinedGain,

    /// The gain is not positive at zero misalignment, so no threshold exists.
    #[error("secure gain is not positive at zero misalignment (G(0) = {0})")]
    NoPositiveRegion(f64),

    /// The estimator declined to produce a value because a conclusive tally is empty.
    #[error("estimator abstained: no conclusive counts in basis {basis}")]
    Abstain { basis: u8 },

    /// Residual statistics were requested for an empty kick log.
    #[error("kick log is empty")]
    EmptyLog,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_open(name: &'static str, bound: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value > lo && value < hi {
        Ok(())
    } else {
        Err(Error::Domain { name, bound, value })
    }
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    check_open("theta", "(0, π/2)", theta, 0.0, std::f64::consts::FRAC_PI_2)
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "eta",
            bound: "(0, 1]",
            value: eta,
        })
    }
}
