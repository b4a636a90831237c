//! Performance functions `ψᵢ` and coupling functions `μᵢ`.

mod coupling;
mod funnel;
mod validate;

pub use coupling::CouplingSpec;
pub use funnel::{share_common_shape, FunnelShape, FunnelSpec, FunnelValue};
pub use validate::{
    validate_couplings, validate_funnel_set, CouplingReport, CouplingSetReport, FunnelSetReport, FunnelViolation,
};

use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum ShapeError {
    /// A funnel was evaluated before its start time.
    TimeBeforeStart {
        t: f64,
        t0: f64,
    },
    /// A coupling was evaluated at `|v| ≥ 1`.
    DomainBreach(f64),
    InvalidParameter(&'static str),
}

impl fmt::Display for ShapeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeError::TimeBeforeStart { t, t0 } => {
                write!(f, "funnel evaluated at t = {t} before its start time {t0}")
            }
            ShapeError::DomainBreach(v) => {
                write!(f, "coupling argument {v} is outside the open interval (-1, 1)")
            }
            ShapeError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}

impl core::error::Error for ShapeError {}
