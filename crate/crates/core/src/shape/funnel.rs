use alloc::boxed::Box;

use super::ShapeError;

/// Performance function `ψ(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum FunnelSpec {
    /// `ψ(t) = (ψ₀ − η)·e^{−λ(t − t₀)} + η`.
    ExpToEta {
        psi0: f64,
        eta: f64,
        lambda: f64,
        t0: f64,
    },
    Constant {
        psi0: f64,
    },
    /// `ε·ψ_inner(t)`.
    Scaled {
        inner: Box<FunnelSpec>,
        factor: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunnelValue {
    pub value: f64,
    pub derivative: f64,
}

/// A funnel written as `scale · shape(t)`, where two funnels with equal shapes
/// differ only by a constant factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FunnelShape {
    Constant,
    /// `e^{−λ(t−t₀)}`.
    Decaying {
        lambda: f64,
        t0: f64,
    },
    /// `(ρ − 1)·e^{−λ(t−t₀)} + 1` with `ρ = ψ₀/η`.
    DecayingToOne {
        rho: f64,
        lambda: f64,
        t0: f64,
    },
}

impl FunnelSpec {
    pub fn exp_to_eta(psi0: f64, eta: f64, lambda: f64, t0: f64) -> Result<Self, ShapeError> {
        let f = FunnelSpec::ExpToEta { psi0, eta, lambda, t0 };
        f.validate()?;
        Ok(f)
    }

    pub fn constant(psi0: f64) -> Result<Self, ShapeError> {
        let f = FunnelSpec::Constant { psi0 };
        f.validate()?;
        Ok(f)
    }

    pub fn scaled(self, factor: f64) -> Result<Self, ShapeError> {
        let f = FunnelSpec::Scaled { inner: Box::new(self), factor };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<(), ShapeError> {
        match self {
            FunnelSpec::ExpToEta { psi0, eta, lambda, t0 } => {
                if !(psi0.is_finite() && eta.is_finite() && lambda.is_finite() && t0.is_finite()) {
                    return Err(ShapeError::InvalidParameter("funnel parameters must be finite"));
                }
                if !(*eta >= 0.0) {
                    return Err(ShapeError::InvalidParameter("eta must be non-negative"));
                }
                if !(psi0 > eta) {
                    return Err(ShapeError::InvalidParameter("psi0 must exceed eta"));
                }
                if !(*lambda > 0.0) {
                    return Err(ShapeError::InvalidParameter("lambda must be positive"));
                }
                Ok(())
            }
            FunnelSpec::Constant { psi0 } => {
                if psi0.is_finite() && *psi0 > 0.0 {
                    Ok(())
                } else {
                    Err(ShapeError::InvalidParameter("constant funnel must be positive and finite"))
                }
            }
            FunnelSpec::Scaled { inner, factor } => {
                if !(factor.is_finite() && *factor > 0.0) {
                    return Err(ShapeError::InvalidParameter("scale factor must be positive"));
                }
                inner.validate()
            }
        }
    }

    /// Earliest time at which the funnel may be evaluated.
    pub fn start_time(&self) -> f64 {
        match self {
            FunnelSpec::ExpToEta { t0, .. } => *t0,
            FunnelSpec::Constant { .. } => f64::NEG_INFINITY,
            FunnelSpec::Scaled { inner, .. } => inner.start_time(),
        }
    }

    /// Closed-form value and derivative.
    pub fn eval(&self, t: f64) -> Result<FunnelValue, ShapeError> {
        match self {
            FunnelSpec::ExpToEta { psi0, eta, lambda, t0 } => {
                if t < *t0 {
                    return Err(ShapeError::TimeBeforeStart { t, t0: *t0 });
                }
                let decay = (psi0 - eta) * libm::exp(-lambda * (t - t0));
                Ok(FunnelValue { value: decay + eta, derivative: -lambda * decay })
            }
            FunnelSpec::Constant { psi0 } => Ok(FunnelValue { value: *psi0, derivative: 0.0 }),
            FunnelSpec::Scaled { inner, factor } => {
                let v = inner.eval(t)?;
                Ok(FunnelValue { value: factor * v.value, derivative: factor * v.derivative })
            }
        }
    }

    pub fn value(&self, t: f64) -> Result<f64, ShapeError> {
        self.eval(t).map(|v| v.value)
    }

    /// `lim_{t→∞} ψ(t)`.
    pub fn limit(&self) -> f64 {
        match self {
            FunnelSpec::ExpToEta { eta, .. } => *eta,
            FunnelSpec::Constant { psi0 } => *psi0,
            FunnelSpec::Scaled { inner, factor } => factor * inner.limit(),
        }
    }

    /// `sup_t ψ(t)`.
    pub fn sup(&self) -> f64 {
        match self {
            FunnelSpec::ExpToEta { psi0, .. } => *psi0,
            FunnelSpec::Constant { psi0 } => *psi0,
            FunnelSpec::Scaled { inner, factor } => factor * inner.sup(),
        }
    }

    /// Smallest `λ_ψ` with `|ψ′(t)| ≤ λ_ψ ψ(t)` for all `t ≥ t₀`.
    pub fn log_derivative_bound(&self) -> f64 {
        match self {
            FunnelSpec::ExpToEta { psi0, eta, lambda, .. } => lambda * (psi0 - eta) / psi0,
            FunnelSpec::Constant { .. } => 0.0,
            FunnelSpec::Scaled { inner, .. } => inner.log_derivative_bound(),
        }
    }

    /// Exponential rate at which a funnel with zero limit approaches zero.
    pub fn vanishing_rate(&self) -> Option<f64> {
        match self {
            FunnelSpec::ExpToEta { eta, lambda, .. } if *eta == 0.0 => Some(*lambda),
            FunnelSpec::Scaled { inner, .. } => inner.vanishing_rate(),
            _ => None,
        }
    }

    /// Splits the funnel into `(shape, scale)` with `ψ(t) = scale · shape(t)`.
    pub fn shape(&self) -> (FunnelShape, f64) {
        match self {
            FunnelSpec::ExpToEta { psi0, eta, lambda, t0 } => {
                if *eta == 0.0 {
                    (FunnelShape::Decaying { lambda: *lambda, t0: *t0 }, *psi0)
                } else {
                    (FunnelShape::DecayingToOne { rho: psi0 / eta, lambda: *lambda, t0: *t0 }, *eta)
                }
            }
            FunnelSpec::Constant { psi0 } => (FunnelShape::Constant, *psi0),
            FunnelSpec::Scaled { inner, factor } => {
                let (shape, scale) = inner.shape();
                (shape, scale * factor)
            }
        }
    }
}

/// True when every funnel is a constant multiple of the same shape, in which
/// case the emergent vector field does not depend on time through `ψ`.
pub fn share_common_shape(funnels: &[FunnelSpec]) -> bool {
    let mut shapes = funnels.iter().map(|f| f.shape().0);
    match shapes.next() {
        Some(first) => shapes.all(|s| s == first),
        None => true,
    }
}
