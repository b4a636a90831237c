use super::ShapeError;

/// Coupling function `μ : (−1, 1) → ℝ`, odd and strictly increasing, with
/// `|μ(v)| → ∞` as `|v| → 1`. The network input is `uᵢ = μᵢ(νᵢ/ψᵢ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingSpec {
    /// `μ(v) = κv / (1 − |v|)`.
    Classical { kappa: f64 },
    /// `μ(v) = ln(1/(1 − v))` for `v ≥ 0`, `ln(1 + v)` for `v < 0`.
    Log,
    /// `4·M̄·v` for `|v| < ½`, `sign(v)·M̄/(1 − |v|)` otherwise.
    LocallyLinear { mf_bar: f64 },
    /// Near-signum coupling: `|μ⁻¹(s)| ≥ 1 − ε` whenever `|s| ≥ η`.
    ///
    /// On `|v| ≤ 1 − ε` this is `σ·artanh(v)` with `σ = η / artanh(1 − ε)`;
    /// beyond that the inverse continues as
    /// `1 − ε·c / (c + |s| − η)`, `c = σ/(2 − ε)`, which matches value and
    /// slope at `|s| = η` and keeps large inputs reachable at ratios that are
    /// representable in double precision.
    NearSignum { eps: f64, eta: f64 },
}

impl CouplingSpec {
    pub fn validate(&self) -> Result<(), ShapeError> {
        match *self {
            CouplingSpec::Classical { kappa } if !(kappa > 0.0 && kappa.is_finite()) => {
                Err(ShapeError::InvalidParameter("kappa must be positive"))
            }
            CouplingSpec::LocallyLinear { mf_bar } if !(mf_bar > 0.0 && mf_bar.is_finite()) => {
                Err(ShapeError::InvalidParameter("mf_bar must be positive"))
            }
            CouplingSpec::NearSignum { eps, .. } if !(eps > 0.0 && eps < 1.0) => {
                Err(ShapeError::InvalidParameter("eps must lie in (0, 1)"))
            }
            CouplingSpec::NearSignum { eta, .. } if !(eta > 0.0 && eta.is_finite()) => {
                Err(ShapeError::InvalidParameter("eta must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// `(σ, c)` for the near-signum family.
    fn signum_constants(eps: f64, eta: f64) -> (f64, f64) {
        let sigma = eta / libm::atanh(1.0 - eps);
        (sigma, sigma / (2.0 - eps))
    }

    fn check_domain(v: f64) -> Result<f64, ShapeError> {
        if v.abs() < 1.0 {
            Ok(v)
        } else {
            Err(ShapeError::DomainBreach(v))
        }
    }

    pub fn mu(&self, v: f64) -> Result<f64, ShapeError> {
        let v = Self::check_domain(v)?;
        let a = v.abs();
        let magnitude = match *self {
            CouplingSpec::Classical { kappa } => kappa * a / (1.0 - a),
            CouplingSpec::Log => -libm::log1p(-a),
            CouplingSpec::LocallyLinear { mf_bar } => {
                if a < 0.5 {
                    4.0 * mf_bar * a
                } else {
                    mf_bar / (1.0 - a)
                }
            }
            CouplingSpec::NearSignum { eps, eta } => {
                let (sigma, c) = Self::signum_constants(eps, eta);
                if a <= 1.0 - eps {
                    sigma * libm::atanh(a)
                } else {
                    eta - c + eps * c / (1.0 - a)
                }
            }
        };
        Ok(libm::copysign(magnitude, v))
    }

    /// `μ′(v)`.
    pub fn mu_prime(&self, v: f64) -> Result<f64, ShapeError> {
        let v = Self::check_domain(v)?;
        let a = v.abs();
        Ok(match *self {
            CouplingSpec::Classical { kappa } => kappa / ((1.0 - a) * (1.0 - a)),
            CouplingSpec::Log => 1.0 / (1.0 - a),
            CouplingSpec::LocallyLinear { mf_bar } => {
                if a < 0.5 {
                    4.0 * mf_bar
                } else {
                    mf_bar / ((1.0 - a) * (1.0 - a))
                }
            }
            CouplingSpec::NearSignum { eps, eta } => {
                let (sigma, c) = Self::signum_constants(eps, eta);
                if a <= 1.0 - eps {
                    sigma / ((1.0 - a) * (1.0 + a))
                } else {
                    eps * c / ((1.0 - a) * (1.0 - a))
                }
            }
        })
    }

    /// `μ⁻¹(s)`, defined on all of ℝ. For very large `|s|` the result may
    /// round to `±1`.
    pub fn mu_inv(&self, s: f64) -> f64 {
        let a = s.abs();
        let magnitude = match *self {
            CouplingSpec::Classical { kappa } => {
                if a.is_infinite() {
                    1.0
                } else {
                    a / (kappa + a)
                }
            }
            CouplingSpec::Log => -libm::expm1(-a),
            CouplingSpec::LocallyLinear { mf_bar } => {
                if a < 2.0 * mf_bar {
                    a / (4.0 * mf_bar)
                } else {
                    1.0 - mf_bar / a
                }
            }
            CouplingSpec::NearSignum { eps, eta } => {
                let (sigma, c) = Self::signum_constants(eps, eta);
                if a < eta {
                    libm::tanh(a / sigma)
                } else {
                    // exactly 1 − ε at a = η
                    1.0 - eps * (c / (c + (a - eta)))
                }
            }
        };
        libm::copysign(magnitude, s)
    }

    /// `(μ⁻¹)′(s)`, always positive for finite `s` (up to underflow).
    pub fn mu_inv_prime(&self, s: f64) -> f64 {
        let a = s.abs();
        match *self {
            CouplingSpec::Classical { kappa } => kappa / ((kappa + a) * (kappa + a)),
            CouplingSpec::Log => libm::exp(-a),
            CouplingSpec::LocallyLinear { mf_bar } => {
                if a < 2.0 * mf_bar {
                    1.0 / (4.0 * mf_bar)
                } else {
                    mf_bar / (a * a)
                }
            }
            CouplingSpec::NearSignum { eps, eta } => {
                let (sigma, c) = Self::signum_constants(eps, eta);
                if a < eta {
                    let th = libm::tanh(a / sigma);
                    (1.0 - th) * (1.0 + th) / sigma
                } else {
                    let d = c + (a - eta);
                    eps * c / (d * d)
                }
            }
        }
    }

    /// `γ(v) = μ(v)/v` for `v ∈ (0, 1)`, and its limit at `v = 0`.
    pub fn gamma(&self, v: f64) -> Result<f64, ShapeError> {
        if v == 0.0 {
            return Ok(self.gamma0());
        }
        Ok(self.mu(v)? / v)
    }

    /// `γ(0⁺)`, i.e. `μ′(0)`.
    pub fn gamma0(&self) -> f64 {
        match *self {
            CouplingSpec::Classical { kappa } => kappa,
            CouplingSpec::Log => 1.0,
            CouplingSpec::LocallyLinear { mf_bar } => 4.0 * mf_bar,
            CouplingSpec::NearSignum { eps, eta } => Self::signum_constants(eps, eta).0,
        }
    }

    /// Input magnitude `μ(1 − margin)` reached when the ratio sits `margin`
    /// below the funnel boundary.
    pub fn input_at_margin(&self, margin: f64) -> f64 {
        self.mu(1.0 - margin).unwrap_or(f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALL: [CouplingSpec; 5] = [
        CouplingSpec::Classical { kappa: 1.0 },
        CouplingSpec::Classical { kappa: 2.5 },
        CouplingSpec::Log,
        CouplingSpec::LocallyLinear { mf_bar: 3.0 },
        CouplingSpec::NearSignum { eps: 0.2, eta: 0.05 },
    ];

    #[test]
    fn classical_values() {
        let c = CouplingSpec::Classical { kappa: 1.0 };
        assert_eq!(c.mu(0.5).unwrap(), 1.0);
        assert_eq!(c.mu_inv(1.0), 0.5);
    }

    #[test]
    fn log_inverse_is_odd() {
        for s in [0.1, 1.0, 10.0] {
            assert_eq!(CouplingSpec::Log.mu_inv(-s), -CouplingSpec::Log.mu_inv(s));
        }
    }

    #[test]
    fn near_signum_hits_one_minus_eps_at_eta() {
        let c = CouplingSpec::NearSignum { eps: 0.2, eta: 0.05 };
        assert!((c.mu_inv(0.05) - 0.8).abs() < 1e-15);
        assert!((c.mu_inv(-0.05) + 0.8).abs() < 1e-15);
        // both branches agree at the joint
        let below = c.mu_inv(0.05 * (1.0 - 1e-12));
        let above = c.mu_inv(0.05 * (1.0 + 1e-12));
        assert!(below <= 0.8 + 1e-15 && above >= 0.8 - 1e-15);
        assert!((c.mu(0.8).unwrap() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn domain_breach() {
        for c in ALL {
            assert_eq!(c.mu(1.0).unwrap_err(), ShapeError::DomainBreach(1.0));
            assert_eq!(c.mu(-1.5).unwrap_err(), ShapeError::DomainBreach(-1.5));
            assert!(c.mu(f64::NAN).is_err());
            assert!(c.mu_prime(1.0).is_err());
        }
    }

    #[test]
    fn gamma_at_zero() {
        assert_eq!(CouplingSpec::Log.gamma0(), 1.0);
        assert_eq!(CouplingSpec::LocallyLinear { mf_bar: 2.0 }.gamma0(), 8.0);
        assert_eq!(CouplingSpec::Classical { kappa: 3.0 }.gamma(0.0).unwrap(), 3.0);
        for c in ALL {
            let g = c.gamma(1e-7).unwrap();
            assert!((g - c.gamma0()).abs() <= 1e-5 * c.gamma0(), "{c:?}");
        }
    }

    #[test]
    fn derivatives_are_continuous_at_breakpoints() {
        let ll = CouplingSpec::LocallyLinear { mf_bar: 3.0 };
        assert!((ll.mu_prime(0.5 - 1e-12).unwrap() - ll.mu_prime(0.5).unwrap()).abs() < 1e-9);
        assert!((ll.mu_inv_prime(6.0 - 1e-12) - ll.mu_inv_prime(6.0)).abs() < 1e-12);
        let ns = CouplingSpec::NearSignum { eps: 0.2, eta: 0.05 };
        let lo = ns.mu_prime(0.8 - 1e-12).unwrap();
        let hi = ns.mu_prime(0.8 + 1e-12).unwrap();
        assert!((lo - hi).abs() < 1e-8 * lo);
        assert!((ns.mu_inv_prime(0.05 - 1e-13) - ns.mu_inv_prime(0.05 + 1e-13)).abs() < 1e-9);
    }

    #[test]
    fn validation() {
        assert!(CouplingSpec::Classical { kappa: 0.0 }.validate().is_err());
        assert!(CouplingSpec::LocallyLinear { mf_bar: -1.0 }.validate().is_err());
        assert!(CouplingSpec::NearSignum { eps: 1.0, eta: 0.1 }.validate().is_err());
        assert!(CouplingSpec::NearSignum { eps: 0.2, eta: 0.0 }.validate().is_err());
        for c in ALL {
            c.validate().unwrap();
        }
    }
}
