use alloc::vec::Vec;

use super::{CouplingSpec, FunnelSpec, ShapeError};

#[derive(Debug, Clone, PartialEq)]
pub enum FunnelViolation {
    InvalidSpec {
        index: usize,
        error: ShapeError,
    },
    /// The horizon starts before the funnel's `t₀`.
    StartsBeforeFunnel {
        index: usize,
        t0: f64,
    },
    NotPositive {
        index: usize,
        t: f64,
    },
    /// `max_i ψᵢ / min_j ψⱼ` grows without bound as `t → ∞`.
    RatioUnbounded,
}

/// Sampled constants of a funnel set together with per-clause verdicts.
#[derive(Debug, Clone, PartialEq)]
pub struct FunnelSetReport {
    pub samples: usize,
    /// `ψ̄`: largest sampled value.
    pub psi_bar: f64,
    /// `θ_ψ`: largest sampled `|ψ′|`.
    pub theta_psi: f64,
    /// `r_ψ`: largest sampled `max_i ψᵢ / min_j ψⱼ`.
    pub r_psi: f64,
    /// `λ_ψ`: largest sampled `|ψ′|/ψ`.
    pub lambda_psi: f64,
    /// Closed-form bound on `λ_ψ` over the whole future.
    pub lambda_psi_bound: f64,
    pub positive_and_bounded: bool,
    pub derivative_bounded: bool,
    pub ratio_bounded: bool,
    pub log_derivative_bounded: bool,
    pub violations: Vec<FunnelViolation>,
}

impl FunnelSetReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples every funnel at `samples` evenly spaced times on `horizon`.
///
/// Whether `r_ψ` stays bounded is decided from the tails: funnels with a
/// positive limit keep the ratio bounded, and vanishing funnels must all
/// share one decay rate.
pub fn validate_funnel_set(specs: &[FunnelSpec], horizon: (f64, f64), samples: usize) -> FunnelSetReport {
    let samples = samples.max(2);
    let (ta, tb) = horizon;
    let mut violations = Vec::new();
    for (index, spec) in specs.iter().enumerate() {
        if let Err(error) = spec.validate() {
            violations.push(FunnelViolation::InvalidSpec { index, error });
        } else if ta < spec.start_time() {
            violations.push(FunnelViolation::StartsBeforeFunnel { index, t0: spec.start_time() });
        }
    }

    let mut psi_bar: f64 = 0.0;
    let mut theta_psi: f64 = 0.0;
    let mut r_psi: f64 = 1.0;
    let mut lambda_psi: f64 = 0.0;
    let mut positive = violations.is_empty();
    for k in 0..samples {
        let t = ta + (tb - ta) * (k as f64) / ((samples - 1) as f64);
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        for (index, spec) in specs.iter().enumerate() {
            let Ok(v) = spec.eval(t) else { continue };
            if !(v.value > 0.0) || !v.value.is_finite() {
                if positive {
                    violations.push(FunnelViolation::NotPositive { index, t });
                }
                positive = false;
                continue;
            }
            psi_bar = psi_bar.max(v.value);
            theta_psi = theta_psi.max(v.derivative.abs());
            lambda_psi = lambda_psi.max(v.derivative.abs() / v.value);
            lo = lo.min(v.value);
            hi = hi.max(v.value);
        }
        if lo.is_finite() && lo > 0.0 {
            r_psi = r_psi.max(hi / lo);
        }
    }

    let ratio_bounded = tails_keep_ratio_bounded(specs);
    if !ratio_bounded {
        violations.push(FunnelViolation::RatioUnbounded);
    }
    let lambda_psi_bound = specs.iter().map(FunnelSpec::log_derivative_bound).fold(0.0, f64::max);

    FunnelSetReport {
        samples,
        psi_bar,
        theta_psi,
        r_psi,
        lambda_psi,
        lambda_psi_bound,
        positive_and_bounded: positive && psi_bar.is_finite(),
        derivative_bounded: theta_psi.is_finite(),
        ratio_bounded,
        log_derivative_bounded: lambda_psi_bound.is_finite(),
        violations,
    }
}

fn tails_keep_ratio_bounded(specs: &[FunnelSpec]) -> bool {
    let vanishing: Vec<Option<f64>> = specs.iter().map(FunnelSpec::vanishing_rate).collect();
    if vanishing.iter().all(Option::is_none) {
        return true;
    }
    match vanishing.first().copied().flatten() {
        Some(rate) => vanishing.iter().all(|r| *r == Some(rate)),
        None => false,
    }
}

/// Sampled properties of one coupling function.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingReport {
    pub gamma0: f64,
    pub odd: bool,
    pub strictly_increasing: bool,
    /// `μ(v) → ∞` as `v → 1`.
    pub unbounded: bool,
    /// `γ` is nondecreasing on the samples.
    pub gamma_nondecreasing: bool,
    /// `γ` is strictly increasing on the samples.
    pub gamma_strictly_increasing: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSetReport {
    pub couplings: Vec<CouplingReport>,
    pub invalid: Vec<(usize, ShapeError)>,
}

impl CouplingSetReport {
    /// Odd, strictly increasing and unbounded.
    pub fn standing_assumption_holds(&self) -> bool {
        self.invalid.is_empty() && self.couplings.iter().all(|c| c.odd && c.strictly_increasing && c.unbounded)
    }

    /// Positive `γ(0⁺)` and nondecreasing `γ`.
    pub fn gamma_assumption_holds(&self) -> bool {
        self.invalid.is_empty() && self.couplings.iter().all(|c| c.gamma0 > 0.0 && c.gamma_nondecreasing)
    }
}

pub fn validate_couplings(specs: &[CouplingSpec], samples: usize) -> CouplingSetReport {
    let samples = samples.max(2);
    let mut couplings = Vec::with_capacity(specs.len());
    let mut invalid = Vec::new();
    for (index, spec) in specs.iter().enumerate() {
        if let Err(e) = spec.validate() {
            invalid.push((index, e));
            continue;
        }
        couplings.push(coupling_report(spec, samples));
    }
    CouplingSetReport { couplings, invalid }
}

fn coupling_report(spec: &CouplingSpec, samples: usize) -> CouplingReport {
    let mut odd = true;
    let mut strictly_increasing = true;
    let mut gamma_nondecreasing = true;
    let mut gamma_strictly_increasing = true;
    let mut prev_mu = f64::NEG_INFINITY;
    let mut prev_gamma = spec.gamma0();
    for k in 1..=samples {
        let v = (k as f64) / ((samples + 1) as f64);
        let (Ok(m), Ok(mneg)) = (spec.mu(v), spec.mu(-v)) else {
            strictly_increasing = false;
            continue;
        };
        if (m + mneg).abs() > 1e-12 * m.abs().max(1.0) {
            odd = false;
        }
        if !(m > prev_mu) || !(m > 0.0) {
            strictly_increasing = false;
        }
        let g = m / v;
        let slack = 1e-12 * g.abs();
        if g < prev_gamma - slack {
            gamma_nondecreasing = false;
        }
        if g <= prev_gamma + slack {
            gamma_strictly_increasing = false;
        }
        prev_mu = m;
        prev_gamma = g;
    }

    // A saturating function has shrinking increments along v = 1 − 10^{−k}.
    let edge = |k: i32| spec.mu(1.0 - libm::pow(10.0, -(k as f64))).unwrap_or(f64::NAN);
    let first = edge(2) - edge(1);
    let last = edge(12) - edge(11);
    let unbounded = first > 0.0 && last >= 0.5 * first;

    CouplingReport {
        gamma0: spec.gamma0(),
        odd,
        strictly_increasing,
        unbounded,
        gamma_nondecreasing,
        gamma_strictly_increasing,
    }
}
