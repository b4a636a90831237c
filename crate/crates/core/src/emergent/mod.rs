//! Emergent dynamics `ξ̇ = f_em(t, ξ)` where `h = f_em` is the unique root of
//!
//! ```text
//! H(h) = Σᵢ ψᵢ(t) μᵢ⁻¹(h − fᵢ(t, ξ)) = 0.
//! ```
//!
//! `H` is strictly increasing with `H(min f) ≤ 0 ≤ H(max f)`, so the root is
//! bracketed by the drives.

mod compare;
mod simulate;
mod special;

pub use compare::{
    compare, epsilon_sweep, initial_state_experiment, ComparisonReport, InitialStateExperiment, SweepRow,
};
pub use simulate::{simulate_emergent, EmergentMode, EmergentTrajectory};
pub use special::{solve_h_classical, solve_h_log};

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::netsim::{Scenario, ScenarioError, SimError};
use crate::shape::{share_common_shape, CouplingSpec, FunnelSpec, ShapeError};
use crate::vfield::{VectorField, VfError};

pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum EmergentError {
    Empty,
    DimensionMismatch {
        expected: usize,
        got: usize,
    },
    NonPositiveWeight(usize),
    /// `H` does not change sign over `[min f, max f]`.
    BracketFailure,
    NotClassical,
    NotLog,
    /// `|H(h)|` exceeds `1e−8·Σψ` at the supplied point.
    StaleSolution {
        residual: f64,
    },
    /// `Σψⱼ(μⱼ⁻¹)′(h − fⱼ)` underflowed.
    DegenerateDerivative,
    Shape(ShapeError),
    Field {
        index: usize,
        error: VfError,
    },
    GridMismatch,
    NotSynchronized,
    Simulation(SimError),
    Scenario(ScenarioError),
}

impl fmt::Display for EmergentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EmergentError::Empty => write!(f, "no agents"),
            EmergentError::DimensionMismatch { expected, got } => {
                write!(f, "expected {expected} entries, got {got}")
            }
            EmergentError::NonPositiveWeight(i) => write!(f, "funnel value {i} is not positive"),
            EmergentError::BracketFailure => write!(f, "H does not change sign between min f and max f"),
            EmergentError::NotClassical => write!(f, "couplings are not all Classical with one kappa"),
            EmergentError::NotLog => write!(f, "couplings are not all Log"),
            EmergentError::StaleSolution { residual } => {
                write!(f, "supplied h does not solve H(h) = 0 (residual {residual})")
            }
            EmergentError::DegenerateDerivative => write!(f, "dH/dh vanished numerically"),
            EmergentError::Shape(e) => write!(f, "{e}"),
            EmergentError::Field { index, error } => write!(f, "agent {index} vector field: {error}"),
            EmergentError::GridMismatch => write!(f, "time grids do not match"),
            EmergentError::NotSynchronized => write!(f, "template initial states are not synchronized"),
            EmergentError::Simulation(e) => write!(f, "{e}"),
            EmergentError::Scenario(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for EmergentError {}

impl From<ShapeError> for EmergentError {
    fn from(e: ShapeError) -> Self {
        EmergentError::Shape(e)
    }
}

/// One instance of `H(h) = 0` at a fixed time.
#[derive(Debug, Clone, PartialEq)]
pub struct HProblem {
    pub f: Vec<f64>,
    pub psi: Vec<f64>,
    /// `ψ̇ᵢ(t)`; zero when only values are known.
    pub psi_dot: Vec<f64>,
    pub couplings: Vec<CouplingSpec>,
    pub tol: f64,
    /// All funnels are constant multiples of one shape.
    pub common_shape: bool,
}

impl HProblem {
    /// Problem from funnel values alone.
    pub fn new(f: Vec<f64>, psi: Vec<f64>, couplings: Vec<CouplingSpec>) -> Result<HProblem, EmergentError> {
        let n = f.len();
        if n == 0 {
            return Err(EmergentError::Empty);
        }
        for len in [psi.len(), couplings.len()] {
            if len != n {
                return Err(EmergentError::DimensionMismatch { expected: n, got: len });
            }
        }
        if let Some(i) = psi.iter().position(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(EmergentError::NonPositiveWeight(i));
        }
        Ok(HProblem { f, psi_dot: vec![0.0; n], psi, couplings, tol: DEFAULT_TOL, common_shape: false })
    }

    /// Problem at time `t` with funnels evaluated in closed form.
    pub fn at_time(
        t: f64,
        f: Vec<f64>,
        funnels: &[FunnelSpec],
        couplings: Vec<CouplingSpec>,
    ) -> Result<HProblem, EmergentError> {
        let mut psi = Vec::with_capacity(funnels.len());
        let mut psi_dot = Vec::with_capacity(funnels.len());
        for fun in funnels {
            let v = fun.eval(t)?;
            psi.push(v.value);
            psi_dot.push(v.derivative);
        }
        let mut p = HProblem::new(f, psi, couplings)?;
        p.psi_dot = psi_dot;
        p.common_shape = share_common_shape(funnels);
        Ok(p)
    }

    pub fn with_tol(mut self, tol: f64) -> HProblem {
        self.tol = tol;
        self
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    /// `H(h)`.
    pub fn residual(&self, h: f64) -> f64 {
        self.f.iter().zip(&self.psi).zip(&self.couplings).map(|((fi, p), c)| p * c.mu_inv(h - fi)).sum()
    }

    /// `H′(h) = Σ ψᵢ (μᵢ⁻¹)′(h − fᵢ)`.
    pub fn slope(&self, h: f64) -> f64 {
        self.f.iter().zip(&self.psi).zip(&self.couplings).map(|((fi, p), c)| p * c.mu_inv_prime(h - fi)).sum()
    }

    pub fn psi_sum(&self) -> f64 {
        self.psi.iter().sum()
    }

    /// `[min f, max f]`.
    pub fn bracket(&self) -> (f64, f64) {
        let lo = self.f.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// Bisection on a bracket where `g(lo) ≤ 0 ≤ g(hi)` until the width is at
/// most `tol·(1 + |h|)`.
pub(crate) fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..2200 {
        let mid = lo + 0.5 * (hi - lo);
        if hi - lo <= tol * (1.0 + mid.abs()) || mid <= lo || mid >= hi {
            return mid;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        } else if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo + 0.5 * (hi - lo)
}

/// Generic bracketed bisection followed by up to two Newton corrections that
/// are kept only if they stay in the bracket and reduce `|H|`.
pub fn solve_h_bisection(p: &HProblem) -> Result<f64, EmergentError> {
    let (lo, hi) = p.bracket();
    if lo == hi {
        return Ok(lo);
    }
    let (h_lo, h_hi) = (p.residual(lo), p.residual(hi));
    if h_lo.is_nan() || h_hi.is_nan() || h_lo > 0.0 || h_hi < 0.0 {
        return Err(EmergentError::BracketFailure);
    }
    if h_lo == 0.0 {
        return Ok(lo);
    }
    if h_hi == 0.0 {
        return Ok(hi);
    }
    Ok(polish(p, bisect(|h| p.residual(h), lo, hi, p.tol), lo, hi))
}

/// Up to two Newton corrections on `H`, each kept only if it stays in
/// `[lo, hi]` and reduces `|H|`.
pub(crate) fn polish(p: &HProblem, mut h: f64, lo: f64, hi: f64) -> f64 {
    let mut r = p.residual(h).abs();
    for _ in 0..2 {
        let d = p.slope(h);
        if !(d > 0.0) || r == 0.0 {
            break;
        }
        let cand = h - p.residual(h) / d;
        if !(cand >= lo && cand <= hi) {
            break;
        }
        let rc = p.residual(cand).abs();
        if rc < r {
            h = cand;
            r = rc;
        } else {
            break;
        }
    }
    h
}

/// Uses a specialised algorithm when every coupling belongs to the same
/// Classical or Log family, bisection otherwise.
pub fn solve_h(p: &HProblem) -> Result<f64, EmergentError> {
    match p.couplings[0] {
        CouplingSpec::Classical { kappa } if p.couplings.iter().all(|c| *c == CouplingSpec::Classical { kappa }) => {
            solve_h_classical(p)
        }
        CouplingSpec::Log if p.couplings.iter().all(|c| *c == CouplingSpec::Log) => solve_h_log(p),
        _ => solve_h_bisection(p),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HPartials {
    pub dh_df: Vec<f64>,
    pub dh_dt: f64,
}

/// Implicit-function sensitivities of the root `h`.
pub fn h_partials(p: &HProblem, h: f64) -> Result<HPartials, EmergentError> {
    let residual = p.residual(h);
    if !(residual.abs() <= 1e-8 * p.psi_sum()) {
        return Err(EmergentError::StaleSolution { residual });
    }
    let weights: Vec<f64> = (0..p.n()).map(|i| p.psi[i] * p.couplings[i].mu_inv_prime(h - p.f[i])).collect();
    let denom: f64 = weights.iter().sum();
    if !(denom > 0.0) || !denom.is_finite() {
        return Err(EmergentError::DegenerateDerivative);
    }
    let dh_df = weights.iter().map(|w| w / denom).collect();
    let dh_dt = if p.common_shape {
        0.0
    } else {
        let num: f64 = (0..p.n()).map(|j| p.psi_dot[j] * p.couplings[j].mu_inv(h - p.f[j])).sum();
        -num / denom
    };
    Ok(HPartials { dh_df, dh_dt })
}

/// Everything needed to evaluate `f_em(t, ξ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmergentSpec {
    pub fields: Vec<VectorField>,
    pub funnels: Vec<FunnelSpec>,
    pub couplings: Vec<CouplingSpec>,
}

impl EmergentSpec {
    pub fn new(
        fields: Vec<VectorField>,
        funnels: Vec<FunnelSpec>,
        couplings: Vec<CouplingSpec>,
    ) -> Result<EmergentSpec, EmergentError> {
        let n = fields.len();
        if n == 0 {
            return Err(EmergentError::Empty);
        }
        for len in [funnels.len(), couplings.len()] {
            if len != n {
                return Err(EmergentError::DimensionMismatch { expected: n, got: len });
            }
        }
        Ok(EmergentSpec { fields, funnels, couplings })
    }

    pub fn from_scenario(s: &Scenario) -> EmergentSpec {
        EmergentSpec { fields: s.fields(), funnels: s.funnels(), couplings: s.couplings() }
    }

    pub fn n(&self) -> usize {
        self.fields.len()
    }

    pub fn drives(&self, t: f64, xi: f64) -> Result<Vec<f64>, EmergentError> {
        self.fields
            .iter()
            .enumerate()
            .map(|(index, f)| f.eval(t, xi).map_err(|error| EmergentError::Field { index, error }))
            .collect()
    }

    pub fn problem(&self, t: f64, xi: f64) -> Result<HProblem, EmergentError> {
        HProblem::at_time(t, self.drives(t, xi)?, &self.funnels, self.couplings.clone())
    }
}

/// `f_em(t, ξ)`.
pub fn emergent_rhs(t: f64, xi: f64, spec: &EmergentSpec) -> Result<f64, EmergentError> {
    solve_h(&spec.problem(t, xi)?)
}

/// `(1/N) Σ fᵢ(t, ξ)`.
pub fn blended_rhs(t: f64, xi: f64, fields: &[VectorField]) -> Result<f64, EmergentError> {
    if fields.is_empty() {
        return Err(EmergentError::Empty);
    }
    let mut sum = 0.0;
    for (index, f) in fields.iter().enumerate() {
        sum += f.eval(t, xi).map_err(|error| EmergentError::Field { index, error })?;
    }
    Ok(sum / fields.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classical(f: &[f64], psi: &[f64]) -> HProblem {
        HProblem::new(f.to_vec(), psi.to_vec(), vec![CouplingSpec::Classical { kappa: 1.0 }; f.len()]).unwrap()
    }

    #[test]
    fn synchronized_drives() {
        let p = classical(&[2.5; 4], &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(solve_h_bisection(&p).unwrap(), 2.5);
    }

    #[test]
    fn odd_symmetry() {
        let p = classical(&[-1.0, 1.0], &[1.0, 1.0]);
        assert!(solve_h_bisection(&p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn three_agent_example() {
        let p = classical(&[0.0, 1.0, 3.0], &[1.0, 1.0, 1.0]);
        assert!(p.residual(1.13) < 0.0 && p.residual(1.14) > 0.0);
        let h = solve_h_bisection(&p).unwrap();
        assert!(h > 1.13 && h < 1.14);
        assert!(p.residual(h).abs() <= 1e-10 * 3.0);
    }

    #[test]
    fn partials_symmetric() {
        let p = classical(&[0.7; 5], &[1.0; 5]);
        let d = h_partials(&p, 0.7).unwrap();
        for w in d.dh_df {
            assert!((w - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn stale_solution_rejected() {
        let p = classical(&[0.0, 1.0, 3.0], &[1.0, 1.0, 1.0]);
        assert!(matches!(h_partials(&p, 2.0), Err(EmergentError::StaleSolution { .. })));
    }

    #[test]
    fn blended_mean() {
        let fields = [VectorField::parse("0").unwrap(), VectorField::parse("2").unwrap()];
        assert_eq!(blended_rhs(0.0, 0.0, &fields).unwrap(), 1.0);
    }

    #[test]
    fn problem_validation() {
        assert_eq!(HProblem::new(vec![], vec![], vec![]).unwrap_err(), EmergentError::Empty);
        assert_eq!(
            HProblem::new(vec![1.0], vec![0.0], vec![CouplingSpec::Log]).unwrap_err(),
            EmergentError::NonPositiveWeight(0)
        );
    }
}
