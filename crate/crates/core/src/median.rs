//! Weighted medians and the distributed median network
//! `ẋᵢ = fᵢ* − xᵢ + μ(νᵢ/ψ(t))`.
//!
//! With a near-signum coupling (`|μ⁻¹(s)| ≥ 1 − ε` for `|s| ≥ η`) and an
//! admissible `ε`, the emergent equilibrium `h_μ(f*)` lies within `η` of the
//! weighted median set, and the network states follow it as `ψ → 0`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::emergent::{solve_h_bisection, EmergentError, HProblem};
use crate::graph::Graph;
use crate::netsim::{Agent, Scenario, ScenarioError};
use crate::shape::{CouplingSpec, FunnelSpec};
use crate::vfield::VectorField;

/// Largest `N` for which unequal weights are handled by subset enumeration.
pub const MAX_SUBSET_SCAN: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MedianSet {
    Point(f64),
    Interval(f64, f64),
}

impl MedianSet {
    /// Distance from `h` to the set.
    pub fn distance(&self, h: f64) -> f64 {
        let (a, b) = match *self {
            MedianSet::Point(p) => (p, p),
            MedianSet::Interval(a, b) => (a, b),
        };
        0.0f64.max(a - h).max(h - b)
    }

    pub fn contains(&self, h: f64) -> bool {
        self.distance(h) == 0.0
    }
}

impl fmt::Display for MedianSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MedianSet::Point(p) => write!(f, "{{{p}}}"),
            MedianSet::Interval(a, b) => write!(f, "[{a}, {b}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MedianError {
    Empty,
    DimensionMismatch { values: usize, weights: usize },
    NonPositiveWeight(usize),
    TooManySubsets(usize),
    EpsilonTooLarge { eps: f64, eps_max: f64 },
    FunnelNotVanishing,
    Scenario(ScenarioError),
    Emergent(EmergentError),
}

impl fmt::Display for MedianError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MedianError::Empty => write!(f, "no values"),
            MedianError::DimensionMismatch { values, weights } => {
                write!(f, "{values} values but {weights} weights")
            }
            MedianError::NonPositiveWeight(i) => write!(f, "weight {i} is not positive"),
            MedianError::TooManySubsets(n) => {
                write!(f, "unequal weights need a subset scan, limited to {MAX_SUBSET_SCAN} agents (got {n})")
            }
            MedianError::EpsilonTooLarge { eps, eps_max } => {
                write!(f, "eps = {eps} is not below the admissible bound {eps_max}")
            }
            MedianError::FunnelNotVanishing => write!(f, "the median network needs a funnel that tends to zero"),
            MedianError::Scenario(e) => write!(f, "{e}"),
            MedianError::Emergent(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for MedianError {}

fn threshold_tolerance(total: f64) -> f64 {
    4.0 * f64::EPSILON * total
}

/// Weighted median set with `ψ_thr = ½Σψ`: scanning the values in ascending
/// order, the first value at which the cumulative weight exceeds `ψ_thr`
/// is the median; if the cumulative weight hits `ψ_thr` exactly, the median
/// is the interval up to the next value. Cumulative sums within a few
/// rounding units of `ψ_thr` count as hitting it.
///
/// # Panics
/// If `values` is empty or the lengths differ.
pub fn weighted_median_set(values: &[f64], weights: &[f64]) -> MedianSet {
    assert!(!values.is_empty(), "weighted median of an empty collection");
    assert_eq!(values.len(), weights.len(), "one weight per value");
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let total: f64 = weights.iter().sum();
    let thr = 0.5 * total;
    let tol = threshold_tolerance(total);
    let mut cum = 0.0;
    for (k, &i) in order.iter().enumerate() {
        cum += weights[i];
        if (cum - thr).abs() <= tol && k + 1 < order.len() {
            let (a, b) = (values[i], values[order[k + 1]]);
            return if a == b { MedianSet::Point(a) } else { MedianSet::Interval(a, b) };
        }
        if cum > thr {
            return MedianSet::Point(values[i]);
        }
    }
    MedianSet::Point(values[order[order.len() - 1]])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsilonBound {
    /// `min_K (Σ_K ψ/Σψ − ½)` over subsets with `Σ_K ψ > ½Σψ`.
    pub delta: f64,
    /// `4δ/(2δ + 1)`.
    pub eps_max: f64,
}

/// Admissible near-signum parameter: `ε < ε_max`. Equal weights use the
/// closed form `δ = 1/(2N)`, `ε_max = 2/(N + 1)`; unequal weights are scanned
/// over all subsets.
pub fn median_epsilon_bound(weights: &[f64]) -> Result<EpsilonBound, MedianError> {
    let n = weights.len();
    if n == 0 {
        return Err(MedianError::Empty);
    }
    if let Some(i) = weights.iter().position(|w| !(*w > 0.0) || !w.is_finite()) {
        return Err(MedianError::NonPositiveWeight(i));
    }
    if weights.iter().all(|w| *w == weights[0]) {
        let delta = 1.0 / (2.0 * n as f64);
        return Ok(EpsilonBound { delta, eps_max: 2.0 / (n as f64 + 1.0) });
    }
    if n > MAX_SUBSET_SCAN {
        return Err(MedianError::TooManySubsets(n));
    }
    let total: f64 = weights.iter().sum();
    let thr = 0.5 * total;
    let tol = threshold_tolerance(total);
    // Gray-code walk: one weight enters or leaves per step
    let mut sum = 0.0;
    let mut best = f64::INFINITY;
    let mut prev_gray: u32 = 0;
    for k in 1u32..(1u32 << n) {
        let gray = k ^ (k >> 1);
        let bit = (gray ^ prev_gray).trailing_zeros() as usize;
        if gray & (1 << bit) != 0 {
            sum += weights[bit];
        } else {
            sum -= weights[bit];
        }
        prev_gray = gray;
        if sum > thr + tol {
            best = best.min(sum);
        }
    }
    let delta = best / total - 0.5;
    Ok(EpsilonBound { delta, eps_max: 4.0 * delta / (2.0 * delta + 1.0) })
}

/// Median network over `graph` with `fᵢ = fᵢ* − x`, near-signum couplings and
/// one shared funnel. `x0` defaults to all zeros.
#[allow(clippy::too_many_arguments)]
pub fn build_median_scenario(
    values: &[f64],
    graph: Graph,
    eps: f64,
    eta: f64,
    funnel: FunnelSpec,
    x0: Option<&[f64]>,
    t_end: f64,
    dt: f64,
) -> Result<Scenario, MedianError> {
    let n = values.len();
    let bound = median_epsilon_bound(&vec![1.0; n])?;
    if !(eps < bound.eps_max) {
        return Err(MedianError::EpsilonTooLarge { eps, eps_max: bound.eps_max });
    }
    if funnel.limit() != 0.0 {
        return Err(MedianError::FunnelNotVanishing);
    }
    let coupling = CouplingSpec::NearSignum { eps, eta };
    coupling.validate().map_err(|error| MedianError::Scenario(ScenarioError::Coupling { index: 0, error }))?;
    let zeros = vec![0.0; n];
    let x0 = x0.unwrap_or(&zeros);
    let mut agents = Vec::with_capacity(n);
    for (i, v) in values.iter().enumerate() {
        let f = VectorField::parse(&format!("({v:?}) - x")).expect("affine drive always parses");
        agents.push(Agent { f, funnel: funnel.clone(), coupling, x0: x0.get(i).copied().unwrap_or(0.0) });
    }
    let t0 = funnel.start_time().max(0.0);
    let t0 = if t0.is_finite() { t0 } else { 0.0 };
    Scenario::builder(graph, agents).horizon(t0, t_end).step(dt).build().map_err(MedianError::Scenario)
}

/// `h_μ(f*)` for constant weights, the equilibrium of `ξ̇ = h_μ(f*) − ξ`.
pub fn median_emergent_fixed_point(
    values: &[f64],
    couplings: &[CouplingSpec],
    weights: &[f64],
) -> Result<f64, MedianError> {
    let p = HProblem::new(values.to_vec(), weights.to_vec(), couplings.to_vec()).map_err(MedianError::Emergent)?;
    solve_h_bisection(&p).map_err(MedianError::Emergent)
}
