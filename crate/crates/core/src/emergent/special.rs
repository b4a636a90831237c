//! Interval-wise solvers for homogeneous Classical and Log couplings.
//!
//! Sorting the drives `f_{i_1} ≤ … ≤ f_{i_N}` fixes the sign of every
//! `h − f_{i_k}` on each interval `[f_{i_j}, f_{i_{j+1}}]`, which removes the
//! absolute values from `μ⁻¹`. On that interval the Classical equation
//! becomes the rational (equivalently degree-`N` polynomial) equation
//!
//! ```text
//! Σ_{k≤j} ψ_{i_k}(h − f_{i_k})/(1 + h − f_{i_k}) + Σ_{k>j} ψ_{i_k}(h − f_{i_k})/(1 − h + f_{i_k}) = 0
//! ```
//!
//! and the Log equation becomes a quadratic in `h̄ = eʰ`.

use alloc::vec::Vec;

use super::{bisect, polish, EmergentError, HProblem};
use crate::shape::CouplingSpec;

/// Sorted `(f, ψ)` pairs.
fn sorted(p: &HProblem) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = p.f.iter().copied().zip(p.psi.iter().copied()).collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

/// Visits the non-degenerate intervals in order and returns the first one on
/// which `H` changes sign, or the left endpoint when `H` vanishes there.
enum Located {
    Endpoint(f64),
    Interval(usize, f64, f64),
}

fn locate(g: &[(f64, f64)], residual: impl Fn(usize, f64) -> f64) -> Result<Located, EmergentError> {
    for j in 0..g.len() - 1 {
        let (a, b) = (g[j].0, g[j + 1].0);
        if a == b {
            continue;
        }
        if residual(j, b) < 0.0 {
            continue;
        }
        let ra = residual(j, a);
        if ra >= 0.0 {
            return Ok(Located::Endpoint(a));
        }
        return Ok(Located::Interval(j, a, b));
    }
    Err(EmergentError::BracketFailure)
}

/// Classical couplings with a common `κ`, solved on `f/κ`, scaled back and
/// polished on the unscaled `H`.
pub fn solve_h_classical(p: &HProblem) -> Result<f64, EmergentError> {
    let kappa = match p.couplings.first() {
        Some(CouplingSpec::Classical { kappa }) => *kappa,
        _ => return Err(EmergentError::NotClassical),
    };
    if p.couplings.iter().any(|c| *c != CouplingSpec::Classical { kappa }) {
        return Err(EmergentError::NotClassical);
    }
    let mut g = sorted(p);
    for e in g.iter_mut() {
        e.0 /= kappa;
    }
    if g[0].0 == g[g.len() - 1].0 {
        return Ok(kappa * g[0].0);
    }
    // restriction of H to interval j, with the signs fixed
    let interval_h = |j: usize, h: f64| -> f64 {
        let mut s = 0.0;
        for (k, &(fk, wk)) in g.iter().enumerate() {
            let d = h - fk;
            s += if k <= j { wk * d / (1.0 + d) } else { wk * d / (1.0 - d) };
        }
        s
    };
    Ok(match locate(&g, interval_h)? {
        Located::Endpoint(a) => kappa * a,
        Located::Interval(j, a, b) => {
            polish(p, kappa * bisect(|h| interval_h(j, h), a, b, p.tol), kappa * a, kappa * b)
        }
    })
}

/// Log couplings; on each interval solves `a·h̄² + b·h̄ + c = 0` for
/// `h̄ = e^{h − s}` where `s` is the interval's left end.
pub fn solve_h_log(p: &HProblem) -> Result<f64, EmergentError> {
    if p.couplings.iter().any(|c| *c != CouplingSpec::Log) {
        return Err(EmergentError::NotLog);
    }
    let g = sorted(p);
    if g[0].0 == g[g.len() - 1].0 {
        return Ok(g[0].0);
    }
    let located = locate(&g, |_, h| p.residual(h))?;
    let (j, lo, hi) = match located {
        Located::Endpoint(a) => return Ok(a),
        Located::Interval(j, a, b) => (j, a, b),
    };
    let shift = lo;
    let mut qa = 0.0;
    let mut qb = 0.0;
    let mut qc = 0.0;
    for (k, &(fk, wk)) in g.iter().enumerate() {
        if k <= j {
            qb += wk;
            qc -= wk * libm::exp(fk - shift);
        } else {
            qb -= wk;
            qa += wk * libm::exp(-(fk - shift));
        }
    }
    let disc = libm::sqrt(qb * qb - 4.0 * qa * qc);
    let root = if qb >= 0.0 { 2.0 * qc / (-qb - disc) } else { (-qb + disc) / (2.0 * qa) };
    let h = shift + libm::log(root);
    Ok(if h.is_finite() { polish(p, h.clamp(lo, hi), lo, hi) } else { super::solve_h_bisection(p)? })
}
