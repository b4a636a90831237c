use alloc::vec::Vec;

use super::{Scenario, TrajectoryRecord};
use crate::emergent::{solve_h, EmergentError, EmergentTrajectory, HProblem};
use crate::grid::grids_match;

/// Slow/fast coordinates of a closed-loop run relative to its emergent
/// trajectory `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub times: Vec<f64>,
    /// `x_s = (1/N) Σ xᵢ`.
    pub x_s: Vec<f64>,
    /// `f_em(t, x_s)`.
    pub f_em: Vec<f64>,
    /// `y = −(1/ψ̲)(ΛRᵀx + Rᵀ col(ψᵢ μᵢ⁻¹(f_em − fᵢ)))`, length `N − 1`.
    pub y: Vec<Vec<f64>>,
    /// `V = |x_s − ξ|`.
    pub v: Vec<f64>,
    /// `W = yᵀΛ⁻¹y`.
    pub w: Vec<f64>,
}

pub fn diagnostics(
    rec: &TrajectoryRecord,
    s: &Scenario,
    emergent: &EmergentTrajectory,
) -> Result<Diagnostics, EmergentError> {
    if !grids_match(&rec.times, &emergent.times) {
        return Err(EmergentError::GridMismatch);
    }
    let spectrum = s.spectrum();
    let basis = spectrum.basis();
    let lambda = spectrum.lambda();
    let couplings = s.couplings();
    let mut out = Diagnostics {
        times: rec.times.clone(),
        x_s: Vec::with_capacity(rec.len()),
        f_em: Vec::with_capacity(rec.len()),
        y: Vec::with_capacity(rec.len()),
        v: Vec::with_capacity(rec.len()),
        w: Vec::with_capacity(rec.len()),
    };
    for (k, &t) in rec.times.iter().enumerate() {
        let x = &rec.x[k];
        let psi = &rec.psi[k];
        let x_s = x.iter().sum::<f64>() / x.len() as f64;
        let f = s
            .agents()
            .iter()
            .enumerate()
            .map(|(index, a)| a.f.eval(t, x_s).map_err(|error| EmergentError::Field { index, error }))
            .collect::<Result<Vec<f64>, _>>()?;
        let p = HProblem::new(f.clone(), psi.clone(), couplings.clone())?;
        let f_em = solve_h(&p)?;
        let c: Vec<f64> = (0..x.len()).map(|i| psi[i] * couplings[i].mu_inv(f_em - f[i])).collect();
        let psi_min = psi.iter().copied().fold(f64::INFINITY, f64::min);
        let rx = basis.tr_mul_vec(x);
        let rc = basis.tr_mul_vec(&c);
        let y: Vec<f64> = (0..lambda.len()).map(|j| -(lambda[j] * rx[j] + rc[j]) / psi_min).collect();
        let w = y.iter().zip(lambda).map(|(yj, l)| yj * yj / l).sum();
        out.x_s.push(x_s);
        out.f_em.push(f_em);
        out.v.push((x_s - emergent.xi[k]).abs());
        out.y.push(y);
        out.w.push(w);
    }
    Ok(out)
}
