use alloc::vec::Vec;

use super::{solve_h, EmergentError, EmergentSpec};
use crate::grid::TimeGrid;
use crate::shape::share_common_shape;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmergentMode {
    /// `ξ̇ = f_em(t, ξ)` with `H(h) = 0` solved at every stage.
    Direct,
    /// `ξ̇ = χ` with `χ̇` from the implicit-function derivative of `H`.
    TwoDim,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmergentTrajectory {
    pub times: Vec<f64>,
    pub xi: Vec<f64>,
    /// `f_em` along the trajectory; the integrated `χ` in two-dimensional mode.
    pub chi: Vec<f64>,
    pub mode: EmergentMode,
    /// Two-dimensional mode: largest `|χ − h(t, ξ)|` seen by the drift
    /// monitor, which checks every 100 steps and at the end.
    pub max_drift: Option<f64>,
}

const DRIFT_CHECK_EVERY: usize = 100;

/// Classical RK4 on the nominal grid `t0, t0 + dt, …, t_end`.
pub fn simulate_emergent(
    xi0: f64,
    t0: f64,
    t_end: f64,
    dt: f64,
    mode: EmergentMode,
    spec: &EmergentSpec,
) -> Result<EmergentTrajectory, EmergentError> {
    let grid = TimeGrid::new(t0, t_end, dt).ok_or(EmergentError::GridMismatch)?;
    match mode {
        EmergentMode::Direct => direct(xi0, &grid, spec),
        EmergentMode::TwoDim => two_dim(xi0, &grid, spec),
    }
}

fn direct(xi0: f64, grid: &TimeGrid, spec: &EmergentSpec) -> Result<EmergentTrajectory, EmergentError> {
    let rhs = |t: f64, xi: f64| solve_h(&spec.problem(t, xi)?);
    let mut out = EmergentTrajectory {
        times: grid.times(),
        xi: Vec::with_capacity(grid.len()),
        chi: Vec::with_capacity(grid.len()),
        mode: EmergentMode::Direct,
        max_drift: None,
    };
    let mut xi = xi0;
    let mut k1 = rhs(grid.t0(), xi)?;
    out.xi.push(xi);
    out.chi.push(k1);
    for k in 0..grid.steps() {
        let t = grid.time(k);
        let h = grid.time(k + 1) - t;
        let k2 = rhs(t + 0.5 * h, xi + 0.5 * h * k1)?;
        let k3 = rhs(t + 0.5 * h, xi + 0.5 * h * k2)?;
        let k4 = rhs(t + h, xi + h * k3)?;
        xi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        k1 = rhs(grid.time(k + 1), xi)?;
        out.xi.push(xi);
        out.chi.push(k1);
    }
    Ok(out)
}

fn two_dim(xi0: f64, grid: &TimeGrid, spec: &EmergentSpec) -> Result<EmergentTrajectory, EmergentError> {
    let n = spec.n();
    let common = share_common_shape(&spec.funnels);
    // (ξ̇, χ̇)
    let rhs = |t: f64, xi: f64, chi: f64| -> Result<(f64, f64), EmergentError> {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            let p =
                spec.fields[i].eval_with_partials(t, xi).map_err(|error| EmergentError::Field { index: i, error })?;
            let fv = spec.funnels[i].eval(t)?;
            let c = spec.couplings[i];
            let w = fv.value * c.mu_inv_prime(chi - p.value);
            num += w * (p.df_dt + p.df_dx * chi);
            if !common {
                num -= fv.derivative * c.mu_inv(chi - p.value);
            }
            den += w;
        }
        if !(den > 0.0) || !den.is_finite() {
            return Err(EmergentError::DegenerateDerivative);
        }
        Ok((chi, num / den))
    };
    let drift =
        |t: f64, xi: f64, chi: f64| -> Result<f64, EmergentError> { Ok((chi - solve_h(&spec.problem(t, xi)?)?).abs()) };

    let mut out = EmergentTrajectory {
        times: grid.times(),
        xi: Vec::with_capacity(grid.len()),
        chi: Vec::with_capacity(grid.len()),
        mode: EmergentMode::TwoDim,
        max_drift: Some(0.0),
    };
    let mut xi = xi0;
    let mut chi = solve_h(&spec.problem(grid.t0(), xi0)?)?;
    let mut max_drift: f64 = 0.0;
    out.xi.push(xi);
    out.chi.push(chi);
    for k in 0..grid.steps() {
        let t = grid.time(k);
        let h = grid.time(k + 1) - t;
        let a = rhs(t, xi, chi)?;
        let b = rhs(t + 0.5 * h, xi + 0.5 * h * a.0, chi + 0.5 * h * a.1)?;
        let c = rhs(t + 0.5 * h, xi + 0.5 * h * b.0, chi + 0.5 * h * b.1)?;
        let d = rhs(t + h, xi + h * c.0, chi + h * c.1)?;
        xi += h / 6.0 * (a.0 + 2.0 * b.0 + 2.0 * c.0 + d.0);
        chi += h / 6.0 * (a.1 + 2.0 * b.1 + 2.0 * c.1 + d.1);
        if (k + 1) % DRIFT_CHECK_EVERY == 0 || k + 1 == grid.steps() {
            max_drift = max_drift.max(drift(grid.time(k + 1), xi, chi)?);
        }
        out.xi.push(xi);
        out.chi.push(chi);
    }
    out.max_drift = Some(max_drift);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::{CouplingSpec, FunnelSpec};
    use crate::vfield::VectorField;
    use alloc::vec;

    fn homogeneous() -> EmergentSpec {
        EmergentSpec::new(
            vec![VectorField::parse("-x").unwrap(); 3],
            vec![FunnelSpec::exp_to_eta(1.0, 0.1, 1.0, 0.0).unwrap(); 3],
            vec![CouplingSpec::Classical { kappa: 1.0 }; 3],
        )
        .unwrap()
    }

    #[test]
    fn homogeneous_decay_both_modes() {
        for mode in [EmergentMode::Direct, EmergentMode::TwoDim] {
            let tr = simulate_emergent(3.0, 0.0, 2.0, 1e-2, mode, &homogeneous()).unwrap();
            for (t, xi) in tr.times.iter().zip(&tr.xi) {
                assert!((xi - 3.0 * libm::exp(-t)).abs() < 1e-9, "{mode:?}");
            }
        }
    }

    #[test]
    fn drift_is_monitored() {
        let tr = simulate_emergent(3.0, 0.0, 2.0, 1e-2, EmergentMode::TwoDim, &homogeneous()).unwrap();
        assert!(tr.max_drift.unwrap() < 1e-9);
    }
}
