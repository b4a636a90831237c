//! Funnel-guarded time stepping.
//!
//! Each step first bounds the stiffness of the closed loop by the Gershgorin
//! radius `ρ = maxᵢ(|∂fᵢ/∂x| + 2dᵢ μᵢ′(vᵢ)/ψᵢ)` of its Jacobian. While `ρ·h`
//! stays inside the real stability interval of classical RK4 the step is taken
//! with RK4, sub-stepping if needed. Once the gain `μ′/ψ` grows too large for
//! that (funnels shrinking towards zero) steps switch to the L-stable
//! two-stage Rosenbrock scheme ROS2 with embedded error control. In both
//! cases every stage point and every endpoint must keep `|νᵢ/ψᵢ|` below
//! `1 − guard_margin`; otherwise the step is rejected and halved, down to
//! `dt_min`.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use super::record::{Outcome, TrajectoryRecord};
use super::{diffusive_terms_into, Scenario, SimError};
use crate::linalg::{Lu, Matrix};

/// Details of a step that could not be kept inside the funnels.
#[derive(Debug, Clone, PartialEq)]
pub struct BreachReport {
    /// Time of the failing trial point.
    pub t: f64,
    pub index: usize,
    pub ratio: f64,
    pub last_safe_t: f64,
    pub last_safe_state: Vec<f64>,
    /// Everything recorded on the grid before the breach.
    pub partial: TrajectoryRecord,
}

/// Largest `ρ·h` for which RK4 steps are taken.
const RK4_STABILITY: f64 = 1.0;
/// RK4 sub-stepping is used while it needs at most this many sub-steps per
/// grid interval.
const MAX_RK4_SUBSTEPS: f64 = 16.0;
const ROS2_GAMMA: f64 = 1.0 + core::f64::consts::FRAC_1_SQRT_2;
const ATOL: f64 = 1e-10;
const RTOL: f64 = 1e-8;
const RATIO_TOL: f64 = 1e-7;

enum Failure {
    Guard { index: usize, ratio: f64 },
    Closed,
    Hard(SimError),
}

/// Right-hand side and, on request, the data for its Jacobian.
struct Eval {
    rhs: Vec<f64>,
    nu: Vec<f64>,
    u: Vec<f64>,
    ratio: Vec<f64>,
    psi: Vec<f64>,
    /// `∂fᵢ/∂x`.
    fx: Vec<f64>,
    /// `∂Fᵢ/∂t` at fixed `x`.
    ft: Vec<f64>,
    /// `μᵢ′(vᵢ)/ψᵢ`.
    gain: Vec<f64>,
}

impl Eval {
    fn new(n: usize) -> Eval {
        Eval {
            rhs: vec![0.0; n],
            nu: vec![0.0; n],
            u: vec![0.0; n],
            ratio: vec![0.0; n],
            psi: vec![0.0; n],
            fx: vec![0.0; n],
            ft: vec![0.0; n],
            gain: vec![0.0; n],
        }
    }
}

struct Stepper<'a> {
    s: &'a Scenario,
    limit: f64,
    laplacian: Matrix,
    degree: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(s: &'a Scenario) -> Self {
        let laplacian = s.spectrum().laplacian().clone();
        let degree = (0..s.n()).map(|i| laplacian[(i, i)]).collect();
        Stepper { s, limit: 1.0 - s.guard_margin(), laplacian, degree }
    }

    /// Funnel values and guard check only.
    fn guard(&self, t: f64, x: &[f64], out: &mut Eval) -> Result<(), Failure> {
        diffusive_terms_into(self.s.graph(), x, &mut out.nu).map_err(Failure::Hard)?;
        for (index, a) in self.s.agents().iter().enumerate() {
            let fv = a.funnel.eval(t).map_err(|error| Failure::Hard(SimError::Funnel { index, error }))?;
            if !(fv.value > 0.0) || !fv.value.is_finite() {
                return Err(Failure::Closed);
            }
            let ratio = out.nu[index] / fv.value;
            if !(ratio.abs() < self.limit) {
                return Err(Failure::Guard { index, ratio });
            }
            out.psi[index] = fv.value;
            out.ratio[index] = ratio;
            out.ft[index] = fv.derivative;
        }
        Ok(())
    }

    fn eval(&self, t: f64, x: &[f64], jacobian: bool, out: &mut Eval) -> Result<(), Failure> {
        self.guard(t, x, out)?;
        for (index, a) in self.s.agents().iter().enumerate() {
            let ratio = out.ratio[index];
            let u = a.coupling.mu(ratio).map_err(|_| Failure::Guard { index, ratio })?;
            let hard = |error| Failure::Hard(SimError::Field { index, error });
            out.u[index] = u;
            if jacobian {
                let p = a.f.eval_with_partials(t, x[index]).map_err(hard)?;
                let mu_p = a.coupling.mu_prime(ratio).map_err(|_| Failure::Guard { index, ratio })?;
                let psi = out.psi[index];
                let psi_dot = out.ft[index];
                out.rhs[index] = p.value + u;
                out.fx[index] = p.df_dx;
                out.gain[index] = mu_p / psi;
                out.ft[index] = p.df_dt - mu_p * ratio * psi_dot / psi;
            } else {
                out.rhs[index] = a.f.eval(t, x[index]).map_err(hard)? + u;
            }
        }
        Ok(())
    }

    fn stiffness(&self, e: &Eval) -> f64 {
        (0..self.s.n()).map(|i| e.fx[i].abs() + 2.0 * self.degree[i] * e.gain[i]).fold(0.0, f64::max)
    }

    /// One RK4 step from an evaluated start point.
    fn rk4(&self, t: f64, x: &[f64], h: f64, k1: &[f64], scratch: &mut Eval) -> Result<Vec<f64>, Failure> {
        let n = x.len();
        let mut y = vec![0.0; n];
        let mut acc: Vec<f64> = k1.to_vec();
        let stages = [(0.5, 2.0), (0.5, 2.0), (1.0, 1.0)];
        let mut prev: Vec<f64> = k1.to_vec();
        for (c, w) in stages {
            for i in 0..n {
                y[i] = x[i] + c * h * prev[i];
            }
            self.eval(t + c * h, &y, false, scratch)?;
            for i in 0..n {
                acc[i] += w * scratch.rhs[i];
            }
            prev.copy_from_slice(&scratch.rhs);
        }
        for i in 0..n {
            y[i] = x[i] + h / 6.0 * acc[i];
        }
        Ok(y)
    }

    /// One ROS2 step; returns the new state and the scaled error.
    fn ros2(&self, t: f64, x: &[f64], h: f64, start: &Eval, scratch: &mut Eval) -> Result<(Vec<f64>, f64), Failure> {
        let n = x.len();
        let gh = ROS2_GAMMA * h;
        let mut m = Matrix::identity(n);
        for i in 0..n {
            for j in 0..n {
                let mut jij = -start.gain[i] * self.laplacian[(i, j)];
                if i == j {
                    jij += start.fx[i];
                }
                m[(i, j)] -= gh * jij;
            }
        }
        let lu = Lu::factor(m).ok_or(Failure::Guard { index: 0, ratio: f64::NAN })?;
        let b1: Vec<f64> = (0..n).map(|i| start.rhs[i] + gh * start.ft[i]).collect();
        let k1 = lu.solve(&b1);
        let y1: Vec<f64> = (0..n).map(|i| x[i] + h * k1[i]).collect();
        self.eval(t + h, &y1, false, scratch)?;
        let b2: Vec<f64> = (0..n).map(|i| scratch.rhs[i] - 2.0 * k1[i] - gh * start.ft[i]).collect();
        let k2 = lu.solve(&b2);
        let y: Vec<f64> = (0..n).map(|i| x[i] + h * (1.5 * k1[i] + 0.5 * k2[i])).collect();
        let err: Vec<f64> = (0..n).map(|i| 0.5 * h * (k1[i] + k2[i])).collect();

        self.guard(t + h, &y, scratch)?;
        let mut nu_err = vec![0.0; n];
        diffusive_terms_into(self.s.graph(), &err, &mut nu_err).map_err(Failure::Hard)?;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let scale = ATOL + RTOL * x[i].abs().max(y[i].abs());
            worst = worst.max(err[i].abs() / scale);
            // ν cannot be resolved below the rounding of the states it is
            // computed from
            let resolution = 64.0
                * f64::EPSILON
                * (self.degree[i] * y[i].abs() + self.s.graph().neighbors(i).map(|(j, w)| w * y[j].abs()).sum::<f64>());
            let ratio_scale = RATIO_TOL.max(resolution / scratch.psi[i]);
            worst = worst.max(nu_err[i].abs() / scratch.psi[i] / ratio_scale);
        }
        Ok((y, worst))
    }
}

/// Integrates the closed loop over the scenario's grid.
///
/// Returns the record on success or when a funnel closes; a step that
/// cannot be kept inside the funnels at `dt_min` yields
/// [`SimError::FunnelBreach`] carrying the last safe state and the partial
/// record.
pub fn integrate(s: &Scenario) -> Result<TrajectoryRecord, SimError> {
    let n = s.n();
    let grid = *s.grid();
    let st = Stepper::new(s);
    let mut rec = TrajectoryRecord::empty();
    let mut x = s.initial_states();
    let mut start = Eval::new(n);
    let mut scratch = Eval::new(n);

    let mut t = grid.t0();
    match st.eval(t, &x, false, &mut start) {
        Ok(()) => rec.push(t, &x, &start.nu, &start.u, &start.ratio, &start.psi),
        Err(Failure::Hard(e)) => return Err(e),
        Err(Failure::Closed) => {
            rec.summary.outcome = Outcome::FunnelClosed { t };
            return Ok(rec);
        }
        Err(Failure::Guard { index, ratio }) => return Err(breach(t, index, ratio, t, &x, rec)),
    }

    let mut h_stiff = grid.dt();
    for k in 0..grid.steps() {
        let t_next = grid.time(k + 1);
        while t < t_next {
            let rem = t_next - t;
            match st.eval(t, &x, true, &mut start) {
                Ok(()) => {}
                Err(Failure::Hard(e)) => return Err(e),
                Err(Failure::Closed) => {
                    rec.summary.outcome = Outcome::FunnelClosed { t: *rec.times.last().unwrap_or(&t) };
                    return Ok(rec);
                }
                Err(Failure::Guard { index, ratio }) => return Err(breach(t, index, ratio, t, &x, rec)),
            }
            let rho = st.stiffness(&start);
            let explicit = rho * rem <= RK4_STABILITY || RK4_STABILITY / rho >= rem / MAX_RK4_SUBSTEPS;
            let mut h = if explicit && rho > 0.0 {
                rem.min(RK4_STABILITY / rho)
            } else if explicit {
                rem
            } else {
                h_stiff.min(rem)
            };
            loop {
                let last = h >= rem;
                let t_new = if last { t_next } else { t + h };
                let attempt = if explicit {
                    st.rk4(t, &x, h, &start.rhs, &mut scratch)
                        .and_then(|y| st.guard(t_new, &y, &mut scratch).map(|_| (y, 0.0)))
                } else {
                    st.ros2(t, &x, h, &start, &mut scratch)
                };
                match attempt {
                    Ok((y, err)) if err <= 1.0 || h <= s.dt_min() => {
                        if !explicit {
                            let factor = if err > 0.0 { 0.9 / libm::sqrt(err) } else { 5.0 };
                            h_stiff = (h * factor.clamp(0.2, 5.0)).clamp(s.dt_min(), grid.dt());
                        }
                        x = y;
                        t = t_new;
                        rec.summary.runtime_steps += 1;
                        break;
                    }
                    Ok((_, err)) => {
                        rec.summary.rejected_steps += 1;
                        h = (h * (0.9 / libm::sqrt(err)).clamp(0.2, 0.9)).max(s.dt_min());
                    }
                    Err(Failure::Guard { index, ratio }) => {
                        rec.summary.rejected_steps += 1;
                        h *= 0.5;
                        if h < s.dt_min() {
                            return Err(breach(t_new, index, ratio, t, &x, rec));
                        }
                    }
                    Err(Failure::Closed) => {
                        rec.summary.outcome = Outcome::FunnelClosed { t: *rec.times.last().unwrap_or(&t) };
                        return Ok(rec);
                    }
                    Err(Failure::Hard(e)) => return Err(e),
                }
            }
        }
        match st.eval(t, &x, false, &mut start) {
            Ok(()) => rec.push(t, &x, &start.nu, &start.u, &start.ratio, &start.psi),
            Err(Failure::Hard(e)) => return Err(e),
            Err(Failure::Closed) => {
                rec.summary.outcome = Outcome::FunnelClosed { t: *rec.times.last().unwrap_or(&t) };
                return Ok(rec);
            }
            Err(Failure::Guard { index, ratio }) => return Err(breach(t, index, ratio, t, &x, rec)),
        }
    }
    Ok(rec)
}

fn breach(t: f64, index: usize, ratio: f64, last_safe_t: f64, x: &[f64], mut partial: TrajectoryRecord) -> SimError {
    partial.summary.breach = true;
    SimError::FunnelBreach(Box::new(BreachReport {
        t,
        index,
        ratio,
        last_safe_t,
        last_safe_state: x.to_vec(),
        partial,
    }))
}
