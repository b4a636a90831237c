use alloc::vec::Vec;

use super::{simulate_emergent, solve_h, EmergentError, EmergentMode, EmergentSpec, EmergentTrajectory, HProblem};
use crate::grid::grids_match;
use crate::median::{weighted_median_set, MedianSet};
use crate::netsim::{integrate, Scenario, SimError, TrajectoryRecord};
use crate::shape::FunnelSpec;

/// The two quantities that shrink with the funnel scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    /// `sup_{t ≥ t0+τ, i} |xᵢ(t) − ξ(t)|`.
    pub sup_state_err: f64,
    /// `sup_{t ≥ t0+τ, i} |νᵢ/ψᵢ − μᵢ⁻¹(f_em(t, x_s) − fᵢ(t, x_s))|`.
    pub sup_ratio_err: f64,
}

/// Compares a network run against an emergent run on the same grid. The
/// emergent run may extend past the end of the record.
pub fn compare(
    rec: &TrajectoryRecord,
    em: &EmergentTrajectory,
    s: &Scenario,
    tau: f64,
) -> Result<ComparisonReport, EmergentError> {
    if em.times.len() < rec.len() || !grids_match(&rec.times, &em.times[..rec.len()]) {
        return Err(EmergentError::GridMismatch);
    }
    let couplings = s.couplings();
    let cutoff = s.t0() + tau;
    let slack = 1e-9 * (1.0 + cutoff.abs());
    let mut report = ComparisonReport { sup_state_err: 0.0, sup_ratio_err: 0.0 };
    for (k, &t) in rec.times.iter().enumerate() {
        if t < cutoff - slack {
            continue;
        }
        let x = &rec.x[k];
        let x_s = x.iter().sum::<f64>() / x.len() as f64;
        let f = s
            .agents()
            .iter()
            .enumerate()
            .map(|(index, a)| a.f.eval(t, x_s).map_err(|error| EmergentError::Field { index, error }))
            .collect::<Result<Vec<f64>, _>>()?;
        let f_em = solve_h(&HProblem::new(f.clone(), rec.psi[k].clone(), couplings.clone())?)?;
        for i in 0..x.len() {
            report.sup_state_err = report.sup_state_err.max((x[i] - em.xi[k]).abs());
            let target = couplings[i].mu_inv(f_em - f[i]);
            report.sup_ratio_err = report.sup_ratio_err.max((rec.ratio[k][i] - target).abs());
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eps: f64,
    pub sup_state_err: f64,
    pub sup_ratio_err: f64,
    pub max_input: f64,
    pub breach: bool,
}

/// Runs the template with funnels `ε·ψᵢ` for each `ε` and compares every run
/// with the emergent trajectory from the common initial state. Since the
/// emergent field does not depend on the funnel scale, the emergent run is
/// computed once. A breached run yields a row with `breach = true` and NaN
/// errors.
pub fn epsilon_sweep(
    template: &Scenario,
    base_funnels: &[FunnelSpec],
    eps_list: &[f64],
    tau: f64,
    mode: EmergentMode,
) -> Result<Vec<SweepRow>, EmergentError> {
    let x0 = template.initial_states();
    if x0.iter().any(|x| *x != x0[0]) {
        return Err(EmergentError::NotSynchronized);
    }
    if base_funnels.len() != template.n() {
        return Err(EmergentError::DimensionMismatch { expected: template.n(), got: base_funnels.len() });
    }
    let spec = EmergentSpec::new(template.fields(), base_funnels.to_vec(), template.couplings())?;
    let em = simulate_emergent(x0[0], template.t0(), template.t_end(), template.dt(), mode, &spec)?;
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let funnels = base_funnels.iter().map(|f| f.clone().scaled(eps)).collect::<Result<Vec<_>, _>>()?;
        let s = template.to_builder().funnels(funnels).build().map_err(EmergentError::Scenario)?;
        match integrate(&s) {
            Ok(rec) => {
                let c = compare(&rec, &em, &s, tau)?;
                rows.push(SweepRow {
                    eps,
                    sup_state_err: c.sup_state_err,
                    sup_ratio_err: c.sup_ratio_err,
                    max_input: rec.summary.max_input,
                    breach: false,
                });
            }
            Err(SimError::FunnelBreach(b)) => rows.push(SweepRow {
                eps,
                sup_state_err: f64::NAN,
                sup_ratio_err: f64::NAN,
                max_input: b.partial.summary.max_input,
                breach: true,
            }),
            Err(e) => return Err(EmergentError::Simulation(e)),
        }
    }
    Ok(rows)
}

/// Where the average state lands after the fast transient from a
/// non-synchronized start, next to the weighted median of the initial states
/// (weights `ψᵢ(t0)`). Whether the two coincide is an open conjecture; this
/// only measures it.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialStateExperiment {
    pub x_s0: f64,
    pub x_s_after: f64,
    pub median: MedianSet,
    pub distance: f64,
}

pub fn initial_state_experiment(s: &Scenario, eps: f64, tau: f64) -> Result<InitialStateExperiment, EmergentError> {
    let funnels = s.funnels().into_iter().map(|f| f.scaled(eps)).collect::<Result<Vec<_>, _>>()?;
    let scaled = s
        .to_builder()
        .funnels(funnels.clone())
        .horizon(s.t0(), s.t0() + tau)
        .build()
        .map_err(EmergentError::Scenario)?;
    let rec = integrate(&scaled).map_err(EmergentError::Simulation)?;
    let x0 = s.initial_states();
    let weights = funnels.iter().map(|f| f.value(s.t0())).collect::<Result<Vec<_>, _>>()?;
    let median = weighted_median_set(&x0, &weights);
    let x_s_after = *rec.average_state().last().ok_or(EmergentError::Empty)?;
    Ok(InitialStateExperiment {
        x_s0: x0.iter().sum::<f64>() / x0.len() as f64,
        x_s_after,
        distance: median.distance(x_s_after),
        median,
    })
}
