use alloc::vec::Vec;

use super::Scenario;
use crate::shape::{validate_couplings, validate_funnel_set, CouplingSetReport, FunnelSetReport};

/// Region sampled for `f(t, x)`: the scenario horizon in `t` and
/// `[x_min, x_max]` in `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub x_min: f64,
    pub x_max: f64,
}

impl SampleBox {
    /// The hull of the initial states widened by `margin` on both sides.
    pub fn around_initial_states(s: &Scenario, margin: f64) -> SampleBox {
        let x0 = s.initial_states();
        let lo = x0.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = x0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        SampleBox { x_min: lo - margin, x_max: hi + margin }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentReport {
    pub affine_in_x: bool,
    /// Recognised as globally Lipschitz in `x` from its structure.
    pub globally_lipschitz: bool,
    /// Sampled `max |∂f/∂x|`.
    pub lipschitz_estimate: f64,
    /// Sampled `max |∂f/∂t|`.
    pub theta_f: f64,
    /// `c` with `∂f/∂x ≤ −c < 0` on every sample.
    pub contraction: Option<f64>,
    /// Solutions of `ẋ = f(t, x)` exist for all time.
    pub complete_solutions: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioWarning {
    /// Neither globally Lipschitz nor contractive; existence of complete
    /// solutions is left to the author.
    UnrecognisedDynamics { index: usize },
    /// Evaluation failed at a sample point.
    EvaluationFailed { index: usize, t: f64, x: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioReport {
    pub agents: Vec<AgentReport>,
    pub funnels: FunnelSetReport,
    pub couplings: CouplingSetReport,
    pub warnings: Vec<ScenarioWarning>,
}

impl ScenarioReport {
    /// Every agent has complete solutions and the funnel and coupling
    /// assumptions hold.
    pub fn standing_assumptions_hold(&self) -> bool {
        self.agents.iter().all(|a| a.complete_solutions)
            && self.funnels.passed()
            && self.couplings.standing_assumption_holds()
    }
}

/// Samples each `fᵢ` on a `samples × samples` grid over the horizon and the
/// box, and delegates funnel and coupling checks to the shape validators.
pub fn validate_scenario(s: &Scenario, samples: usize, bx: SampleBox) -> ScenarioReport {
    let samples = samples.max(2);
    let (t0, t1) = (s.t0(), s.t_end());
    let mut warnings = Vec::new();
    let mut agents = Vec::with_capacity(s.n());
    for (index, a) in s.agents().iter().enumerate() {
        let st = a.f.structure();
        let mut lip: f64 = 0.0;
        let mut theta: f64 = 0.0;
        let mut max_slope = f64::NEG_INFINITY;
        let mut failed = false;
        for i in 0..samples {
            let t = t0 + (t1 - t0) * i as f64 / (samples - 1) as f64;
            for j in 0..samples {
                let x = bx.x_min + (bx.x_max - bx.x_min) * j as f64 / (samples - 1) as f64;
                match a.f.eval_with_partials(t, x) {
                    Ok(p) => {
                        lip = lip.max(p.df_dx.abs());
                        theta = theta.max(p.df_dt.abs());
                        max_slope = max_slope.max(p.df_dx);
                    }
                    Err(_) => {
                        if !failed {
                            warnings.push(ScenarioWarning::EvaluationFailed { index, t, x });
                        }
                        failed = true;
                    }
                }
            }
        }
        let contraction = (!failed && max_slope < 0.0).then_some(-max_slope);
        let complete_solutions = st.globally_lipschitz || contraction.is_some();
        if !complete_solutions {
            warnings.push(ScenarioWarning::UnrecognisedDynamics { index });
        }
        agents.push(AgentReport {
            affine_in_x: st.affine_in_x,
            globally_lipschitz: st.globally_lipschitz,
            lipschitz_estimate: lip,
            theta_f: theta,
            contraction,
            complete_solutions,
        });
    }
    ScenarioReport {
        agents,
        funnels: validate_funnel_set(&s.funnels(), (t0, t1), samples),
        couplings: validate_couplings(&s.couplings(), samples),
        warnings,
    }
}
