//! Closed-loop network `ẋᵢ = fᵢ(t, xᵢ) + μᵢ(νᵢ/ψᵢ(t))` with `ν = −𝓛x`.

mod diagnostics;
mod integrate;
mod record;
mod validate;

pub use diagnostics::{diagnostics, Diagnostics};
pub use integrate::{integrate, BreachReport};
pub use record::{Outcome, RecordSummary, TrajectoryRecord};
pub use validate::{validate_scenario, AgentReport, SampleBox, ScenarioReport, ScenarioWarning};

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::graph::{Graph, GraphError, Spectrum};
use crate::grid::TimeGrid;
use crate::shape::{CouplingSpec, FunnelSpec, ShapeError};
use crate::vfield::{VectorField, VfError};

pub const DEFAULT_GUARD_MARGIN: f64 = 1e-9;

/// One agent: its own dynamics, funnel and coupling.
#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    pub f: VectorField,
    pub funnel: FunnelSpec,
    pub coupling: CouplingSpec,
    pub x0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioError {
    Graph(GraphError),
    NoAgents,
    AgentCountMismatch { nodes: usize, agents: usize },
    InvalidTimeGrid(&'static str),
    InvalidGuardMargin(f64),
    Funnel { index: usize, error: ShapeError },
    Coupling { index: usize, error: ShapeError },
    NonFiniteInitialState(usize),
    InitialOutsideFunnel { index: usize, ratio: f64 },
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Graph(e) => write!(f, "{e}"),
            ScenarioError::NoAgents => write!(f, "scenario has no agents"),
            ScenarioError::AgentCountMismatch { nodes, agents } => {
                write!(f, "graph has {nodes} nodes but {agents} agents were given")
            }
            ScenarioError::InvalidTimeGrid(msg) => write!(f, "invalid time grid: {msg}"),
            ScenarioError::InvalidGuardMargin(g) => write!(f, "guard margin {g} is not in (0, 1)"),
            ScenarioError::Funnel { index, error } => write!(f, "agent {index} funnel: {error}"),
            ScenarioError::Coupling { index, error } => write!(f, "agent {index} coupling: {error}"),
            ScenarioError::NonFiniteInitialState(i) => write!(f, "agent {i} has a non-finite initial state"),
            ScenarioError::InitialOutsideFunnel { index, ratio } => {
                write!(f, "agent {index} starts outside its funnel: |nu/psi| = {ratio} >= 1")
            }
        }
    }
}

impl core::error::Error for ScenarioError {}

impl From<GraphError> for ScenarioError {
    fn from(e: GraphError) -> Self {
        ScenarioError::Graph(e)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    DimensionMismatch {
        expected: usize,
        got: usize,
    },
    /// `|νᵢ/ψᵢ| ≥ 1` where the coupling is undefined.
    FunnelDomainBreach {
        index: usize,
        t: f64,
        ratio: f64,
    },
    Funnel {
        index: usize,
        error: ShapeError,
    },
    Field {
        index: usize,
        error: VfError,
    },
    /// The guard kept failing at the minimum step. Either an assumption is
    /// violated or the integrator cannot resolve the dynamics at `dt_min`.
    FunnelBreach(Box<BreachReport>),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::DimensionMismatch { expected, got } => {
                write!(f, "expected {expected} states, got {got}")
            }
            SimError::FunnelDomainBreach { index, t, ratio } => {
                write!(f, "agent {index} left its funnel at t = {t} (|nu/psi| = {ratio})")
            }
            SimError::Funnel { index, error } => write!(f, "agent {index} funnel: {error}"),
            SimError::Field { index, error } => write!(f, "agent {index} vector field: {error}"),
            SimError::FunnelBreach(b) => write!(
                f,
                "funnel breach by agent {} near t = {} (|nu/psi| = {}); last safe state at t = {}. \
                 Either a standing assumption is violated or dt_min is too coarse for the dynamics",
                b.index, b.t, b.ratio, b.last_safe_t
            ),
        }
    }
}

impl core::error::Error for SimError {}

/// Immutable closed-loop problem. Construct with [`ScenarioBuilder`].
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    graph: Graph,
    spectrum: Spectrum,
    agents: Vec<Agent>,
    grid: TimeGrid,
    dt_min: f64,
    guard_margin: f64,
}

#[derive(Debug, Clone)]
pub struct ScenarioBuilder {
    graph: Graph,
    agents: Vec<Agent>,
    t0: f64,
    t_end: f64,
    dt: f64,
    dt_min: Option<f64>,
    guard_margin: f64,
}

impl ScenarioBuilder {
    pub fn new(graph: Graph, agents: Vec<Agent>) -> Self {
        ScenarioBuilder {
            graph,
            agents,
            t0: 0.0,
            t_end: 1.0,
            dt: 1e-3,
            dt_min: None,
            guard_margin: DEFAULT_GUARD_MARGIN,
        }
    }

    pub fn horizon(mut self, t0: f64, t_end: f64) -> Self {
        self.t0 = t0;
        self.t_end = t_end;
        self
    }

    /// Nominal step. `dt_min` defaults to `dt · 1e−9`.
    pub fn step(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn dt_min(mut self, dt_min: f64) -> Self {
        self.dt_min = Some(dt_min);
        self
    }

    pub fn guard_margin(mut self, margin: f64) -> Self {
        self.guard_margin = margin;
        self
    }

    pub fn funnels(mut self, funnels: Vec<FunnelSpec>) -> Self {
        for (a, f) in self.agents.iter_mut().zip(funnels) {
            a.funnel = f;
        }
        self
    }

    pub fn initial_states(mut self, x0: &[f64]) -> Self {
        for (a, x) in self.agents.iter_mut().zip(x0) {
            a.x0 = *x;
        }
        self
    }

    pub fn build(self) -> Result<Scenario, ScenarioError> {
        let n = self.graph.n();
        if self.agents.is_empty() {
            return Err(ScenarioError::NoAgents);
        }
        if self.agents.len() != n {
            return Err(ScenarioError::AgentCountMismatch { nodes: n, agents: self.agents.len() });
        }
        if !self.graph.is_connected() {
            return Err(ScenarioError::Graph(GraphError::NotConnected));
        }
        let grid = TimeGrid::new(self.t0, self.t_end, self.dt)
            .ok_or(ScenarioError::InvalidTimeGrid("need finite t0 < t_end and dt > 0"))?;
        let dt_min = self.dt_min.unwrap_or(self.dt * 1e-9);
        if !(dt_min > 0.0 && dt_min <= self.dt) {
            return Err(ScenarioError::InvalidTimeGrid("need 0 < dt_min <= dt"));
        }
        if !(self.guard_margin > 0.0 && self.guard_margin < 1.0) {
            return Err(ScenarioError::InvalidGuardMargin(self.guard_margin));
        }
        for (index, a) in self.agents.iter().enumerate() {
            a.funnel.validate().map_err(|error| ScenarioError::Funnel { index, error })?;
            a.coupling.validate().map_err(|error| ScenarioError::Coupling { index, error })?;
            if self.t0 < a.funnel.start_time() {
                let error = ShapeError::TimeBeforeStart { t: self.t0, t0: a.funnel.start_time() };
                return Err(ScenarioError::Funnel { index, error });
            }
            if !a.x0.is_finite() {
                return Err(ScenarioError::NonFiniteInitialState(index));
            }
        }
        let spectrum = Spectrum::of(&self.graph)?;
        let x0: Vec<f64> = self.agents.iter().map(|a| a.x0).collect();
        let nu = diffusive_terms(&self.graph, &x0).expect("agent count checked above");
        for (index, a) in self.agents.iter().enumerate() {
            let psi = a.funnel.value(self.t0).map_err(|error| ScenarioError::Funnel { index, error })?;
            let ratio = nu[index].abs() / psi;
            if !(ratio < 1.0) {
                return Err(ScenarioError::InitialOutsideFunnel { index, ratio });
            }
        }
        Ok(Scenario { graph: self.graph, spectrum, agents: self.agents, grid, dt_min, guard_margin: self.guard_margin })
    }
}

impl Scenario {
    pub fn builder(graph: Graph, agents: Vec<Agent>) -> ScenarioBuilder {
        ScenarioBuilder::new(graph, agents)
    }

    /// A builder preloaded with this scenario's settings.
    pub fn to_builder(&self) -> ScenarioBuilder {
        ScenarioBuilder {
            graph: self.graph.clone(),
            agents: self.agents.clone(),
            t0: self.grid.t0(),
            t_end: self.grid.t_end(),
            dt: self.grid.dt(),
            dt_min: Some(self.dt_min),
            guard_margin: self.guard_margin,
        }
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn t0(&self) -> f64 {
        self.grid.t0()
    }

    pub fn t_end(&self) -> f64 {
        self.grid.t_end()
    }

    pub fn dt(&self) -> f64 {
        self.grid.dt()
    }

    pub fn dt_min(&self) -> f64 {
        self.dt_min
    }

    pub fn guard_margin(&self) -> f64 {
        self.guard_margin
    }

    pub fn initial_states(&self) -> Vec<f64> {
        self.agents.iter().map(|a| a.x0).collect()
    }

    pub fn funnels(&self) -> Vec<FunnelSpec> {
        self.agents.iter().map(|a| a.funnel.clone()).collect()
    }

    pub fn couplings(&self) -> Vec<CouplingSpec> {
        self.agents.iter().map(|a| a.coupling).collect()
    }

    pub fn fields(&self) -> Vec<VectorField> {
        self.agents.iter().map(|a| a.f.clone()).collect()
    }
}

/// `νᵢ = Σⱼ α_ij (xⱼ − xᵢ)`, accumulated edge by edge.
pub fn diffusive_terms(graph: &Graph, x: &[f64]) -> Result<Vec<f64>, SimError> {
    let mut nu = vec![0.0; graph.n()];
    diffusive_terms_into(graph, x, &mut nu)?;
    Ok(nu)
}

pub(crate) fn diffusive_terms_into(graph: &Graph, x: &[f64], nu: &mut [f64]) -> Result<(), SimError> {
    if x.len() != graph.n() {
        return Err(SimError::DimensionMismatch { expected: graph.n(), got: x.len() });
    }
    nu.iter_mut().for_each(|v| *v = 0.0);
    for e in graph.edges() {
        let d = e.weight * (x[e.j] - x[e.i]);
        nu[e.i] += d;
        nu[e.j] -= d;
    }
    Ok(())
}

/// `ẋ` of the closed loop at `(t, x)`.
pub fn network_rhs(t: f64, x: &[f64], s: &Scenario) -> Result<Vec<f64>, SimError> {
    let nu = diffusive_terms(&s.graph, x)?;
    s.agents
        .iter()
        .enumerate()
        .map(|(index, a)| {
            let psi = a.funnel.value(t).map_err(|error| SimError::Funnel { index, error })?;
            let ratio = nu[index] / psi;
            let u = a.coupling.mu(ratio).map_err(|_| SimError::FunnelDomainBreach { index, t, ratio })?;
            let f = a.f.eval(t, x[index]).map_err(|error| SimError::Field { index, error })?;
            Ok(f + u)
        })
        .collect()
}
