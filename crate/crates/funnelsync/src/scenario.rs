//! Scenario files.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "t0": 0, "t_end": 20, "dt": 0.001,
//!   "graph": {"n": 2, "edges": [[0, 1, 1.0]]},
//!   "agents": [
//!     {"f": "1", "funnel": {"family": "constant", "psi0": 1}, "coupling": {"family": "classical", "kappa": 1}, "x0": 0},
//!     {"f": "-1", "funnel": {"family": "constant", "psi0": 1}, "coupling": {"family": "classical", "kappa": 1}, "x0": 0}
//!   ]
//! }
//! ```
//!
//! The graph may instead name a family:
//! `{"family": "ring", "n": 5, "weight": 1}`; the `random` family also takes
//! an edge probability `p` and draws from the top-level `seed`.

use std::path::Path;

use funnelsync_core::netsim::DEFAULT_GUARD_MARGIN;
use funnelsync_core::{Agent, CouplingSpec, FunnelSpec, Graph, GraphError, Scenario, ScenarioError, VectorField};
use serde::{Deserialize, Serialize};

use crate::graphs::random_connected;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid scenario JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported schema version {0}, expected {SCHEMA_VERSION}")]
    Schema(u32),
    #[error("agent {index}: {source}")]
    Field { index: usize, source: funnelsync_core::VfError },
    #[error("graph: {0}")]
    Graph(#[from] GraphError),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Scenario(#[from] ScenarioError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default = "schema_version")]
    pub schema: u32,
    #[serde(default)]
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard_margin: Option<f64>,
    pub graph: GraphDoc,
    pub agents: Vec<AgentDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphDoc {
    Edges(EdgeList),
    Family(GraphFamily),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeList {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphFamily {
    Path {
        n: usize,
        #[serde(default = "unit")]
        weight: f64,
    },
    Ring {
        n: usize,
        #[serde(default = "unit")]
        weight: f64,
    },
    Complete {
        n: usize,
        #[serde(default = "unit")]
        weight: f64,
    },
    Star {
        n: usize,
        #[serde(default = "unit")]
        weight: f64,
    },
    /// Random spanning tree plus each remaining pair with probability `p`.
    Random {
        n: usize,
        #[serde(default = "unit")]
        weight: f64,
        p: f64,
    },
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentDoc {
    pub f: String,
    pub funnel: FunnelDoc,
    pub coupling: CouplingDoc,
    #[serde(default)]
    pub x0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunnelDoc {
    ExpToEta {
        psi0: f64,
        eta: f64,
        lambda: f64,
        #[serde(default)]
        t0: f64,
    },
    Constant {
        psi0: f64,
    },
    Scaled {
        inner: Box<FunnelDoc>,
        factor: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CouplingDoc {
    Classical { kappa: f64 },
    Log,
    LocallyLinear { mf_bar: f64 },
    NearSignum { eps: f64, eta: f64 },
}

impl FunnelDoc {
    pub fn to_spec(&self) -> Result<FunnelSpec, funnelsync_core::ShapeError> {
        match self {
            FunnelDoc::ExpToEta { psi0, eta, lambda, t0 } => FunnelSpec::exp_to_eta(*psi0, *eta, *lambda, *t0),
            FunnelDoc::Constant { psi0 } => FunnelSpec::constant(*psi0),
            FunnelDoc::Scaled { inner, factor } => inner.to_spec()?.scaled(*factor),
        }
    }
}

impl From<CouplingDoc> for CouplingSpec {
    fn from(c: CouplingDoc) -> Self {
        match c {
            CouplingDoc::Classical { kappa } => CouplingSpec::Classical { kappa },
            CouplingDoc::Log => CouplingSpec::Log,
            CouplingDoc::LocallyLinear { mf_bar } => CouplingSpec::LocallyLinear { mf_bar },
            CouplingDoc::NearSignum { eps, eta } => CouplingSpec::NearSignum { eps, eta },
        }
    }
}

impl GraphDoc {
    pub fn to_graph(&self, seed: u64) -> Result<Graph, LoadError> {
        Ok(match *self {
            GraphDoc::Edges(ref e) => Graph::new(e.n, &e.edges)?,
            GraphDoc::Family(GraphFamily::Path { n, weight }) => Graph::path(n, weight)?,
            GraphDoc::Family(GraphFamily::Ring { n, weight }) => Graph::ring(n, weight)?,
            GraphDoc::Family(GraphFamily::Complete { n, weight }) => Graph::complete(n, weight)?,
            GraphDoc::Family(GraphFamily::Star { n, weight }) => Graph::star(n, weight)?,
            GraphDoc::Family(GraphFamily::Random { n, weight, p }) => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(LoadError::Invalid(format!("edge probability {p} is not in [0, 1]")));
                }
                random_connected(n, p, weight, seed)?
            }
        })
    }
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<ScenarioFile, LoadError> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        if file.schema != SCHEMA_VERSION {
            return Err(LoadError::Schema(file.schema));
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<ScenarioFile, LoadError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
        ScenarioFile::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario documents always serialize")
    }

    pub fn build(&self) -> Result<Scenario, LoadError> {
        let graph = self.graph.to_graph(self.seed.unwrap_or(0))?;
        let mut agents = Vec::with_capacity(self.agents.len());
        for (index, a) in self.agents.iter().enumerate() {
            let f = VectorField::parse(&a.f).map_err(|source| LoadError::Field { index, source })?;
            let funnel =
                a.funnel.to_spec().map_err(|error| LoadError::Scenario(ScenarioError::Funnel { index, error }))?;
            agents.push(Agent { f, funnel, coupling: a.coupling.into(), x0: a.x0 });
        }
        let mut b = Scenario::builder(graph, agents)
            .horizon(self.t0, self.t_end)
            .step(self.dt)
            .guard_margin(self.guard_margin.unwrap_or(DEFAULT_GUARD_MARGIN));
        if let Some(m) = self.dt_min {
            b = b.dt_min(m);
        }
        Ok(b.build()?)
    }
}
