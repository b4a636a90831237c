//! Heterogeneous scalar multi-agent systems under node-wise funnel coupling.
//!
//! Each agent runs `ẋᵢ = fᵢ(t, xᵢ) + μᵢ(νᵢ / ψᵢ(t))` where `νᵢ` is the weighted
//! sum of neighbour differences and `ψᵢ` is a prescribed performance funnel.
//! The crate covers:
//!
//! * [`graph`]: weighted undirected graphs, Laplacians and their spectra.
//! * [`shape`]: performance functions `ψ` and coupling functions `μ`.
//! * [`vfield`]: a small expression language for `f(t, x)` with exact partials.
//! * [`netsim`]: closed-loop integration with funnel-guarded stepping.
//! * [`emergent`]: the implicit emergent vector field, its solvers and
//!   sensitivities, and network-vs-emergent comparison.
//! * [`median`]: weighted medians and the distributed median network.
//!
//! The crate is `no_std` and only needs `alloc`; file formats and the command
//! line live in the companion `funnelsync` crate.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod emergent;
pub mod graph;
pub mod grid;
pub mod linalg;
pub mod median;
pub mod netsim;
pub mod shape;
pub mod vfield;

pub use emergent::{EmergentMode, EmergentTrajectory, HProblem};
pub use graph::{Graph, GraphError, Spectrum};
pub use grid::TimeGrid;
pub use median::{MedianError, MedianSet};
pub use netsim::{Agent, Scenario, ScenarioError, SimError, TrajectoryRecord};
pub use shape::{CouplingSpec, FunnelSpec, ShapeError};
pub use vfield::{VectorField, VfError};
