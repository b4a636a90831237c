//! Scenario files, CSV/JSON artifacts and the `funnelsync` command line on
//! top of `funnelsync-core`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod graphs;
pub mod output;
pub mod scenario;

pub use scenario::{LoadError, ScenarioFile};
