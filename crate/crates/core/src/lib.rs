//! Simulator of multi-unit organizations searching NK performance landscapes.
//!
//! Agents own disjoint subsets of `N` binary decisions, hill-climb individually
//! or in ring-neighbour pairs, learn which decisions interact, and may trade
//! tasks every `tau` periods. The [`engine`] runs parameter grids with
//! reproducible seeding and [`analysis`] turns the resulting datasets into
//! partial-dependence, efficiency and summary tables.

pub mod agents;
pub mod analysis;
pub mod beliefs;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod engine;
pub mod error;
pub mod landscape;
pub mod reallocation;
pub mod rng;

pub use error::{Error, Result};
pub use landscape::{DecisionVector, InfluenceMatrix, Landscape, MatrixKind};
