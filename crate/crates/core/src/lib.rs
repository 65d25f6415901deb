//! Spatial random networks (kNN graphs, planar β-skeletons), their
//! power-weighted edge-length functionals, and the influence-zone
//! optimization that sets the upper-tail rate of those functionals.

pub mod cli;
pub mod conditions;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod graphs;
pub mod influence;
pub mod optimizer;
pub mod point_process;
pub mod rng;
pub mod scores;

pub use error::{Error, Result};
pub use rng::Seed;
