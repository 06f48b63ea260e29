//! Deterministic 2D autonomous-exploration stack built around a dual-level
//! topological map: a uniformly sampled low-level graph for frontier
//! detection and navigation, an eroded high-level graph of convex region
//! nodes for exploration sequencing, and a local potential-field motion
//! controller. A headless grid-world simulator and a benchmark harness
//! compare the full stack against greedy frontier baselines.

pub mod bench;
pub mod error;
pub mod geom;
pub mod grid;
pub mod htg;
pub mod ltg;
pub mod lapf;
pub mod planner;
pub mod plot;
pub mod scenario;
pub mod sim;
pub mod strategy;

pub use error::{Error, Result};
pub use geom::{Cell, Point, Vec2};
pub use grid::{CellState, GridDiff, OccupancyGrid};
