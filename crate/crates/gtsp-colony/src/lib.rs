//! Solvers, oracles and a benchmark harness for the equality generalized
//! traveling salesman problem (E-GTSP).
//!
//! The crate provides:
//! - [`model`]: instances, tours, cost evaluation and feasibility checks;
//! - [`ingest`]: TSPLIB parsing, center-based clustering, `.gtsp` files and
//!   seeded random instances;
//! - [`solvers`]: five agent-based metaheuristics (ACS, RACS, SACS, SRM,
//!   SSAS) built on a shared pheromone/construction engine;
//! - [`oracle`]: nearest-neighbor construction and exact optima for small
//!   instances (cluster dynamic programming and brute force);
//! - [`bench`]: a reproducible experiment harness with gap tables and
//!   expected-utility rankings.

pub mod bench;
pub mod ingest;
pub mod model;
pub mod oracle;
pub mod solvers;

pub use model::{tour_cost, validate_tour, Instance, Tour};
pub use solvers::{run, Algorithm, SolveResult, SolverParams};
