//! Mission-planning solver for multi-UAV scenarios.
//!
//! A mission assigns tasks to a swarm of UAVs controlled by ground control
//! stations (GCS), subject to sensor, temporal, fuel, range and airspace
//! constraints. Candidate plans are encoded as six-allele chromosomes,
//! evaluated by a constraint-checking fitness function, and searched with an
//! NSGA-II loop whose individual generation and mutation can be biased by
//! weighted random strategies (nearer UAVs/GCSs and smaller crews are
//! sampled more often).
//!
//! Module map:
//! - [`model`] — scenario domain types, validation, synthetic generation
//! - [`pathfind`] — grid construction, Theta* NFZ avoidance, route metrics
//! - [`plan`] — chromosome encoding, decoding, search-space accounting
//! - [`csp`] — timeline propagation, constraint checking, objectives
//! - [`weights`] — weighted strategies and the biased individual generator
//! - [`moea`] — NSGA-II machinery and the evolutionary loop
//! - [`metrics`] — hypervolume, Kruskal–Wallis, z-scores, RadViz

pub mod csp;
// pub mod metrics;
pub mod model;
pub mod moea;
pub mod pathfind;
pub mod plan;
pub mod weights;

pub use csp::{Evaluator, ObjectiveVector, Timeline, ViolationReport};
pub use model::{DatasetSpec, GeoPoint, Scenario};
pub use moea::{Evaluation, RunConfig, RunResult};
pub use plan::Chromosome;
pub use weights::{StrategyKind, StrategyTriple};
