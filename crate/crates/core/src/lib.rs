//! Cache-aware DAG task model with node collapse and federated scheduling.

pub mod cli;
pub mod collapse;
pub mod evaluation;
pub mod federated;
pub mod generator;
pub mod io;
pub mod metrics;
pub mod rng;
pub mod simulator;
pub mod store;
pub mod taskgraph;
pub mod wceto;
