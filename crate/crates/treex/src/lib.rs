//! treex: simulation and verification of energy-budgeted multi-agent
//! exploration of initially unknown trees.
//!
//! The crate bundles a port-labeled tree model with a text format, an
//! execution engine with a shared knowledge map and replayable traces,
//! agent strategies (directional DFS, a subtree-splitting algorithm, a
//! nearest-stub baseline), exact and analytic offline optima, two adaptive
//! adversaries, and the analysis layer that turns the provable guarantees
//! of these constructions into runtime checks.

pub mod adversary;
pub mod analysis;
pub mod engine;
pub mod generate;
pub mod oracle;
pub mod strategy;
pub mod tree;
pub mod verify;
pub mod cli;
