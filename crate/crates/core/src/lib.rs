//! Exact packing of sets and induced subgraphs under pairwise overlap
//! constraints, by a bounded search tree whose size depends only on k and r.

pub mod alpha;
pub mod cli;
pub mod error;
pub mod gen;
pub mod graph;
pub mod instance;
pub mod oracle;
pub mod pch;
pub mod solver;

pub use alpha::{build_predicate, validate_well_conditioned, AlphaSpec, OverlapPredicate, Predicate, Verdict};
pub use error::{Error, Result};
pub use graph::{reduce_to_set_instance, Graph, GraphInstance, PiSpec};
pub use instance::{parse_instance, validate_solution, ElementSet, SetFamily, SetSystemInstance, Solution, Universe};
pub use pch::{solve_pch, ClusterHeads, PchConfig};
pub use solver::{solve, solve_with_config, SolveReport, SolverConfig};
