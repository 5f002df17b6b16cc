//! Data-driven solvers for truss elasticity.
//!
//! Instead of fitting a constitutive law, these solvers work directly on a
//! set of observed (strain, stress) pairs: they seek member states that
//! satisfy compatibility and equilibrium exactly while staying as close as
//! possible, in a weighted phase-space metric, to some point of the data
//! set. Selecting which data point each member snaps to is a combinatorial
//! choice; this crate provides an exact branch-and-bound solver, a fast
//! alternating heuristic, and a brute-force enumerator for cross-checking.

pub use nalgebra;

pub mod dataset;
pub mod error;
pub mod heuristic;
pub mod linalg;
pub mod miqp;
pub mod oracle;
pub mod state_solver;
pub mod testing;
pub mod truss_model;

pub use dataset::{
    generate_synthetic, CurveSpec, MaterialDataset, MaterialPoint, Weighting, WeightingEstimate,
};
pub use error::{Error, Result};
pub use heuristic::{solve_heuristic, HeuristicOptions, HeuristicReport, InitialAssignment};
pub use miqp::{solve_exact, BoundMode, ExactReport, MiqpOptions, PartialAssignment, SolveStatus};
pub use oracle::{brute_force, DEFAULT_ENUMERATION_LIMIT};
pub use state_solver::{Assignment, MechanicalState, ReferenceStiffness, StateSolver};
pub use truss_model::{Member, Node, TrussModel};
