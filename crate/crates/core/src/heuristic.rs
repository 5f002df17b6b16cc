//! Alternating fixed-point solver.
//!
//! Alternates two exact block minimizations: solve the equilibrium state
//! for the current data-point assignment, then reassign every member to
//! the data point nearest its new (strain, stress). Stops when the
//! assignment is stable or an iteration cap is reached. Fast and usually
//! good, but only a local method: the exact solver can beat it.

use std::collections::HashMap;

use nalgebra::DVector;

use crate::error::Result;
use crate::state_solver::{Assignment, MechanicalState, StateSolver};

/// Starting assignment for the alternating loop.
#[derive(Debug, Clone, Default)]
pub enum InitialAssignment {
    /// Assign each member to the data point nearest the unloaded state
    /// (strain 0, stress 0).
    #[default]
    ZeroState,
    /// Start from a caller-supplied assignment.
    Given(Assignment),
}

#[derive(Debug, Clone)]
pub struct HeuristicOptions {
    /// Maximum number of full (solve + reassign) iterations.
    pub max_iterations: usize,
    pub init: InitialAssignment,
    /// Abort with `converged = false` as soon as an assignment repeats.
    /// Off by default: plain runs rely on the iteration cap alone.
    pub detect_cycles: bool,
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            init: InitialAssignment::ZeroState,
            detect_cycles: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HeuristicReport {
    pub converged: bool,
    pub iterations: usize,
    pub state: MechanicalState,
    pub assignment: Assignment,
    /// Objective value after each state solve, one entry per iteration.
    pub trace: Vec<f64>,
}

/// Assignment sending each member to its nearest data point at zero strain
/// and zero stress.
pub fn zero_state_assignment(solver: &StateSolver) -> Assignment {
    let model = solver.model();
    let data = solver.data();
    let indices = (0..model.member_count())
        .map(|i| {
            let (j, _) = data.nearest(0.0, 0.0, solver.weighting(), model.volume(i));
            j as u32
        })
        .collect();
    Assignment::new(indices, model.member_count(), data.len()).expect("indices in range")
}

fn reassign(solver: &StateSolver, state: &MechanicalState) -> Assignment {
    let model = solver.model();
    let data = solver.data();
    let indices = (0..model.member_count())
        .map(|i| {
            let (j, _) = data.nearest(
                state.strain[i],
                state.stress[i],
                solver.weighting(),
                model.volume(i),
            );
            j as u32
        })
        .collect();
    Assignment::new(indices, model.member_count(), data.len()).expect("indices in range")
}

pub fn solve_heuristic(
    solver: &StateSolver,
    p: &DVector<f64>,
    options: &HeuristicOptions,
) -> Result<HeuristicReport> {
    assert!(options.max_iterations >= 1, "iteration cap must be >= 1");
    let mut assignment = match &options.init {
        InitialAssignment::ZeroState => zero_state_assignment(solver),
        InitialAssignment::Given(a) => Assignment::new(
            a.indices().to_vec(),
            solver.model().member_count(),
            solver.data().len(),
        )?,
    };

    let mut seen: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let mut state = None;

    for iter in 1..=options.max_iterations {
        iterations = iter;
        if options.detect_cycles {
            seen.insert(assignment.indices().to_vec(), iter);
        }
        let current = solver.solve_fixed_assignment(&assignment, p)?;
        trace.push(current.objective);
        let next = reassign(solver, &current);
        state = Some(current);
        if next == assignment {
            converged = true;
            break;
        }
        if options.detect_cycles && seen.contains_key(next.indices()) {
            break;
        }
        assignment = next;
    }

    Ok(HeuristicReport {
        converged,
        iterations,
        state: state.expect("at least one iteration ran"),
        assignment,
        trace,
    })
}
