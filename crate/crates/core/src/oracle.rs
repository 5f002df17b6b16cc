//! Brute-force ground truth: evaluate every one of the d^m assignments.
//!
//! No pruning on purpose. This module is the independent reference the
//! branch-and-bound solver is tested against, so it must stay dumb.

use std::time::Instant;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::miqp::{ExactReport, SolveStatus};
use crate::state_solver::{Assignment, StateSolver};

pub const DEFAULT_ENUMERATION_LIMIT: u128 = 1_000_000;

/// Enumerates all assignments in lexicographic order and returns the first
/// one achieving the minimum objective. Errors with `TooLarge` when d^m
/// exceeds `enumeration_limit`.
pub fn brute_force(
    solver: &StateSolver,
    p: &DVector<f64>,
    enumeration_limit: u128,
) -> Result<ExactReport> {
    let start = Instant::now();
    let m = solver.model().member_count();
    let d = solver.data().len();

    let total = (d as u128)
        .checked_pow(m as u32)
        .ok_or(Error::TooLarge {
            assignments: u128::MAX,
            limit: enumeration_limit,
        })?;
    if total > enumeration_limit {
        return Err(Error::TooLarge {
            assignments: total,
            limit: enumeration_limit,
        });
    }

    let mut digits = vec![0u32; m];
    let mut best: Option<(f64, Assignment, crate::state_solver::MechanicalState)> = None;
    let mut evaluated = 0u64;
    loop {
        let assignment = Assignment::new(digits.clone(), m, d).expect("digits in range");
        let state = solver.solve_fixed_assignment(&assignment, p)?;
        evaluated += 1;
        if best
            .as_ref()
            .map(|(obj, _, _)| state.objective < *obj)
            .unwrap_or(true)
        {
            best = Some((state.objective, assignment, state));
        }

        // Advance the last digit fastest, lexicographic over the whole tuple.
        let mut pos = m;
        while pos > 0 {
            pos -= 1;
            digits[pos] += 1;
            if (digits[pos] as usize) < d {
                break;
            }
            digits[pos] = 0;
            if pos == 0 {
                let (objective, assignment, state) = best.expect("at least one assignment");
                return Ok(ExactReport {
                    objective,
                    state,
                    assignment,
                    nodes_explored: evaluated,
                    wall_time: start.elapsed(),
                    gap: 0.0,
                    status: SolveStatus::Optimal,
                    trace: Vec::new(),
                });
            }
        }
    }
}
