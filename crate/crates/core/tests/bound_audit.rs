use ddtruss::miqp::BoundMode;
use ddtruss::testing::random_instance;
use ddtruss::{solve_exact, Assignment, MiqpOptions, StateSolver};

/// Objectives of every complete assignment, odometer order.
fn all_completions(solver: &StateSolver, p: &nalgebra::DVector<f64>) -> Vec<(Vec<u32>, f64)> {
    let m = solver.model().member_count();
    let d = solver.data().len() as u32;
    let mut out = Vec::new();
    let mut digits = vec![0u32; m];
    loop {
        let assignment = Assignment::new(digits.clone(), m, d as usize).unwrap();
        let state = solver.solve_fixed_assignment(&assignment, p).unwrap();
        out.push((digits.clone(), state.objective));
        let mut pos = m;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < d {
                break;
            }
            digits[pos] = 0;
        }
    }
}

fn audit(seed: u64, mode: BoundMode) {
    let inst = random_instance(seed);
    let solver = StateSolver::new(&inst.model, &inst.data, inst.c).unwrap();
    let completions = all_completions(&solver, &inst.p);

    let report = solve_exact(
        &solver,
        &inst.p,
        &MiqpOptions {
            bound: mode,
            collect_trace: true,
            disable_pruning: true,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(!report.trace.is_empty());

    for event in &report.trace {
        let best_beneath = completions
            .iter()
            .filter(|(digits, _)| {
                event
                    .slots
                    .iter()
                    .zip(digits)
                    .all(|(slot, &j)| slot.is_none() || *slot == Some(j))
            })
            .map(|&(_, objective)| objective)
            .fold(f64::INFINITY, f64::min);
        let tol = 1e-9 * best_beneath.abs().max(1.0);
        assert!(
            event.lower_bound <= best_beneath + tol,
            "seed {seed} {mode:?}: bound {} exceeds best completion {} at depth {}",
            event.lower_bound,
            best_beneath,
            event.depth
        );
        if let Some(parent) = event.parent_bound {
            let tol = 1e-9 * parent.abs().max(1.0);
            assert!(
                event.lower_bound >= parent - tol,
                "seed {seed} {mode:?}: child bound {} fell below parent {}",
                event.lower_bound,
                parent
            );
        }
    }
}

#[test]
fn baseline_bounds_are_valid_and_monotone() {
    for seed in 0..12 {
        audit(seed, BoundMode::Baseline);
    }
}

#[test]
fn box_bounds_are_valid_and_monotone() {
    for seed in 0..12 {
        audit(seed, BoundMode::BoxDual);
    }
}
