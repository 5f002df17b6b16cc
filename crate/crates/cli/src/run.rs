use std::fs;
use std::io;
use std::path::Path;
use std::time::Duration;

use ddtruss::nalgebra::DVector;
use ddtruss::{
    brute_force, generate_synthetic, solve_exact, solve_heuristic, CurveSpec, ExactReport,
    HeuristicOptions, HeuristicReport, MaterialDataset, MechanicalState, MiqpOptions, SolveStatus,
    StateSolver, TrussModel, Weighting,
};

use crate::files::{self, SolutionFile, SweepRow};
use crate::{AnalyzeArgs, CliError, GenDataArgs, ModelOpts, SolverKind, SolverOpts, SweepArgs, Timing};

struct LoadedCase {
    model: TrussModel,
    data: MaterialDataset,
    c: f64,
}

fn load(opts: &ModelOpts) -> Result<LoadedCase, CliError> {
    let model = match &opts.model {
        Some(path) => TrussModel::from_path(path)?,
        None => TrussModel::ten_bar(opts.area)?,
    };
    let data = MaterialDataset::from_csv_path(&opts.data)?;
    let c = match opts.weighting {
        Some(value) => Weighting::new(value)?.value(),
        None => data.compute_c()?.weighting.value(),
    };
    Ok(LoadedCase { model, data, c })
}

fn miqp_options(opts: &SolverOpts) -> Result<MiqpOptions, CliError> {
    if !opts.gap_tol.is_finite() || opts.gap_tol < 0.0 {
        return Err(CliError::Flag(format!(
            "--gap-tol must be a nonnegative number, got {}",
            opts.gap_tol
        )));
    }
    let time_limit = match opts.time_limit {
        Some(seconds) if seconds.is_finite() && seconds >= 0.0 => {
            Some(Duration::from_secs_f64(seconds))
        }
        Some(seconds) => {
            return Err(CliError::Flag(format!(
                "--time-limit must be a nonnegative number of seconds, got {seconds}"
            )))
        }
        None => None,
    };
    Ok(MiqpOptions {
        gap_tol: opts.gap_tol,
        time_limit,
        node_limit: opts.node_limit,
        heuristic: heuristic_options(opts),
        bound: if opts.strong_bound {
            ddtruss::BoundMode::BoxDual
        } else {
            ddtruss::BoundMode::Baseline
        },
        ..Default::default()
    })
}

fn heuristic_options(opts: &SolverOpts) -> HeuristicOptions {
    HeuristicOptions {
        max_iterations: opts.heur_cap,
        ..Default::default()
    }
}

enum Outcome {
    Exact(ExactReport),
    Heuristic(HeuristicReport),
}

impl Outcome {
    fn state(&self) -> &MechanicalState {
        match self {
            Outcome::Exact(report) => &report.state,
            Outcome::Heuristic(report) => &report.state,
        }
    }

    fn status_str(&self) -> &'static str {
        match self {
            Outcome::Exact(report) => report.status.as_str(),
            Outcome::Heuristic(report) => {
                if report.converged {
                    "converged"
                } else {
                    "iteration_limit"
                }
            }
        }
    }

    fn hit_limit(&self) -> bool {
        match self {
            Outcome::Exact(report) => report.status != SolveStatus::Optimal,
            Outcome::Heuristic(report) => !report.converged,
        }
    }
}

fn solve_one(
    kind: SolverKind,
    solver: &StateSolver,
    p: &DVector<f64>,
    opts: &SolverOpts,
) -> Result<Outcome, CliError> {
    Ok(match kind {
        SolverKind::Heuristic => {
            Outcome::Heuristic(solve_heuristic(solver, p, &heuristic_options(opts))?)
        }
        SolverKind::Exact => Outcome::Exact(solve_exact(solver, p, &miqp_options(opts)?)?),
        SolverKind::Oracle => Outcome::Exact(brute_force(solver, p, opts.enum_limit)?),
    })
}

fn io_err(path: &Path, source: io::Error) -> CliError {
    CliError::Core(ddtruss::Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn analyze(args: &AnalyzeArgs) -> Result<u8, CliError> {
    let case = load(&args.model)?;
    let solver = StateSolver::new(&case.model, &case.data, case.c)?;
    let p = case.model.load_vector(args.lambda);
    let outcome = solve_one(args.solver.solver, &solver, &p, &args.solver)?;

    let dir = &args.output.out_dir;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;

    let state = outcome.state();
    let wall_time_s = match (&outcome, args.output.timing) {
        (_, Timing::Off) => 0.0,
        (Outcome::Exact(report), Timing::Wall) => report.wall_time.as_secs_f64(),
        (Outcome::Heuristic(_), Timing::Wall) => 0.0,
    };
    let (gap, nodes, iterations, converged, assignment) = match &outcome {
        Outcome::Exact(report) => (
            Some(report.gap),
            Some(report.nodes_explored),
            None,
            None,
            report.assignment.indices().to_vec(),
        ),
        Outcome::Heuristic(report) => (
            None,
            None,
            Some(report.iterations),
            Some(report.converged),
            report.assignment.indices().to_vec(),
        ),
    };
    let solution = SolutionFile {
        solver: match args.solver.solver {
            SolverKind::Heuristic => "heuristic",
            SolverKind::Exact => "exact",
            SolverKind::Oracle => "oracle",
        },
        lambda: args.lambda,
        weighting_pa: case.c,
        objective_j: state.objective,
        status: outcome.status_str().to_string(),
        gap,
        nodes_explored: nodes,
        iterations,
        converged,
        wall_time_s,
        u_m: state.u.iter().copied().collect(),
        strain: state.strain.clone(),
        stress_pa: state.stress.clone(),
        data_strain: state.data_strain.clone(),
        data_stress_pa: state.data_stress.clone(),
        assignment,
    };

    let solution_path = dir.join("solution.json");
    files::write_solution(&solution_path, &solution).map_err(|e| io_err(&solution_path, e))?;
    let phase_path = dir.join("phase_space.csv");
    files::write_phase_space(&phase_path, state).map_err(|e| io_err(&phase_path, e))?;

    println!(
        "objective {:.6e} J, status {}, wrote {} and {}",
        state.objective,
        outcome.status_str(),
        solution_path.display(),
        phase_path.display()
    );
    Ok(if outcome.hit_limit() { 3 } else { 0 })
}

fn parse_lambda_list(text: &str) -> Result<Vec<f64>, CliError> {
    let mut out = Vec::new();
    for token in text.split(',') {
        let token = token.trim();
        if token.is_empty() {
            continue;
        }
        let value: f64 = token
            .parse()
            .map_err(|_| CliError::Flag(format!("--lambda-list: bad multiplier {token:?}")))?;
        if !value.is_finite() {
            return Err(CliError::Flag(format!(
                "--lambda-list: multiplier {token:?} is not finite"
            )));
        }
        out.push(value);
    }
    if out.is_empty() {
        return Err(CliError::Flag(
            "--lambda-list: no load multipliers given".to_string(),
        ));
    }
    Ok(out)
}

pub fn sweep(args: &SweepArgs) -> Result<u8, CliError> {
    let lambdas = parse_lambda_list(&args.lambda_list)?;
    let case = load(&args.model)?;
    let solver = StateSolver::new(&case.model, &case.data, case.c)?;
    let monitor = args.monitor_dof.unwrap_or(case.model.dof_count() - 1);
    if monitor >= case.model.dof_count() {
        return Err(CliError::Flag(format!(
            "--monitor-dof {monitor} out of range, model has {} free DOFs",
            case.model.dof_count()
        )));
    }

    let mut rows = Vec::with_capacity(lambdas.len());
    for &lambda in &lambdas {
        match sweep_row(&solver, &case.model, lambda, monitor, args) {
            Ok(row) => rows.push(row),
            Err(err) => {
                eprintln!("lambda {lambda}: {err}");
                rows.push(SweepRow {
                    lambda,
                    status: "error".to_string(),
                    ..SweepRow::blank(lambda)
                });
            }
        }
    }

    let dir = &args.output.out_dir;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let sweep_path = dir.join("sweep.csv");
    files::write_sweep_csv(&sweep_path, &rows).map_err(|e| io_err(&sweep_path, e))?;
    let path_path = dir.join("path.csv");
    files::write_path_csv(&path_path, &rows).map_err(|e| io_err(&path_path, e))?;

    files::print_table(&rows);
    println!(
        "wrote {} and {}",
        sweep_path.display(),
        path_path.display()
    );
    Ok(0)
}

fn sweep_row(
    solver: &StateSolver,
    model: &TrussModel,
    lambda: f64,
    monitor: usize,
    args: &SweepArgs,
) -> Result<SweepRow, CliError> {
    let p = model.load_vector(lambda);
    let mut row = SweepRow::blank(lambda);

    let heuristic = solve_heuristic(solver, &p, &heuristic_options(&args.solver))?;
    row.heur_iters = Some(heuristic.iterations);
    row.heur_converged = Some(heuristic.converged);
    if heuristic.converged {
        row.heur_obj_mj = Some(heuristic.state.objective * 1e3);
    }

    match args.solver.solver {
        SolverKind::Heuristic => {
            row.status = if heuristic.converged {
                "converged".to_string()
            } else {
                "iteration_limit".to_string()
            };
            row.monitor_disp_m = Some(heuristic.state.u[monitor]);
        }
        kind => {
            let report = match solve_one(kind, solver, &p, &args.solver)? {
                Outcome::Exact(report) => report,
                Outcome::Heuristic(_) => unreachable!("exact or oracle"),
            };
            row.opt_mj = Some(report.objective * 1e3);
            row.time_s = Some(match args.output.timing {
                Timing::Wall => report.wall_time.as_secs_f64(),
                Timing::Off => 0.0,
            });
            row.bnb_nodes = Some(report.nodes_explored);
            row.monitor_disp_m = Some(report.state.u[monitor]);
            row.status = report.status.as_str().to_string();
        }
    }
    Ok(row)
}

pub fn gen_data(args: &GenDataArgs) -> Result<u8, CliError> {
    let curve: CurveSpec = args.curve.parse()?;
    let mut parts = args.strain_range.splitn(2, ',');
    let (lo, hi) = match (parts.next(), parts.next()) {
        (Some(lo), Some(hi)) => {
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|_| {
                    CliError::Flag(format!("--strain-range: bad bound {:?}", s.trim()))
                })
            };
            (parse(lo)?, parse(hi)?)
        }
        _ => {
            return Err(CliError::Flag(
                "--strain-range must be \"LO,HI\"".to_string(),
            ))
        }
    };
    if !args.noise.is_finite() || args.noise < 0.0 {
        return Err(CliError::Flag(format!(
            "--noise must be a nonnegative standard deviation, got {}",
            args.noise
        )));
    }
    let data = generate_synthetic(&curve, args.d, (lo, hi), args.noise, args.seed)?;
    data.to_csv_path(&args.out)?;
    println!("wrote {} points to {}", data.len(), args.out.display());
    Ok(0)
}
