//! Exact global solver: branch and bound over data-point assignments.
//!
//! The search tree fixes members to data points one at a time (d-way
//! branching, depth at most m). Each node carries a certified lower bound
//! from a convex relaxation: members not yet fixed contribute nothing to
//! the objective, so the bound is the minimum of the fixed members'
//! penalty terms over all equilibrium states. Best-first search with an
//! incumbent from the alternating heuristic closes the gap.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::heuristic::{solve_heuristic, HeuristicOptions, InitialAssignment};
use crate::linalg::lstsq;
use crate::state_solver::{Assignment, MechanicalState, StateSolver};

/// A node is pruned when its bound is within this margin of the incumbent.
pub const PRUNE_MARGIN: f64 = 1e-12;

/// Pops between incumbent dives (relaxation rounding plus a heuristic
/// run). Dives are what rescue the search when the initial heuristic lands
/// in a poor local minimum, so they have to happen often enough to matter
/// but stay off the per-node critical path.
const DIVE_INTERVAL: u64 = 32;

/// Remaining absolute bound difference below which a run counts as optimal.
pub const OPTIMAL_BOUND_TOL: f64 = 1e-9;

/// Relative cutoff for singular values in the relaxation solves.
const LSTSQ_RTOL: f64 = 1e-12;

/// Relative cutoff deciding which singular directions of the free-member
/// force range count as null space.
const RANK_RTOL: f64 = 1e-10;

/// Per-member search state: fixed to one data point, or still free over an
/// allowed index set.
#[derive(Debug, Clone)]
pub struct PartialAssignment {
    slots: Vec<Option<u32>>,
    domains: Arc<Vec<Vec<u32>>>,
}

impl PartialAssignment {
    /// All members free over the full dataset.
    pub fn root(member_count: usize, data_count: usize) -> Self {
        let full: Vec<u32> = (0..data_count as u32).collect();
        Self {
            slots: vec![None; member_count],
            domains: Arc::new(vec![full; member_count]),
        }
    }

    /// All members free over caller-chosen allowed sets. Each set must be
    /// nonempty, strictly increasing, and within the dataset.
    pub fn with_domains(domains: Vec<Vec<u32>>, data_count: usize) -> Result<Self> {
        for (i, domain) in domains.iter().enumerate() {
            if domain.is_empty() {
                return Err(Error::EmptyAllowedSet);
            }
            let increasing = domain.windows(2).all(|w| w[0] < w[1]);
            if !increasing || domain.last().map(|&j| j as usize >= data_count) == Some(true) {
                return Err(Error::DimensionMismatch(format!(
                    "allowed set for member {i} is not a strictly increasing subset of 0..{data_count}"
                )));
            }
        }
        Ok(Self {
            slots: vec![None; domains.len()],
            domains: Arc::new(domains),
        })
    }

    pub fn member_count(&self) -> usize {
        self.slots.len()
    }

    /// The data point member `i` is fixed to, if any.
    pub fn fixed(&self, i: usize) -> Option<u32> {
        self.slots[i]
    }

    /// Allowed data points for member `i` while it is free.
    pub fn domain(&self, i: usize) -> &[u32] {
        &self.domains[i]
    }

    pub fn slots(&self) -> &[Option<u32>] {
        &self.slots
    }

    pub fn free_members(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, slot)| slot.is_none())
            .map(|(i, _)| i)
    }

    pub fn is_complete(&self) -> bool {
        self.slots.iter().all(Option::is_some)
    }

    /// Child with member `i` fixed to data point `j`. Domains are shared.
    pub fn fix(&self, i: usize, j: u32) -> Self {
        let mut slots = self.slots.clone();
        slots[i] = Some(j);
        Self {
            slots,
            domains: Arc::clone(&self.domains),
        }
    }

    pub fn to_assignment(&self, data_count: usize) -> Option<Assignment> {
        let indices: Option<Vec<u32>> = self.slots.iter().copied().collect();
        indices.map(|v| {
            Assignment::new(v, self.slots.len(), data_count).expect("slots hold valid indices")
        })
    }
}

/// One search-tree node.
#[derive(Debug, Clone)]
pub struct BnBNode {
    pub partial: PartialAssignment,
    pub lower_bound: f64,
    pub depth: usize,
}

/// Bounding strategy for node relaxations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundMode {
    /// Drop free members' penalty terms entirely and solve the remaining
    /// equality-constrained QP exactly.
    #[default]
    Baseline,
    /// Additionally confine free members' data stresses to the interval
    /// spanned by their allowed points, bounded by dual ascent with
    /// box-corner selection. Every iterate is itself a valid bound, so
    /// early stopping never breaks certification; the baseline value is
    /// kept whenever the ascent lands below it. Much tighter on loaded
    /// structures.
    BoxDual,
}

/// Solution of a node's relaxed problem: the certified bound plus the
/// relaxed member states, which steer the branching choice. `dual` holds
/// the best stress-part multiplier when the box bound produced it; child
/// nodes reuse it as a warm start, which also keeps child bounds at or
/// above the parent's.
#[derive(Debug, Clone)]
pub struct Relaxation {
    pub value: f64,
    pub strain: Vec<f64>,
    pub stress: Vec<f64>,
    pub dual: Option<DVector<f64>>,
}

/// Certified lower bound over all completions of `partial` (baseline
/// mode).
///
/// Free members' data coordinates range over the whole plane, so their
/// penalty terms vanish; what remains is a convex QP in (u, sigma) with
/// only the fixed members' terms, subject to equilibrium. The two parts
/// decouple and each is solved exactly; `sigma_baseline` handles the
/// constrained stress part.
pub fn relax(
    solver: &StateSolver,
    partial: &PartialAssignment,
    p: &DVector<f64>,
) -> Result<Relaxation> {
    relax_with(solver, partial, p, BoundMode::Baseline, None)
}

/// [`relax`] with a selectable bound mode and an optional warm-start
/// multiplier for the box dual (normally the parent node's).
pub fn relax_with(
    solver: &StateSolver,
    partial: &PartialAssignment,
    p: &DVector<f64>,
    mode: BoundMode,
    warm_dual: Option<&DVector<f64>>,
) -> Result<Relaxation> {
    let model = solver.model();
    let data = solver.data();
    let c = solver.weighting();
    let m = model.member_count();
    let n = model.dof_count();
    if partial.member_count() != m {
        return Err(Error::DimensionMismatch(format!(
            "partial assignment has {} slots for {} members",
            partial.member_count(),
            m
        )));
    }

    let fixed: Vec<(usize, u32)> = (0..m).filter_map(|i| Some((i, partial.fixed(i)?))).collect();
    let free: Vec<usize> = partial.free_members().collect();
    let k = fixed.len();

    // Displacement part, shared by both modes: rows sqrt(v_i c) b_i^T
    // against sqrt(v_i c) e_i, exact minimum via least squares.
    let mut a = DMatrix::zeros(k, n);
    let mut r = DVector::zeros(k);
    for (row, &(i, j)) in fixed.iter().enumerate() {
        let w = (model.volume(i) * c).sqrt();
        let b = model.b_vector(i);
        for col in 0..n {
            a[(row, col)] = w * b[col];
        }
        r[row] = w * data.point(j as usize).strain;
    }
    let u = lstsq(&a, &r, LSTSQ_RTOL);
    let value_u = 0.5 * (&a * &u - &r).norm_squared();
    let strain: Vec<f64> = (0..m).map(|i| model.b_vector(i).dot(&u)).collect();

    let (base_value, base_stress) = sigma_baseline(solver, &fixed, &free, p);
    let (value_sigma, stress, dual) = match mode {
        BoundMode::Baseline => (base_value, base_stress, None),
        BoundMode::BoxDual => {
            // Both parts bound the same stress problem and both grow from
            // parent to child, so the larger one is kept; the dual still
            // rides along as the warm start either way.
            let (box_value, box_stress, eta) = sigma_box_dual(solver, partial, p, warm_dual);
            if box_value > base_value {
                (box_value, box_stress, Some(eta))
            } else {
                (base_value, base_stress, Some(eta))
            }
        }
    };

    Ok(Relaxation {
        value: value_u + value_sigma,
        strain,
        stress,
        dual,
    })
}

/// Exact minimum of the fixed members' stress penalties subject to
/// equilibrium, free stresses acting as unpenalized slack.
///
/// The constraint only binds on the orthogonal complement of the free
/// members' force range: with Z spanning null(B_fr^T) (columns of B_fr
/// are v_i b_i over free members), the scaled deviations
/// y_i = sqrt(v_i/c) (sigma_i - s_i) must satisfy a small consistent
/// linear system, and the minimum of ||y||^2/2 over it is a minimum-norm
/// least-squares solve. Keeping every solve at a single scale is what
/// makes the bound trustworthy in floating point.
fn sigma_baseline(
    solver: &StateSolver,
    fixed: &[(usize, u32)],
    free: &[usize],
    p: &DVector<f64>,
) -> (f64, Vec<f64>) {
    let model = solver.model();
    let data = solver.data();
    let c = solver.weighting();
    let m = model.member_count();
    let n = model.dof_count();
    let k = fixed.len();
    let f = free.len();

    let mut b_fr = DMatrix::zeros(n, f);
    for (col, &i) in free.iter().enumerate() {
        let v = model.volume(i);
        let b = model.b_vector(i);
        for row in 0..n {
            b_fr[(row, col)] = v * b[row];
        }
    }
    let mut q = p.clone();
    for &(i, j) in fixed {
        q.axpy(
            -model.volume(i) * data.point(j as usize).stress,
            model.b_vector(i),
            1.0,
        );
    }

    // Z from the SVD of B_fr padded to square, so the left factor is a
    // full orthogonal basis including the null directions.
    let mut padded = DMatrix::zeros(n, n.max(f));
    padded.view_mut((0, 0), (n, f)).copy_from(&b_fr);
    let svd = padded.svd(true, false);
    let u_full = svd.u.expect("svd computed with u");
    let smax = svd.singular_values.max();
    let null_cols: Vec<usize> = (0..n)
        .filter(|&i| {
            let s = if i < svd.singular_values.len() {
                svd.singular_values[i]
            } else {
                0.0
            };
            smax == 0.0 || s <= RANK_RTOL * smax
        })
        .collect();
    let z = u_full.select_columns(&null_cols);

    let zq = z.transpose() * &q;
    let mut g = DMatrix::zeros(null_cols.len(), k);
    for (col, &(i, _)) in fixed.iter().enumerate() {
        let w = (model.volume(i) * c).sqrt();
        let zb = z.transpose() * model.b_vector(i);
        for row in 0..null_cols.len() {
            g[(row, col)] = w * zb[row];
        }
    }
    let y = lstsq(&g, &zq, LSTSQ_RTOL);
    let value = 0.5 * y.norm_squared();

    let mut stress = vec![0.0; m];
    let mut q_left = q;
    for (col, &(i, j)) in fixed.iter().enumerate() {
        let v = model.volume(i);
        let delta = (c / v).sqrt() * y[col];
        stress[i] = data.point(j as usize).stress + delta;
        q_left.axpy(-v * delta, model.b_vector(i), 1.0);
    }
    let sigma_fr = lstsq(&b_fr, &q_left, LSTSQ_RTOL);
    for (col, &i) in free.iter().enumerate() {
        stress[i] = sigma_fr[col];
    }
    (value, stress)
}

/// Number of box-corner updates tried by the stress-part dual ascent.
const DUAL_ITERATIONS: usize = 6;

/// Certified bound on the stress part with each member's data stress
/// confined to an interval: fixed members to their point, free members to
/// the stress range of their allowed points.
///
/// The dual function is, with slopes a_i = v_i b_i^T eta,
///     g(eta) = eta^T p - sum_i [ a_i^2 / (2 v_i / c) + max(a_i s_lo, a_i s_hi) ]
/// and any eta gives a valid bound. Maximizing over eta with the signs of
/// the slopes frozen is a single solve against the cached reference
/// stiffness, so the ascent alternates corner selection and one solve.
/// The candidate set always contains zero and the warm start, which makes
/// the result nonnegative and at least the parent's bound.
fn sigma_box_dual(
    solver: &StateSolver,
    partial: &PartialAssignment,
    p: &DVector<f64>,
    warm_dual: Option<&DVector<f64>>,
) -> (f64, Vec<f64>, DVector<f64>) {
    let model = solver.model();
    let data = solver.data();
    let c = solver.weighting();
    let m = model.member_count();
    let n = model.dof_count();

    let mut mid = vec![0.0; m];
    let mut rad = vec![0.0; m];
    for i in 0..m {
        let (lo, hi) = match partial.fixed(i) {
            Some(j) => {
                let s = data.point(j as usize).stress;
                (s, s)
            }
            None => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for &j in partial.domain(i) {
                    let s = data.point(j as usize).stress;
                    lo = lo.min(s);
                    hi = hi.max(s);
                }
                (lo, hi)
            }
        };
        mid[i] = 0.5 * (lo + hi);
        rad[i] = 0.5 * (hi - lo);
    }

    let eval = |eta: &DVector<f64>| -> f64 {
        let mut g = eta.dot(p);
        for i in 0..m {
            let v = model.volume(i);
            let slope = model.b_vector(i).dot(eta);
            let a = v * slope;
            g -= 0.5 * v * c * slope * slope + a * mid[i] + a.abs() * rad[i];
        }
        g
    };

    let mut best_value = 0.0;
    let mut best_eta = DVector::zeros(n);
    let consider = |eta: DVector<f64>, best_value: &mut f64, best_eta: &mut DVector<f64>| {
        let g = eval(&eta);
        if g > *best_value {
            *best_value = g;
            *best_eta = eta;
        }
    };

    if let Some(warm) = warm_dual {
        consider(warm.clone(), &mut best_value, &mut best_eta);
    }

    // Ascent: freeze each member at the box corner its current slope
    // favors, then maximize the smooth remainder in closed form.
    let mut eta = warm_dual.cloned().unwrap_or_else(|| DVector::zeros(n));
    for pass in 0..DUAL_ITERATIONS {
        let mut rhs = p.clone();
        for i in 0..m {
            let corner = if pass == 0 && warm_dual.is_none() {
                mid[i]
            } else {
                let slope = model.b_vector(i).dot(&eta);
                mid[i] + slope.signum() * rad[i]
            };
            rhs.axpy(-model.volume(i) * corner, model.b_vector(i), 1.0);
        }
        let next = solver.stiffness().solve(&rhs);
        if next == eta && pass > 0 {
            break;
        }
        eta = next;
        consider(eta.clone(), &mut best_value, &mut best_eta);
    }

    // Primal recovery for branching guidance: corner stresses plus the
    // quadratic slack at the best multiplier.
    let mut stress = vec![0.0; m];
    for i in 0..m {
        let slope = model.b_vector(i).dot(&best_eta);
        let corner = mid[i] + slope.signum() * rad[i];
        stress[i] = corner + c * slope;
    }
    (best_value, stress, best_eta)
}

/// Convenience wrapper returning only the bound value.
pub fn lower_bound(
    solver: &StateSolver,
    partial: &PartialAssignment,
    p: &DVector<f64>,
) -> Result<f64> {
    relax(solver, partial, p).map(|r| r.value)
}

/// Splits `node` on its most ambiguous free member: the one whose relaxed
/// (strain, stress) point has the smallest ratio of second-nearest to
/// nearest allowed-point distance (ties toward the lowest member index).
/// Returns one child per allowed index, nearest first, each with its own
/// certified bound and relaxation.
pub fn branch(
    solver: &StateSolver,
    node: &BnBNode,
    relaxation: &Relaxation,
    p: &DVector<f64>,
    mode: BoundMode,
) -> Result<Vec<(BnBNode, Relaxation)>> {
    let model = solver.model();
    let data = solver.data();
    let c = solver.weighting();

    let mut pick: Option<(f64, usize)> = None;
    for i in node.partial.free_members() {
        let v = model.volume(i);
        let mut d1 = f64::INFINITY;
        let mut d2 = f64::INFINITY;
        for &j in node.partial.domain(i) {
            let d = data.squared_distance(
                relaxation.strain[i],
                relaxation.stress[i],
                c,
                v,
                j as usize,
            );
            if d < d1 {
                d2 = d1;
                d1 = d;
            } else if d < d2 {
                d2 = d;
            }
        }
        let ratio = if d1 == 0.0 && d2 == 0.0 {
            1.0
        } else if d1 == 0.0 || d2 == f64::INFINITY {
            f64::INFINITY
        } else {
            (d2 / d1).sqrt()
        };
        if pick.map(|(best, _)| ratio < best).unwrap_or(true) {
            pick = Some((ratio, i));
        }
    }
    let (_, member) = pick.ok_or(Error::NoFreeMember)?;

    let v = model.volume(member);
    let mut order: Vec<u32> = node.partial.domain(member).to_vec();
    order.sort_by(|&a, &b| {
        let da = data.squared_distance(
            relaxation.strain[member],
            relaxation.stress[member],
            c,
            v,
            a as usize,
        );
        let db = data.squared_distance(
            relaxation.strain[member],
            relaxation.stress[member],
            c,
            v,
            b as usize,
        );
        da.total_cmp(&db).then(a.cmp(&b))
    });

    let mut children = Vec::with_capacity(order.len());
    for j in order {
        let partial = node.partial.fix(member, j);
        let child_relax = relax_with(solver, &partial, p, mode, relaxation.dual.as_ref())?;
        children.push((
            BnBNode {
                partial,
                lower_bound: child_relax.value,
                depth: node.depth + 1,
            },
            child_relax,
        ));
    }
    Ok(children)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    GapReached,
    TimeLimit,
    NodeLimit,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::GapReached => "gap_reached",
            SolveStatus::TimeLimit => "time_limit",
            SolveStatus::NodeLimit => "node_limit",
        }
    }
}

/// Bound bookkeeping for one node whose relaxation was solved. Recorded
/// only when `collect_trace` is on; lets tests audit bound validity.
#[derive(Debug, Clone)]
pub struct TraceEvent {
    pub slots: Vec<Option<u32>>,
    pub depth: usize,
    pub lower_bound: f64,
    pub parent_bound: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct MiqpOptions {
    /// Relative gap at which the search stops.
    pub gap_tol: f64,
    pub time_limit: Option<Duration>,
    /// Maximum number of nodes taken from the pool.
    pub node_limit: u64,
    /// Options for the heuristic that seeds the incumbent.
    pub heuristic: HeuristicOptions,
    /// Explore the full tree: no bound pruning, no early gap termination.
    /// Testing aid for prune-safety checks; explodes on nontrivial sizes.
    pub disable_pruning: bool,
    /// Record a TraceEvent for every node whose bound is computed.
    pub collect_trace: bool,
    /// Relaxation used for node bounds.
    pub bound: BoundMode,
}

impl Default for MiqpOptions {
    fn default() -> Self {
        Self {
            gap_tol: 0.0,
            time_limit: None,
            node_limit: 10_000_000,
            heuristic: HeuristicOptions::default(),
            disable_pruning: false,
            collect_trace: false,
            bound: BoundMode::default(),
        }
    }
}

/// Result of an exact solve (also produced by the brute-force enumerator,
/// with `nodes_explored` counting evaluated assignments).
#[derive(Debug, Clone)]
pub struct ExactReport {
    pub objective: f64,
    pub state: MechanicalState,
    pub assignment: Assignment,
    pub nodes_explored: u64,
    pub wall_time: Duration,
    /// Remaining relative gap, `(incumbent - best bound) / max(1, |incumbent|)`.
    pub gap: f64,
    pub status: SolveStatus,
    pub trace: Vec<TraceEvent>,
}

struct PoolEntry {
    node: BnBNode,
    relaxation: Relaxation,
    seq: u64,
}

impl PoolEntry {
    /// Pop order: smallest bound first, then deepest, then insertion order.
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.node
            .lower_bound
            .total_cmp(&other.node.lower_bound)
            .then_with(|| other.node.depth.cmp(&self.node.depth))
            .then_with(|| self.seq.cmp(&other.seq))
    }
}

impl PartialEq for PoolEntry {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}
impl Eq for PoolEntry {}
impl PartialOrd for PoolEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for PoolEntry {
    // BinaryHeap is a max-heap; invert so the heap pops the best entry.
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other).reverse()
    }
}

/// Rounds a node's relaxed state to the nearest allowed data points and
/// polishes the result with the alternating heuristic, yielding a feasible
/// incumbent candidate. Deterministic, so repeated runs stay identical.
fn dive(
    solver: &StateSolver,
    partial: &PartialAssignment,
    relaxation: &Relaxation,
    p: &DVector<f64>,
    options: &HeuristicOptions,
) -> Result<(Assignment, MechanicalState)> {
    let model = solver.model();
    let data = solver.data();
    let c = solver.weighting();
    let m = model.member_count();
    let mut indices = Vec::with_capacity(m);
    for i in 0..m {
        let j = match partial.fixed(i) {
            Some(j) => j,
            None => {
                data.nearest_in(
                    relaxation.strain[i],
                    relaxation.stress[i],
                    c,
                    model.volume(i),
                    partial.domain(i),
                )?
                .0 as u32
            }
        };
        indices.push(j);
    }
    let start = Assignment::new(indices, m, data.len())?;
    let heur = solve_heuristic(
        solver,
        p,
        &HeuristicOptions {
            init: InitialAssignment::Given(start),
            ..options.clone()
        },
    )?;
    Ok((heur.assignment, heur.state))
}

/// Branch-and-bound search for the global optimum.
///
/// Best-first over the node pool, incumbent seeded by the heuristic and
/// refreshed by periodic dives, nodes pruned when their bound cannot beat
/// the incumbent. With default options (zero gap tolerance, no time limit)
/// the result is exact.
pub fn solve_exact(
    solver: &StateSolver,
    p: &DVector<f64>,
    options: &MiqpOptions,
) -> Result<ExactReport> {
    assert!(options.gap_tol >= 0.0, "gap tolerance must be nonnegative");
    let start = Instant::now();
    let m = solver.model().member_count();
    let d = solver.data().len();

    let heur = solve_heuristic(solver, p, &options.heuristic)?;
    let mut incumbent = heur.state.objective;
    let mut best_assignment = heur.assignment;
    let mut best_state = heur.state;

    let mut trace = Vec::new();
    let mut pool = BinaryHeap::new();
    let mut seq = 0u64;
    let root_partial = PartialAssignment::root(m, d);
    let root_relax = relax_with(solver, &root_partial, p, options.bound, None)?;
    if options.collect_trace {
        trace.push(TraceEvent {
            slots: root_partial.slots().to_vec(),
            depth: 0,
            lower_bound: root_relax.value,
            parent_bound: None,
        });
    }
    pool.push(PoolEntry {
        node: BnBNode {
            partial: root_partial,
            lower_bound: root_relax.value,
            depth: 0,
        },
        relaxation: root_relax,
        seq,
    });

    let mut nodes_explored = 0u64;
    let prune = !options.disable_pruning;

    let (status, remaining_bound) = loop {
        let Some(top) = pool.peek() else {
            break (SolveStatus::Optimal, incumbent);
        };
        let best_bound = top.node.lower_bound;
        if prune && incumbent - best_bound <= options.gap_tol * incumbent.abs().max(1.0) {
            let status = if incumbent - best_bound <= OPTIMAL_BOUND_TOL {
                SolveStatus::Optimal
            } else {
                SolveStatus::GapReached
            };
            break (status, best_bound);
        }
        if nodes_explored >= options.node_limit {
            break (SolveStatus::NodeLimit, best_bound);
        }
        if let Some(limit) = options.time_limit {
            if start.elapsed() >= limit {
                break (SolveStatus::TimeLimit, best_bound);
            }
        }

        let entry = pool.pop().expect("peeked");
        nodes_explored += 1;
        if prune && entry.node.lower_bound >= incumbent - PRUNE_MARGIN {
            continue;
        }

        if let Some(assignment) = entry.node.partial.to_assignment(d) {
            let state = solver.solve_fixed_assignment(&assignment, p)?;
            if state.objective < incumbent {
                incumbent = state.objective;
                best_assignment = assignment;
                best_state = state;
            }
            continue;
        }

        if nodes_explored % DIVE_INTERVAL == 1 {
            let (assignment, state) = dive(
                solver,
                &entry.node.partial,
                &entry.relaxation,
                p,
                &options.heuristic,
            )?;
            if state.objective < incumbent {
                incumbent = state.objective;
                best_assignment = assignment;
                best_state = state;
            }
        }

        for (child, child_relax) in branch(solver, &entry.node, &entry.relaxation, p, options.bound)?
        {
            if options.collect_trace {
                trace.push(TraceEvent {
                    slots: child.partial.slots().to_vec(),
                    depth: child.depth,
                    lower_bound: child.lower_bound,
                    parent_bound: Some(entry.node.lower_bound),
                });
            }
            if prune && child.lower_bound >= incumbent - PRUNE_MARGIN {
                continue;
            }
            seq += 1;
            pool.push(PoolEntry {
                node: child,
                relaxation: child_relax,
                seq,
            });
        }
    };

    let gap = (incumbent - remaining_bound).max(0.0) / incumbent.abs().max(1.0);
    Ok(ExactReport {
        objective: incumbent,
        state: best_state,
        assignment: best_assignment,
        nodes_explored,
        wall_time: start.elapsed(),
        gap,
        status,
        trace,
    })
}
