//! Equilibrium state solver for a fixed choice of data points.
//!
//! Once every member is pinned to one observed (strain, stress) pair, the
//! remaining problem is an equality-constrained convex quadratic whose
//! optimality system splits into two linear solves against the same
//! reference stiffness matrix: one for the displacements, one for the
//! equilibrium multipliers that determine the member stresses.

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::dataset::MaterialDataset;
use crate::error::{Error, Result};
use crate::truss_model::TrussModel;

/// A choice of one data point index per member.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment(Vec<u32>);

impl Assignment {
    pub fn new(indices: Vec<u32>, member_count: usize, data_count: usize) -> Result<Self> {
        if indices.len() != member_count {
            return Err(Error::DimensionMismatch(format!(
                "assignment has {} entries for {} members",
                indices.len(),
                member_count
            )));
        }
        if let Some(&j) = indices.iter().find(|&&j| j as usize >= data_count) {
            return Err(Error::DimensionMismatch(format!(
                "assignment refers to data point {j} but the dataset has {data_count} points"
            )));
        }
        Ok(Self(indices))
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, member: usize) -> u32 {
        self.0[member]
    }
}

/// Solution of the fixed-assignment problem: nodal displacements, member
/// strains and stresses, the assigned data coordinates, and the objective
/// value (J, sum of weighted squared phase-space distances).
#[derive(Debug, Clone)]
pub struct MechanicalState {
    pub u: DVector<f64>,
    pub strain: Vec<f64>,
    pub stress: Vec<f64>,
    pub data_strain: Vec<f64>,
    pub data_stress: Vec<f64>,
    pub objective: f64,
}

/// Reference stiffness `K = sum_i v_i c b_i b_i^T` with a cached Cholesky
/// factorization and a counter of triangular solves performed against it.
pub struct ReferenceStiffness {
    factor: Cholesky<f64, Dyn>,
    solves: AtomicUsize,
}

impl ReferenceStiffness {
    pub fn new(model: &TrussModel, c: f64) -> Result<Self> {
        let n = model.dof_count();
        let mut k = DMatrix::zeros(n, n);
        for i in 0..model.member_count() {
            let b = model.b_vector(i);
            let w = model.volume(i) * c;
            k.syger(w, b, b, 1.0);
        }
        k.fill_upper_triangle_with_lower_triangle();
        let factor = Cholesky::new(k).ok_or(Error::NotPositiveDefinite)?;
        Ok(Self {
            factor,
            solves: AtomicUsize::new(0),
        })
    }

    /// Solves `K x = rhs` using the cached factorization.
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        self.solves.fetch_add(1, Ordering::Relaxed);
        self.factor.solve(rhs)
    }

    /// Number of solves performed since construction.
    pub fn solve_count(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }
}

/// Solver kernel binding a model, a dataset, and the weighting constant.
/// Construct once and reuse: the stiffness factorization is shared across
/// every fixed-assignment solve.
pub struct StateSolver<'a> {
    model: &'a TrussModel,
    data: &'a MaterialDataset,
    c: f64,
    stiffness: ReferenceStiffness,
}

impl<'a> StateSolver<'a> {
    pub fn new(model: &'a TrussModel, data: &'a MaterialDataset, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::DegenerateDataset(format!(
                "weighting constant must be positive, got {c}"
            )));
        }
        let stiffness = ReferenceStiffness::new(model, c)?;
        Ok(Self {
            model,
            data,
            c,
            stiffness,
        })
    }

    pub fn model(&self) -> &TrussModel {
        self.model
    }

    pub fn data(&self) -> &MaterialDataset {
        self.data
    }

    pub fn weighting(&self) -> f64 {
        self.c
    }

    pub fn stiffness(&self) -> &ReferenceStiffness {
        &self.stiffness
    }

    /// Solves the fixed-assignment problem under load `p`.
    ///
    /// Displacements satisfy `K u = sum_i v_i c e_i b_i`; stresses are
    /// `sigma_i = s_i + c b_i^T eta` with `K eta = p - sum_i v_i s_i b_i`.
    /// Exactly two solves against the cached factorization.
    pub fn solve_fixed_assignment(
        &self,
        assignment: &Assignment,
        p: &DVector<f64>,
    ) -> Result<MechanicalState> {
        let m = self.model.member_count();
        if assignment.indices().len() != m {
            return Err(Error::DimensionMismatch(format!(
                "assignment has {} entries for {} members",
                assignment.indices().len(),
                m
            )));
        }
        if p.len() != self.model.dof_count() {
            return Err(Error::DimensionMismatch(format!(
                "load vector has {} entries for {} free dofs",
                p.len(),
                self.model.dof_count()
            )));
        }

        let n = self.model.dof_count();
        let mut rhs_u = DVector::zeros(n);
        let mut rhs_eta = p.clone();
        let mut data_strain = Vec::with_capacity(m);
        let mut data_stress = Vec::with_capacity(m);
        for i in 0..m {
            let point = self.data.point(assignment.get(i) as usize);
            let v = self.model.volume(i);
            let b = self.model.b_vector(i);
            rhs_u.axpy(v * self.c * point.strain, b, 1.0);
            rhs_eta.axpy(-v * point.stress, b, 1.0);
            data_strain.push(point.strain);
            data_stress.push(point.stress);
        }

        let u = self.stiffness.solve(&rhs_u);
        let eta = self.stiffness.solve(&rhs_eta);

        let mut strain = Vec::with_capacity(m);
        let mut stress = Vec::with_capacity(m);
        let mut objective = 0.0;
        for i in 0..m {
            let b = self.model.b_vector(i);
            let eps = b.dot(&u);
            let sig = data_stress[i] + self.c * b.dot(&eta);
            let v = self.model.volume(i);
            let de = eps - data_strain[i];
            let ds = sig - data_stress[i];
            objective += 0.5 * v * self.c * de * de + 0.5 * v / self.c * ds * ds;
            strain.push(eps);
            stress.push(sig);
        }

        Ok(MechanicalState {
            u,
            strain,
            stress,
            data_strain,
            data_stress,
            objective,
        })
    }

    /// Objective value of an arbitrary state against an assignment, without
    /// solving anything. Used to cross-check solver output.
    pub fn objective_of(&self, assignment: &Assignment, strain: &[f64], stress: &[f64]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.model.member_count() {
            total += self.data.squared_distance(
                strain[i],
                stress[i],
                self.c,
                self.model.volume(i),
                assignment.get(i) as usize,
            );
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::MaterialPoint;
    use crate::truss_model::Node;
    use approx::assert_relative_eq;

    /// One horizontal bar of length 1 m and area 1 m^2 (volume 1 m^3),
    /// free only in x at the right node, so b = [1].
    fn single_bar() -> TrussModel {
        TrussModel::new(
            vec![Node::new_2d(0.0, 0.0), Node::new_2d(1.0, 0.0)],
            vec![(0, 1, 1.0)],
            &[(0, 0), (0, 1), (1, 1)],
            &[(1, 0, 3.0)],
        )
        .unwrap()
    }

    fn three_point_data() -> MaterialDataset {
        MaterialDataset::new(vec![
            MaterialPoint {
                strain: 0.0,
                stress: 0.0,
            },
            MaterialPoint {
                strain: 0.001,
                stress: 2.0,
            },
            MaterialPoint {
                strain: 0.002,
                stress: 4.0,
            },
        ])
        .unwrap()
    }

    #[test]
    fn single_bar_assignment_to_origin_point() {
        let model = single_bar();
        let data = three_point_data();
        let solver = StateSolver::new(&model, &data, 1.0).unwrap();
        let assignment = Assignment::new(vec![0], 1, 3).unwrap();
        let p = model.load_vector(1.0);
        let state = solver.solve_fixed_assignment(&assignment, &p).unwrap();
        // K = 1, so u = 0 and sigma must carry the full load: sigma = 3.
        assert_relative_eq!(state.u[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(state.strain[0], 0.0, epsilon = 1e-15);
        assert_relative_eq!(state.stress[0], 3.0, max_relative = 1e-14);
        assert_relative_eq!(state.objective, 4.5, max_relative = 1e-14);
    }

    #[test]
    fn single_bar_assignment_to_second_point() {
        let model = single_bar();
        let data = three_point_data();
        let solver = StateSolver::new(&model, &data, 1.0).unwrap();
        let assignment = Assignment::new(vec![1], 1, 3).unwrap();
        let p = model.load_vector(1.0);
        let state = solver.solve_fixed_assignment(&assignment, &p).unwrap();
        assert_relative_eq!(state.u[0], 0.001, max_relative = 1e-14);
        assert_relative_eq!(state.stress[0], 3.0, max_relative = 1e-14);
        assert_relative_eq!(state.objective, 0.5, max_relative = 1e-14);
    }

    #[test]
    fn objective_matches_direct_evaluation() {
        let model = single_bar();
        let data = three_point_data();
        let solver = StateSolver::new(&model, &data, 1.0).unwrap();
        for j in 0..3 {
            let assignment = Assignment::new(vec![j], 1, 3).unwrap();
            let p = model.load_vector(1.0);
            let state = solver.solve_fixed_assignment(&assignment, &p).unwrap();
            let direct = solver.objective_of(&assignment, &state.strain, &state.stress);
            assert_relative_eq!(state.objective, direct, max_relative = 1e-13);
        }
    }

    #[test]
    fn equilibrium_holds_at_the_solution() {
        let model = TrussModel::ten_bar(1e-3).unwrap();
        let data = three_point_data();
        let solver = StateSolver::new(&model, &data, 1.0).unwrap();
        let assignment = Assignment::new(vec![1; 10], 10, 3).unwrap();
        let p = model.load_vector(2.0);
        let state = solver.solve_fixed_assignment(&assignment, &p).unwrap();
        let residual = model.equilibrium_residual(&state.stress, &p);
        assert!(
            residual <= 1e-9 * (1.0 + p.norm()),
            "equilibrium residual too large: {residual}"
        );
    }

    #[test]
    fn compatibility_holds_at_the_solution() {
        let model = TrussModel::ten_bar(1e-3).unwrap();
        let data = three_point_data();
        let solver = StateSolver::new(&model, &data, 1.0).unwrap();
        let assignment = Assignment::new(vec![2; 10], 10, 3).unwrap();
        let p = model.load_vector(1.0);
        let state = solver.solve_fixed_assignment(&assignment, &p).unwrap();
        for (i, &eps) in state.strain.iter().enumerate() {
            assert_relative_eq!(eps, model.strain(i, &state.u), max_relative = 1e-12);
        }
    }

    #[test]
    fn displacement_part_ignores_the_load() {
        let model = TrussModel::ten_bar(1e-3).unwrap();
        let data = three_point_data();
        let solver = StateSolver::new(&model, &data, 1.0).unwrap();
        let assignment = Assignment::new(vec![1; 10], 10, 3).unwrap();
        let a = solver
            .solve_fixed_assignment(&assignment, &model.load_vector(1.0))
            .unwrap();
        let b = solver
            .solve_fixed_assignment(&assignment, &model.load_vector(5.0))
            .unwrap();
        assert_eq!(a.u, b.u);
        assert_eq!(a.strain, b.strain);
        assert_ne!(a.stress, b.stress);
    }

    #[test]
    fn each_solve_reuses_the_cached_factorization() {
        let model = TrussModel::ten_bar(1e-3).unwrap();
        let data = three_point_data();
        let solver = StateSolver::new(&model, &data, 1.0).unwrap();
        let assignment = Assignment::new(vec![0; 10], 10, 3).unwrap();
        let p = model.load_vector(1.0);
        assert_eq!(solver.stiffness().solve_count(), 0);
        solver.solve_fixed_assignment(&assignment, &p).unwrap();
        assert_eq!(solver.stiffness().solve_count(), 2);
        for _ in 0..5 {
            solver.solve_fixed_assignment(&assignment, &p).unwrap();
        }
        assert_eq!(solver.stiffness().solve_count(), 12);
    }

    #[test]
    fn solution_is_a_minimum_over_displacement_perturbations() {
        let model = TrussModel::ten_bar(1e-3).unwrap();
        let data = three_point_data();
        let solver = StateSolver::new(&model, &data, 1.0).unwrap();
        let assignment = Assignment::new(vec![1; 10], 10, 3).unwrap();
        let p = model.load_vector(1.0);
        let state = solver.solve_fixed_assignment(&assignment, &p).unwrap();
        let n = model.dof_count();
        for k in 0..n {
            let mut u = state.u.clone();
            u[k] += 1e-6;
            let strains = model.strains(&u);
            let perturbed = solver.objective_of(&assignment, strains.as_slice(), &state.stress);
            assert!(
                perturbed >= state.objective - 1e-15,
                "dof {k}: perturbed objective {perturbed} below optimum {}",
                state.objective
            );
        }
    }

    #[test]
    fn assignment_validation() {
        assert!(Assignment::new(vec![0, 1], 2, 2).is_ok());
        assert!(matches!(
            Assignment::new(vec![0], 2, 2),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            Assignment::new(vec![0, 2], 2, 2),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn wrong_load_vector_length_is_rejected() {
        let model = single_bar();
        let data = three_point_data();
        let solver = StateSolver::new(&model, &data, 1.0).unwrap();
        let assignment = Assignment::new(vec![0], 1, 3).unwrap();
        let p = DVector::zeros(5);
        assert!(matches!(
            solver.solve_fixed_assignment(&assignment, &p),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
