//! Pin-jointed truss geometry under small deformation.
//!
//! A [`TrussModel`] turns nodes, members, and supports into the quantities the
//! solvers consume: per-member compatibility vectors `b_i` (member axial
//! strain is `b_i · u` for free-DOF displacements `u`), member volumes, and a
//! reference load pattern scaled by a load multiplier.

use std::collections::BTreeSet;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::error::{Error, Result};

/// Relative cutoff on singular values for the kinematic determinacy check.
const SPANNING_RTOL: f64 = 1e-10;

/// A truss joint. Coordinates are in meters; two or three spatial
/// dimensions are accepted (all nodes must agree).
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub coords: Vec<f64>,
}

impl Node {
    pub fn new_2d(x: f64, y: f64) -> Self {
        Self { coords: vec![x, y] }
    }
}

/// An axial member between two nodes. Length and volume are derived from the
/// node coordinates at build time.
#[derive(Debug, Clone)]
pub struct Member {
    pub end_nodes: (usize, usize),
    /// Cross-sectional area in m².
    pub area: f64,
    /// Length in m, computed from the node coordinates.
    pub length: f64,
    /// Volume in m³, exactly `area * length`.
    pub volume: f64,
}

/// Immutable truss model: geometry plus the assembled compatibility vectors
/// and reference load pattern. Safe to share across threads.
#[derive(Debug, Clone)]
pub struct TrussModel {
    nodes: Vec<Node>,
    members: Vec<Member>,
    dim: usize,
    /// (node, axis) pairs of constrained displacement components.
    fixed_dofs: BTreeSet<(usize, usize)>,
    /// Maps `node * dim + axis` to a free-DOF index, or None when fixed.
    dof_map: Vec<Option<usize>>,
    /// Compatibility vectors, one per member, each in R^n.
    b: Vec<DVector<f64>>,
    /// Reference load pattern in N per unit load multiplier.
    load_pattern: DVector<f64>,
}

/// On-disk truss description (JSON).
///
/// ```json
/// {
///   "nodes": [[0.0, 0.0], [2.0, 0.0]],
///   "members": [[0, 1, 0.001]],
///   "fixed_dofs": [[0, 0], [0, 1], [1, 1]],
///   "loads": [[1, 0, 1000.0]]
/// }
/// ```
///
/// `members` rows are `[node_i, node_j, area_m2]`, `fixed_dofs` rows are
/// `[node, axis]` with axis `0 = x, 1 = y (, 2 = z)`, and `loads` rows are
/// `[node, axis, newtons_per_unit_lambda]`.
#[derive(Debug, Deserialize)]
struct TrussFile {
    nodes: Vec<Vec<f64>>,
    members: Vec<(usize, usize, f64)>,
    #[serde(default)]
    fixed_dofs: Vec<(usize, usize)>,
    #[serde(default)]
    loads: Vec<(usize, usize, f64)>,
}

impl TrussModel {
    /// Builds a model from raw geometry, verifying kinematic determinacy.
    ///
    /// DOF numbering: nodes in declaration order, x before y (before z);
    /// fixed DOFs are removed by compaction.
    pub fn new(
        nodes: Vec<Node>,
        members: Vec<(usize, usize, f64)>,
        fixed_dofs: &[(usize, usize)],
        loads: &[(usize, usize, f64)],
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidModel("no nodes".into()));
        }
        let dim = nodes[0].coords.len();
        if dim < 2 || dim > 3 {
            return Err(Error::InvalidModel(format!(
                "unsupported spatial dimension {dim}"
            )));
        }
        for (i, node) in nodes.iter().enumerate() {
            if node.coords.len() != dim {
                return Err(Error::InvalidModel(format!(
                    "node {i} has {} coordinates, expected {dim}",
                    node.coords.len()
                )));
            }
            if node.coords.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidModel(format!(
                    "node {i} has non-finite coordinates"
                )));
            }
        }

        let fixed: BTreeSet<(usize, usize)> = fixed_dofs.iter().copied().collect();
        for &(node, axis) in &fixed {
            if node >= nodes.len() || axis >= dim {
                return Err(Error::InvalidModel(format!(
                    "fixed DOF ({node}, {axis}) out of range"
                )));
            }
        }

        let mut dof_map = vec![None; nodes.len() * dim];
        let mut n = 0usize;
        for node in 0..nodes.len() {
            for axis in 0..dim {
                if !fixed.contains(&(node, axis)) {
                    dof_map[node * dim + axis] = Some(n);
                    n += 1;
                }
            }
        }
        if n == 0 {
            return Err(Error::InvalidModel("no free DOFs".into()));
        }

        let mut built_members = Vec::with_capacity(members.len());
        let mut b_vectors = Vec::with_capacity(members.len());
        for (idx, &(a, bn, area)) in members.iter().enumerate() {
            if a >= nodes.len() || bn >= nodes.len() {
                return Err(Error::InvalidModel(format!(
                    "member {idx} references node out of range"
                )));
            }
            if a == bn {
                return Err(Error::InvalidModel(format!(
                    "member {idx} connects node {a} to itself"
                )));
            }
            if !(area > 0.0) || !area.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "member {idx} has non-positive area"
                )));
            }
            let length = distance(&nodes[a].coords, &nodes[bn].coords);
            if length == 0.0 {
                return Err(Error::ZeroLengthMember { member: idx });
            }
            let volume = area * length;

            // Direction-cosine stencil divided by length, mapped to free DOFs.
            let mut b_vec = DVector::zeros(n);
            for axis in 0..dim {
                let cosine = (nodes[bn].coords[axis] - nodes[a].coords[axis]) / length;
                if let Some(dof) = dof_map[a * dim + axis] {
                    b_vec[dof] -= cosine / length;
                }
                if let Some(dof) = dof_map[bn * dim + axis] {
                    b_vec[dof] += cosine / length;
                }
            }

            built_members.push(Member {
                end_nodes: (a, bn),
                area,
                length,
                volume,
            });
            b_vectors.push(b_vec);
        }

        let mut load_pattern = DVector::zeros(n);
        for &(node, axis, value) in loads {
            if node >= nodes.len() || axis >= dim {
                return Err(Error::InvalidModel(format!(
                    "load on ({node}, {axis}) out of range"
                )));
            }
            if !value.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "load on ({node}, {axis}) is not finite"
                )));
            }
            match dof_map[node * dim + axis] {
                Some(dof) => load_pattern[dof] += value,
                None => {
                    return Err(Error::InvalidModel(format!(
                        "load applied to fixed DOF ({node}, {axis})"
                    )))
                }
            }
        }

        let model = Self {
            nodes,
            members: built_members,
            dim,
            fixed_dofs: fixed,
            dof_map,
            b: b_vectors,
            load_pattern,
        };
        model.check_spanning()?;
        Ok(model)
    }

    /// The classic two-bay, 3.6 m grid cantilever with 10 members: four
    /// chords, two verticals, four diagonals. The two leftmost nodes are
    /// pinned and the reference load is 0.4 kN downward at each of the two
    /// bottom free nodes (so the load at multiplier `lambda` is
    /// `0.4 * lambda` kN per node).
    ///
    /// All members share the given cross-sectional area.
    pub fn ten_bar(area: f64) -> Result<Self> {
        const SPAN: f64 = 3.6;
        let nodes = vec![
            Node::new_2d(0.0, SPAN),        // 0: top left (pinned)
            Node::new_2d(0.0, 0.0),         // 1: bottom left (pinned)
            Node::new_2d(SPAN, SPAN),       // 2: top mid
            Node::new_2d(SPAN, 0.0),        // 3: bottom mid
            Node::new_2d(2.0 * SPAN, SPAN), // 4: top right
            Node::new_2d(2.0 * SPAN, 0.0),  // 5: bottom right
        ];
        let members = vec![
            (0, 2, area), // top chords
            (2, 4, area),
            (1, 3, area), // bottom chords
            (3, 5, area),
            (2, 3, area), // verticals
            (4, 5, area),
            (0, 3, area), // diagonals
            (1, 2, area),
            (2, 5, area),
            (3, 4, area),
        ];
        let fixed = [(0, 0), (0, 1), (1, 0), (1, 1)];
        let loads = [(3, 1, -400.0), (5, 1, -400.0)];
        Self::new(nodes, members, &fixed, &loads)
    }

    /// Loads a model from the JSON schema documented on [`TrussModel`].
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text, &path.display().to_string())
    }

    /// Parses the JSON schema; `origin` names the source in error messages.
    pub fn from_json_str(text: &str, origin: &str) -> Result<Self> {
        let file: TrussFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_string(),
            row: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let nodes = file
            .nodes
            .into_iter()
            .map(|coords| Node { coords })
            .collect();
        Self::new(nodes, file.members, &file.fixed_dofs, &file.loads)
    }

    /// External load vector at multiplier `lambda`, in N.
    pub fn load_vector(&self, lambda: f64) -> DVector<f64> {
        &self.load_pattern * lambda
    }

    /// Number of free displacement DOFs (`n`).
    pub fn dof_count(&self) -> usize {
        self.load_pattern.len()
    }

    /// Number of members (`m`).
    pub fn member_count(&self) -> usize {
        self.members.len()
    }

    pub fn spatial_dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn member(&self, i: usize) -> &Member {
        &self.members[i]
    }

    pub fn volume(&self, i: usize) -> f64 {
        self.members[i].volume
    }

    /// Compatibility vector of member `i`.
    pub fn b_vector(&self, i: usize) -> &DVector<f64> {
        &self.b[i]
    }

    pub fn fixed_dofs(&self) -> &BTreeSet<(usize, usize)> {
        &self.fixed_dofs
    }

    /// Free-DOF index of (node, axis), or None when the component is fixed.
    pub fn dof_index(&self, node: usize, axis: usize) -> Option<usize> {
        self.dof_map.get(node * self.dim + axis).copied().flatten()
    }

    /// Axial strain of member `i` under free-DOF displacements `u`.
    pub fn strain(&self, i: usize, u: &DVector<f64>) -> f64 {
        self.b[i].dot(u)
    }

    /// All member strains under `u`.
    pub fn strains(&self, u: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.members.len(), |i, _| self.strain(i, u))
    }

    /// Internal nodal force vector `sum_i v_i sigma_i b_i`.
    pub fn internal_forces(&self, sigma: &[f64]) -> DVector<f64> {
        let mut f = DVector::zeros(self.dof_count());
        for i in 0..self.members.len() {
            f.axpy(self.members[i].volume * sigma[i], &self.b[i], 1.0);
        }
        f
    }

    /// `|| sum_i v_i sigma_i b_i - p ||_2`, the equilibrium residual.
    pub fn equilibrium_residual(&self, sigma: &[f64], p: &DVector<f64>) -> f64 {
        (self.internal_forces(sigma) - p).norm()
    }

    /// Geometric length of member `i` after displacing the free DOFs by `u`.
    /// Used to cross-check the compatibility vectors against finite
    /// differences of member length.
    pub fn deformed_length(&self, i: usize, u: &DVector<f64>) -> f64 {
        let (a, b) = self.members[i].end_nodes;
        let pa = self.displaced_coords(a, u);
        let pb = self.displaced_coords(b, u);
        distance(&pa, &pb)
    }

    fn displaced_coords(&self, node: usize, u: &DVector<f64>) -> Vec<f64> {
        (0..self.dim)
            .map(|axis| {
                let base = self.nodes[node].coords[axis];
                match self.dof_map[node * self.dim + axis] {
                    Some(dof) => base + u[dof],
                    None => base,
                }
            })
            .collect()
    }

    /// Kinematic determinacy: the volume-weighted compatibility vectors must
    /// span R^n, otherwise the reference stiffness is singular.
    fn check_spanning(&self) -> Result<()> {
        let n = self.dof_count();
        let m = self.members.len();
        if m < n {
            return Err(Error::KinematicallyIndeterminate);
        }
        let g = DMatrix::from_fn(n, m, |row, col| {
            self.members[col].volume.sqrt() * self.b[col][row]
        });
        let sv = g.singular_values();
        let smax = sv.max();
        let smin = sv.min();
        if !(smax > 0.0) || smin <= SPANNING_RTOL * smax {
            return Err(Error::KinematicallyIndeterminate);
        }
        Ok(())
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
