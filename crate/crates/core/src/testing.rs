//! Deterministic random instance generation for tests and benchmarks.
//!
//! Not part of the solver API proper; exported so that integration tests
//! and benches in other crates can draw the same instance families.

use nalgebra::DVector;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{MaterialDataset, MaterialPoint};
use crate::truss_model::{Node, TrussModel};

/// A small random problem: stable truss, dataset, weighting, load.
pub struct RandomInstance {
    pub model: TrussModel,
    pub data: MaterialDataset,
    pub c: f64,
    pub p: DVector<f64>,
}

/// Draws a random stable truss with 1 to 4 members and 1 to 4 free dofs,
/// a random dataset of 2 to 6 points, a random weighting constant, and a
/// random load. Deterministic per seed. Candidate trusses that fail the
/// stability check are redrawn from the same stream.
pub fn random_instance(seed: u64) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let model = loop {
        if let Some(model) = try_random_model(&mut rng) {
            break model;
        }
    };

    let d = rng.random_range(2..=6);
    let modulus = 10f64.powf(rng.random_range(8.0..10.0));
    let points = (0..d)
        .map(|_| {
            let strain = rng.random_range(-2e-3..2e-3);
            let stress = modulus * strain * rng.random_range(0.5..1.5)
                + modulus * 1e-4 * rng.random_range(-1.0..1.0);
            MaterialPoint { strain, stress }
        })
        .collect();
    let data = MaterialDataset::new(points).expect("nonempty, finite");
    let c = 10f64.powf(rng.random_range(8.0..10.0));

    let p = DVector::from_fn(model.dof_count(), |_, _| rng.random_range(-5e3..5e3));

    RandomInstance { model, data, c, p }
}

fn try_random_model(rng: &mut ChaCha8Rng) -> Option<TrussModel> {
    let node_count = rng.random_range(2..=4);
    let nodes: Vec<Node> = (0..node_count)
        .map(|k| {
            // Base positions on a coarse grid, jittered: keeps nodes apart.
            let gx = (k % 2) as f64;
            let gy = (k / 2) as f64;
            Node::new_2d(
                gx + rng.random_range(-0.3..0.3),
                gy + rng.random_range(-0.3..0.3),
            )
        })
        .collect();

    let mut all_pairs = Vec::new();
    for a in 0..node_count {
        for b in (a + 1)..node_count {
            all_pairs.push((a, b));
        }
    }
    let member_count = rng.random_range(1..=all_pairs.len().min(4));
    let mut pairs = all_pairs;
    pairs.shuffle(rng);
    pairs.truncate(member_count);
    pairs.sort();
    let members: Vec<(usize, usize, f64)> = pairs
        .into_iter()
        .map(|(a, b)| (a, b, rng.random_range(5e-4..2e-3)))
        .collect();

    // Node 0 fully pinned; other dofs fixed at random, keeping 1 to 4 free.
    let mut fixed_dofs = vec![(0, 0), (0, 1)];
    for node in 1..node_count {
        for axis in 0..2 {
            if rng.random_bool(0.5) {
                fixed_dofs.push((node, axis));
            }
        }
    }
    let free = 2 * (node_count - 1) + 2 - fixed_dofs.len();
    if free == 0 || free > 4 {
        return None;
    }

    TrussModel::new(nodes, members, &fixed_dofs, &[]).ok()
}
