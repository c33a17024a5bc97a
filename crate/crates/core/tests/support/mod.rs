//! Helpers shared by the integration suites.
//!
//! Each test binary uses its own subset of these.
#![allow(dead_code)]

use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use toolpath_core::geometry::PointCloud;

/// Exact optimal-transport cost between equal-size clouds with uniform
/// weights and squared-distance cost, by brute-force search over
/// assignments. Only feasible for small clouds.
pub fn exact_assignment_cost(a: &PointCloud, b: &PointCloud) -> f64 {
    assert_eq!(a.len(), b.len(), "oracle needs equal-size clouds");
    assert!(a.len() <= 8, "oracle is factorial in the cloud size");
    let n = a.len();
    let cost: Vec<Vec<f64>> = a
        .points()
        .iter()
        .map(|p| b.points().iter().map(|q| (p - q).norm_squared()).collect())
        .collect();
    let mut used = vec![false; n];
    let mut best = f64::INFINITY;
    fn search(
        row: usize,
        acc: f64,
        cost: &[Vec<f64>],
        used: &mut [bool],
        best: &mut f64,
    ) {
        if acc >= *best {
            return;
        }
        if row == cost.len() {
            *best = acc;
            return;
        }
        for col in 0..cost.len() {
            if !used[col] {
                used[col] = true;
                search(row + 1, acc + cost[row][col], cost, used, best);
                used[col] = false;
            }
        }
    }
    search(0, 0.0, &cost, &mut used, &mut best);
    best / n as f64
}

/// Uniform random cloud in a centered cube of the given half-width.
pub fn random_cloud(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> PointCloud {
    PointCloud::new(
        (0..n)
            .map(|_| {
                Vector3::new(
                    rng.gen_range(-scale..scale),
                    rng.gen_range(-scale..scale),
                    rng.gen_range(-scale..scale),
                )
            })
            .collect(),
    )
    .unwrap()
}
