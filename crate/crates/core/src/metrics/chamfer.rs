//! Symmetric Chamfer distance between point clouds.

use nalgebra::Vector3;

use crate::geometry::PointCloud;

use super::dist2;
use super::kdtree::KdTree;

/// Target clouds larger than this use the kd-tree; smaller ones are scanned
/// directly.
const ACCEL_THRESHOLD: usize = 64;

/// Nearest-neighbor index over a slice of points, choosing brute force or the
/// kd-tree by size. Both routes return the same distances bit-for-bit.
pub(crate) enum NnIndex<'a> {
    Brute(&'a [Vector3<f64>]),
    Tree(KdTree<'a>),
}

impl<'a> NnIndex<'a> {
    pub fn build(points: &'a [Vector3<f64>]) -> Self {
        if points.len() > ACCEL_THRESHOLD {
            NnIndex::Tree(KdTree::build(points))
        } else {
            NnIndex::Brute(points)
        }
    }

    /// Exact nearest neighbor: `(index, squared distance)`.
    pub fn nearest(&self, query: &Vector3<f64>) -> (usize, f64) {
        match self {
            NnIndex::Brute(points) => nearest_brute(query, points),
            NnIndex::Tree(tree) => tree.nearest(query),
        }
    }
}

fn nearest_brute(query: &Vector3<f64>, points: &[Vector3<f64>]) -> (usize, f64) {
    // Seeding with point 0 keeps the index valid even when every distance
    // overflows to infinity (a diverged iterate far from the scene).
    let mut best = (0, dist2(query, &points[0]));
    for (i, p) in points.iter().enumerate().skip(1) {
        let d2 = dist2(query, p);
        if d2 < best.1 {
            best = (i, d2);
        }
    }
    best
}

fn mean_nearest_sq(from: &[Vector3<f64>], index: &NnIndex<'_>) -> f64 {
    let mut sum = 0.0;
    for p in from {
        sum += index.nearest(p).1;
    }
    sum / from.len() as f64
}

/// Symmetric Chamfer distance: the mean squared nearest-neighbor distance
/// from `a` into `b` plus the mean from `b` into `a`. Units are m².
pub fn chamfer(a: &PointCloud, b: &PointCloud) -> f64 {
    let ia = NnIndex::build(a.points());
    let ib = NnIndex::build(b.points());
    mean_nearest_sq(a.points(), &ib) + mean_nearest_sq(b.points(), &ia)
}

/// Brute-force reference implementation of [`chamfer`]; the accelerated route
/// must agree with this exactly.
pub fn chamfer_brute(a: &PointCloud, b: &PointCloud) -> f64 {
    let ia = NnIndex::Brute(a.points());
    let ib = NnIndex::Brute(b.points());
    mean_nearest_sq(a.points(), &ib) + mean_nearest_sq(b.points(), &ia)
}

/// Smallest inter-cloud point distance in meters (zero iff a point coincides).
pub fn min_distance(a: &PointCloud, b: &PointCloud) -> f64 {
    let ib = NnIndex::build(b.points());
    a.points()
        .iter()
        .map(|p| ib.nearest(p).1)
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}
