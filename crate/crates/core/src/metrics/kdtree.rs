//! Minimal 3-D kd-tree for exact nearest-neighbor queries.
//!
//! Built by median split along the widest axis, leaves of up to 16 points.
//! Queries prune a subtree only when the splitting-plane distance alone
//! already reaches the best squared distance, so the returned distance is the
//! exact minimum over all points — identical to a brute-force scan.

use nalgebra::Vector3;

use super::dist2;

const LEAF_SIZE: usize = 16;

enum Node {
    Leaf { start: usize, end: usize },
    Inner { axis: usize, split: f64, left: usize, right: usize },
}

pub(crate) struct KdTree<'a> {
    points: &'a [Vector3<f64>],
    order: Vec<u32>,
    nodes: Vec<Node>,
    root: usize,
}

impl<'a> KdTree<'a> {
    pub fn build(points: &'a [Vector3<f64>]) -> Self {
        let mut tree = KdTree {
            points,
            order: (0..points.len() as u32).collect(),
            nodes: Vec::with_capacity(points.len() / LEAF_SIZE * 2 + 1),
            root: 0,
        };
        tree.root = tree.build_range(0, points.len());
        tree
    }

    fn build_range(&mut self, start: usize, end: usize) -> usize {
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return self.nodes.len() - 1;
        }
        let (axis, split_idx) = self.split_range(start, end);
        let split = self.points[self.order[split_idx] as usize][axis];
        let left = self.build_range(start, split_idx);
        let right = self.build_range(split_idx, end);
        self.nodes.push(Node::Inner { axis, split, left, right });
        self.nodes.len() - 1
    }

    /// Picks the widest axis of the range and partitions around its median.
    fn split_range(&mut self, start: usize, end: usize) -> (usize, usize) {
        let mut min = self.points[self.order[start] as usize];
        let mut max = min;
        for &i in &self.order[start + 1..end] {
            min = min.inf(&self.points[i as usize]);
            max = max.sup(&self.points[i as usize]);
        }
        let extent = max - min;
        let mut axis = 0;
        if extent.y > extent[axis] {
            axis = 1;
        }
        if extent.z > extent[axis] {
            axis = 2;
        }
        let mid = (end - start) / 2;
        let pts = self.points;
        self.order[start..end].select_nth_unstable_by(mid, |&a, &b| {
            pts[a as usize][axis].total_cmp(&pts[b as usize][axis])
        });
        (axis, start + mid)
    }

    /// Exact nearest neighbor: `(index, squared distance)`.
    pub fn nearest(&self, query: &Vector3<f64>) -> (usize, f64) {
        // Point 0 seeds the search so the index stays valid even when every
        // distance overflows to infinity and no comparison can improve it.
        let mut best = (0, dist2(query, &self.points[0]));
        self.search(self.root, query, &mut best);
        best
    }

    fn search(&self, node: usize, query: &Vector3<f64>, best: &mut (usize, f64)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let d2 = dist2(query, &self.points[i as usize]);
                    if d2 < best.1 {
                        *best = (i as usize, d2);
                    }
                }
            }
            Node::Inner { axis, split, left, right } => {
                let diff = query[axis] - split;
                let (near, far) = if diff < 0.0 { (left, right) } else { (right, left) };
                self.search(near, query, best);
                if diff * diff < best.1 {
                    self.search(far, query, best);
                }
            }
        }
    }
}
