//! Rigid-motion extraction from dense point flows.
//!
//! Given per-point displacement vectors on a base cloud, [`rigid_fit`]
//! recovers the least-squares rigid transform mapping the base points onto
//! the displaced points: centroids are removed, the cross-covariance is
//! factored by SVD, and the smallest singular direction's sign is corrected
//! so the result is always a proper rotation (determinant +1), never a
//! reflection. Configurations that leave the rotation under-determined
//! (fewer than three points, or a collinear/coincident base) are rejected.

use nalgebra::{Matrix3, Vector3, SVD};

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, RigidTransform};
use crate::trajectory::PoseTrajectory;

/// A base cloud plus one displacement vector per point.
#[derive(Debug, Clone)]
pub struct PointFlow {
    base: PointCloud,
    flow: Vec<Vector3<f64>>,
}

impl PointFlow {
    pub fn new(base: PointCloud, flow: Vec<Vector3<f64>>) -> Result<Self> {
        if flow.len() != base.len() {
            return Err(Error::argument(format!(
                "flow has {} vectors for {} base points",
                flow.len(),
                base.len()
            )));
        }
        for (i, v) in flow.iter().enumerate() {
            if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
                return Err(Error::argument(format!(
                    "flow vector {i} has a non-finite component"
                )));
            }
        }
        Ok(PointFlow { base, flow })
    }

    pub fn base(&self) -> &PointCloud {
        &self.base
    }

    pub fn flow(&self) -> &[Vector3<f64>] {
        &self.flow
    }

    /// The base cloud with the flow applied.
    pub fn displaced(&self) -> PointCloud {
        PointCloud::new(
            self.base
                .points()
                .iter()
                .zip(&self.flow)
                .map(|(p, v)| p + v)
                .collect(),
        )
        .expect("displaced points validated through flow construction")
    }
}

/// Ratio under the largest base-scatter eigenvalue below which the second
/// direction counts as unresolved (collinear base).
const SCATTER_RATIO_FLOOR: f64 = 1e-12;
/// Absolute scatter floor in m² catching all-coincident bases.
const SCATTER_ABS_FLOOR: f64 = 1e-20;

/// Least-squares rigid transform mapping the base onto the displaced cloud.
pub fn rigid_fit(flow: &PointFlow) -> Result<RigidTransform> {
    let base = flow.base().points();
    let n = base.len();
    if n < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 points to resolve a rotation, got {n}"
        )));
    }
    let displaced = flow.displaced();
    let mu_p = flow.base().centroid();
    let mu_q = displaced.centroid();

    let mut cross = Matrix3::zeros();
    let mut scatter = Matrix3::zeros();
    for (p, q) in base.iter().zip(displaced.points()) {
        let cp = p - mu_p;
        let cq = q - mu_q;
        cross += cp * cq.transpose();
        scatter += cp * cp.transpose();
    }

    let mut eigen = scatter.symmetric_eigenvalues();
    eigen.as_mut_slice().sort_by(|a, b| b.total_cmp(a));
    if eigen[0] <= SCATTER_ABS_FLOOR || eigen[1] <= eigen[0] * SCATTER_RATIO_FLOOR {
        return Err(Error::DegenerateFit(format!(
            "base cloud is degenerate (scatter eigenvalues {:.3e}, {:.3e}, {:.3e})",
            eigen[0], eigen[1], eigen[2]
        )));
    }

    let svd = SVD::new(cross, true, true);
    let u = svd.u.expect("requested U");
    let v = svd.v_t.expect("requested Vᵀ").transpose();
    let sign = (v * u.transpose()).determinant().signum();
    let correction = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, sign));
    let rotation = v * correction * u.transpose();
    let translation = mu_q - rotation * mu_p;
    Ok(RigidTransform::from_rotation_matrix(&rotation, translation))
}

/// Mean squared distance between two executions of the same tool: the tool is
/// pushed through both pose chains and compared pointwise at every timestep.
pub fn flow_matching_error(
    predicted: &PoseTrajectory,
    reference: &PoseTrajectory,
    tool: &PointCloud,
) -> Result<f64> {
    if predicted.horizon() != reference.horizon() {
        return Err(Error::argument(format!(
            "horizon mismatch: predicted {} vs reference {}",
            predicted.horizon(),
            reference.horizon()
        )));
    }
    let mut sum = 0.0;
    for (a, b) in predicted.poses().iter().zip(reference.poses()) {
        let ra = a.rotation_matrix();
        let rb = b.rotation_matrix();
        for p in tool.points() {
            let pa = ra * p + a.translation();
            let pb = rb * p + b.translation();
            sum += (pa - pb).norm_squared();
        }
    }
    Ok(sum / ((predicted.poses().len() * tool.len()) as f64))
}
