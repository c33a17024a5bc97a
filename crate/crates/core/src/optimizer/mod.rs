//! Sequential pose optimization: a multi-start projected gradient descent
//! for the reset pose, then a joint gradient descent over per-step deltas.
//!
//! Both stages follow the same template per iteration: recompute
//! nearest-neighbor correspondences at the current iterate, freeze them,
//! take one analytic-gradient step on the frozen surrogate, and accept the
//! step only if the surrogate did not increase — halving the step down to a
//! floor of 1e-8 otherwise. Convergence is declared when the objective moved
//! less than 1e-8 over the last 10 iterations.

mod config;
mod delta;
pub(crate) mod frozen;
mod reset;

pub use config::OptimizerConfig;
pub use delta::optimize_deltas;
pub use reset::{optimize_reset, optimize_reset_from, sample_reset_inits};

use crate::geometry::{EulerDelta, PointCloud, RigidTransform};
use crate::metrics::chamfer;
use crate::trajectory::{GeneratedTrajectory, PoseTrajectory};
use crate::error::{Error, Result};

/// Objective change per [`CONVERGENCE_WINDOW`] iterations below which a
/// descent counts as converged.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-8;
pub const CONVERGENCE_WINDOW: usize = 10;
/// Step sizes are halved on rejected steps, down to this floor.
pub const STEP_FLOOR: f64 = 1e-8;

/// Outcome of the reset stage.
#[derive(Debug, Clone)]
pub struct ResetResult {
    pub transform: RigidTransform,
    /// Reset objective at the returned transform.
    pub cost: f64,
    /// Which init produced the winner (ties go to the lower index).
    pub init_index: usize,
    /// Whether that init met the convergence window before its budget.
    pub converged: bool,
}

/// Outcome of the delta stage.
#[derive(Debug, Clone)]
pub struct DeltaResult {
    /// One small-motion delta per step `t = 1..=H`.
    pub deltas: Vec<EulerDelta>,
    /// Final delta objective (tracking terms plus regularizer).
    pub cost: f64,
    /// Chamfer distance per step between the executed tool and each frame.
    pub per_step_residuals: Vec<f64>,
}

/// Reset objective: track the first generated frame while being pushed away
/// from the observed scene.
pub fn reset_objective(
    transform: &RigidTransform,
    tool: &PointCloud,
    gen_first: &PointCloud,
    obs: &PointCloud,
    lambda_c: f64,
) -> f64 {
    let moved = transform.apply(tool);
    chamfer(&moved, gen_first) - lambda_c * chamfer(&moved, obs)
}

/// Delta objective: Chamfer tracking of frames `1..=H` by the chained pose,
/// plus `λ_r Σ (‖τ_t‖ + ‖ρ_t‖)` on the step magnitudes.
pub fn delta_objective(
    deltas: &[EulerDelta],
    reset: &RigidTransform,
    tool: &PointCloud,
    gen: &GeneratedTrajectory,
    lambda_r: f64,
) -> Result<f64> {
    if deltas.len() != gen.horizon() {
        return Err(Error::argument(format!(
            "got {} deltas for horizon {}",
            deltas.len(),
            gen.horizon()
        )));
    }
    let transforms: Vec<RigidTransform> = deltas.iter().map(EulerDelta::to_transform).collect();
    let poses = PoseTrajectory::from_deltas(*reset, &transforms);
    let mut value = 0.0;
    for t in 1..=gen.horizon() {
        value += chamfer(&poses.poses()[t].apply(tool), gen.frame(t));
    }
    value += lambda_r
        * deltas
            .iter()
            .map(|d| d.translation.norm() + d.rotation.norm())
            .sum::<f64>();
    Ok(value)
}

/// Shared descent bookkeeping: records objective values and answers whether
/// the convergence window closed.
pub(crate) struct ConvergenceTracker {
    history: Vec<f64>,
}

impl ConvergenceTracker {
    pub fn new() -> Self {
        ConvergenceTracker { history: Vec::new() }
    }

    /// Pushes the latest objective; true when the change over the last
    /// [`CONVERGENCE_WINDOW`] iterations dropped below the tolerance.
    pub fn push(&mut self, value: f64) -> bool {
        self.history.push(value);
        let len = self.history.len();
        len > CONVERGENCE_WINDOW
            && (self.history[len - 1 - CONVERGENCE_WINDOW] - value).abs() < CONVERGENCE_TOLERANCE
    }
}
