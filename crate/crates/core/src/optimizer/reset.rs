//! Multi-start projected gradient descent for the reset pose.

use nalgebra::{Vector3, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{
    project_unit_quaternion, random_point_in, random_rotation, PointCloud, RigidTransform,
};
use crate::metrics::NnIndex;
use crate::parallel::map_indexed;

use super::frozen::{collect_pairs, rotation_from_raw, Pair, ResetSurrogate};
use super::{reset_objective, ConvergenceTracker, OptimizerConfig, ResetResult, STEP_FLOOR};

/// Samples the reset inits: uniform rotations, and translations chosen so
/// the tool's centroid lands uniformly in the configured box (by default
/// the bounding box of the first generated frame united with the
/// observation, inflated by 0.2 m). Anchoring the centroid rather than the
/// tool's file-frame origin keeps the sampled placements inside the scene
/// even when the cloud is stored far from its own origin. Init `i` draws
/// from stream `i` of the seeded RNG, so the set is stable under
/// parallelism and under changes to `num_inits`.
pub fn sample_reset_inits(
    tool: &PointCloud,
    gen_first: &PointCloud,
    obs: &PointCloud,
    config: &OptimizerConfig,
) -> Vec<RigidTransform> {
    let bounds = config.init_translation_bounds.unwrap_or_else(|| {
        gen_first
            .bounding_box()
            .union(&obs.bounding_box())
            .inflate(0.2)
    });
    let centroid = tool.centroid();
    (0..config.num_inits)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
            rng.set_stream(i as u64);
            let rotation = random_rotation(&mut rng);
            let anchor = random_point_in(&bounds, &mut rng);
            RigidTransform::from_parts(rotation, anchor - rotation * centroid)
        })
        .collect()
}

/// Runs the full multi-start reset optimization.
pub fn optimize_reset(
    tool: &PointCloud,
    gen_first: &PointCloud,
    obs: &PointCloud,
    config: &OptimizerConfig,
) -> Result<ResetResult> {
    config.validate()?;
    let inits = sample_reset_inits(tool, gen_first, obs, config);
    optimize_reset_from(tool, gen_first, obs, config, &inits)
}

/// Deterministic entry point: descends from exactly the given inits and
/// returns the best final pose (ties broken by the lower init index).
///
/// Internally the descent rotates the tool about its centroid, which keeps
/// the rotation coordinates well conditioned no matter where the cloud sits
/// relative to its file-frame origin; inits and the returned transform use
/// plain tool-frame semantics throughout.
pub fn optimize_reset_from(
    tool: &PointCloud,
    gen_first: &PointCloud,
    obs: &PointCloud,
    config: &OptimizerConfig,
    inits: &[RigidTransform],
) -> Result<ResetResult> {
    config.validate()?;
    if inits.is_empty() {
        return Err(Error::argument("at least one init is required"));
    }

    let centroid = tool.centroid();
    let centered = PointCloud::new(tool.points().iter().map(|p| p - centroid).collect())
        .expect("centering preserves cloud validity");

    let runs = map_indexed(inits, |index, init| {
        descend_single(tool, &centered, centroid, gen_first, obs, config, init, index)
    });

    let mut best: Option<ResetResult> = None;
    let mut diagnostics = Vec::with_capacity(runs.len());
    for run in runs {
        match run {
            Ok(result) => {
                diagnostics.push(format!(
                    "init {}: cost {:.6e}, converged {}",
                    result.init_index, result.cost, result.converged
                ));
                let better = match &best {
                    None => true,
                    Some(current) => result.cost < current.cost,
                };
                if better {
                    best = Some(result);
                }
            }
            Err(line) => diagnostics.push(line),
        }
    }
    best.ok_or(Error::OptimizationFailed {
        message: "every reset init diverged to a non-finite objective".into(),
        diagnostics,
    })
}

/// One projected gradient descent on the centroid-centered tool; errors (as
/// a diagnostic line) when the objective becomes non-finite.
#[allow(clippy::too_many_arguments)]
fn descend_single(
    tool: &PointCloud,
    centered: &PointCloud,
    centroid: Vector3<f64>,
    gen_first: &PointCloud,
    obs: &PointCloud,
    config: &OptimizerConfig,
    init: &RigidTransform,
    index: usize,
) -> std::result::Result<ResetResult, String> {
    let gen_index = NnIndex::build(gen_first.points());
    let obs_index = NnIndex::build(obs.points());

    let mut q: Vector4<f64> = init.quaternion_vector();
    // Centered coordinates: the translation is where the centroid goes.
    let mut t: Vector3<f64> = init.translation() + init.rotation() * centroid;
    let mut tracker = ConvergenceTracker::new();
    let mut converged = false;
    let mut pairs: Vec<Pair> = Vec::new();

    for iteration in 0..config.reset_iterations {
        // Fresh correspondences at the current iterate.
        let rot = rotation_from_raw(&q);
        let transformed: Vec<Vector3<f64>> =
            centered.points().iter().map(|p| rot * p + t).collect();
        pairs.clear();
        let mut objective =
            collect_pairs(&transformed, gen_first.points(), &gen_index, 1.0, &mut pairs);
        objective += collect_pairs(
            &transformed,
            obs.points(),
            &obs_index,
            -config.lambda_c,
            &mut pairs,
        );
        if !objective.is_finite() {
            return Err(format!(
                "init {index}: objective became non-finite at iteration {iteration}"
            ));
        }
        if tracker.push(objective) {
            converged = true;
            break;
        }

        let surrogate = ResetSurrogate {
            tool: centered.points(),
            pairs: &pairs,
        };
        let anchor = surrogate.value(&q, &t);
        let (grad_q, grad_t) = surrogate.gradient(&q, &t);

        // Backtracking: accept only non-increasing surrogate values.
        let mut step = config.reset_step_size;
        loop {
            let trial_q = q - step * grad_q;
            let trial_t = t - step * grad_t;
            let trial = match project_unit_quaternion(trial_q) {
                Ok(projected) => {
                    let value = surrogate.value(&projected, &trial_t);
                    (value.is_finite() && value <= anchor).then_some((projected, trial_t))
                }
                Err(_) => None,
            };
            if let Some((new_q, new_t)) = trial {
                q = new_q;
                t = new_t;
                break;
            }
            step *= 0.5;
            if step < STEP_FLOOR {
                break; // keep the current iterate
            }
        }
    }

    // Back to tool-frame semantics: R·(p − c) + t  ≡  R·p + (t − R·c).
    let final_rot = rotation_from_raw(&q);
    let transform = RigidTransform::from_quaternion_vector(q, t - final_rot * centroid)
        .map_err(|e| format!("init {index}: {e}"))?;
    let cost = reset_objective(&transform, tool, gen_first, obs, config.lambda_c);
    if !cost.is_finite() {
        return Err(format!("init {index}: final objective is non-finite"));
    }
    Ok(ResetResult {
        transform,
        cost,
        init_index: index,
        converged,
    })
}
