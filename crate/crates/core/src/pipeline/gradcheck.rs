//! Finite-difference verification of the analytic surrogate gradients.
//!
//! Randomized harness over both optimizer stages: freeze correspondences at
//! a random iterate, then compare every analytic partial with a central
//! difference of the surrogate value. Exercised by the command line so a
//! build on new hardware can re-verify the calculus in seconds.

use nalgebra::{Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::EulerDelta;
use crate::metrics::NnIndex;
use crate::optimizer::frozen::{collect_pairs, rotation_from_raw, DeltaSurrogate, ResetSurrogate};

/// Largest acceptable relative error between analytic and finite-difference
/// gradients.
pub const GRAD_CHECK_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub trials: usize,
    pub fd_step: f64,
    pub threshold: f64,
    /// Worst relative gradient error seen across all trials and both stages.
    pub max_relative_error: f64,
    pub passed: bool,
}

/// Runs `trials` randomized gradient comparisons for each stage.
pub fn run_grad_check(seed: u64, trials: usize, fd_step: f64) -> Result<GradCheckReport> {
    if trials == 0 {
        return Err(Error::argument("gradient check needs at least one trial"));
    }
    if !(fd_step.is_finite() && fd_step > 0.0 && fd_step < 0.1) {
        return Err(Error::argument(format!(
            "finite-difference step must lie in (0, 0.1), got {fd_step}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        worst = worst.max(reset_trial(&mut rng, fd_step));
        worst = worst.max(delta_trial(&mut rng, fd_step));
    }
    Ok(GradCheckReport {
        trials,
        fd_step,
        threshold: GRAD_CHECK_THRESHOLD,
        max_relative_error: worst,
        passed: worst <= GRAD_CHECK_THRESHOLD,
    })
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<Vector3<f64>> {
    (0..n)
        .map(|_| {
            Vector3::new(
                rng.gen_range(-scale..scale),
                rng.gen_range(-scale..scale),
                rng.gen_range(-scale..scale),
            )
        })
        .collect()
}

fn random_quaternion(rng: &mut ChaCha8Rng) -> Vector4<f64> {
    loop {
        let q = Vector4::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if q.norm() > 0.3 {
            return q;
        }
    }
}

/// Component drawn away from zero so norm terms stay differentiable at the
/// probe point.
fn offset_component(rng: &mut ChaCha8Rng) -> f64 {
    let magnitude = rng.gen_range(0.03..0.12);
    if rng.gen_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

fn relative_error(analytic: &[f64], fd: &[f64]) -> f64 {
    let diff: f64 = analytic.iter().zip(fd).map(|(a, b)| (a - b).powi(2)).sum();
    let scale: f64 = fd.iter().map(|b| b * b).sum();
    (diff.sqrt()) / scale.sqrt().max(1e-9)
}

fn reset_trial(rng: &mut ChaCha8Rng, h: f64) -> f64 {
    let (n_tool, n_gen, n_obs) =
        (rng.gen_range(6..16), rng.gen_range(6..16), rng.gen_range(6..12));
    let tool = random_points(rng, n_tool, 0.2);
    let gen_cloud: Vec<Vector3<f64>> = random_points(rng, n_gen, 0.2)
        .into_iter()
        .map(|p| p + Vector3::new(0.3, 0.1, 0.0))
        .collect();
    let obs = random_points(rng, n_obs, 0.25);

    let q = random_quaternion(rng);
    let t = Vector3::new(
        rng.gen_range(-0.3..0.3),
        rng.gen_range(-0.3..0.3),
        rng.gen_range(-0.3..0.3),
    );
    let rot = rotation_from_raw(&q);
    let transformed: Vec<Vector3<f64>> = tool.iter().map(|p| rot * p + t).collect();

    let mut pairs = Vec::new();
    let gen_index = NnIndex::build(&gen_cloud);
    collect_pairs(&transformed, &gen_cloud, &gen_index, 1.0, &mut pairs);
    let obs_index = NnIndex::build(&obs);
    collect_pairs(&transformed, &obs, &obs_index, -0.1, &mut pairs);

    let surrogate = ResetSurrogate { tool: &tool, pairs: &pairs };
    let (grad_q, grad_t) = surrogate.gradient(&q, &t);
    let analytic: Vec<f64> = grad_q.iter().chain(grad_t.iter()).copied().collect();

    let mut fd = Vec::with_capacity(7);
    for i in 0..4 {
        let (mut hi, mut lo) = (q, q);
        hi[i] += h;
        lo[i] -= h;
        fd.push((surrogate.value(&hi, &t) - surrogate.value(&lo, &t)) / (2.0 * h));
    }
    for i in 0..3 {
        let (mut hi, mut lo) = (t, t);
        hi[i] += h;
        lo[i] -= h;
        fd.push((surrogate.value(&q, &hi) - surrogate.value(&q, &lo)) / (2.0 * h));
    }
    relative_error(&analytic, &fd)
}

fn delta_trial(rng: &mut ChaCha8Rng, h: f64) -> f64 {
    let horizon = rng.gen_range(1..=4);
    let n_tool = rng.gen_range(6..14);
    let tool = random_points(rng, n_tool, 0.15);

    let base_q = random_quaternion(rng);
    let base_rotation = rotation_from_raw(&base_q);
    let base_translation = Vector3::new(
        rng.gen_range(-0.2..0.2),
        rng.gen_range(-0.2..0.2),
        rng.gen_range(-0.2..0.2),
    );

    let params: Vec<EulerDelta> = (0..horizon)
        .map(|_| {
            EulerDelta::new(
                Vector3::new(
                    offset_component(rng),
                    offset_component(rng),
                    offset_component(rng),
                ),
                Vector3::new(
                    offset_component(rng),
                    offset_component(rng),
                    offset_component(rng),
                ),
            )
        })
        .collect();

    // Pose chain at the probe point, for gathering frozen pairs.
    let mut rotations = vec![base_rotation];
    let mut translations = vec![base_translation];
    for d in &params {
        let r = d.rotation_matrix();
        rotations.push(r * rotations.last().unwrap());
        translations.push(r * translations.last().unwrap() + d.translation);
    }

    let mut targets = Vec::with_capacity(horizon);
    let mut sizes = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        sizes.push(rng.gen_range(5..12));
    }
    for &n in &sizes {
        targets.push(
            random_points(rng, n, 0.2)
                .into_iter()
                .map(|p| p + Vector3::new(0.1, 0.0, 0.1))
                .collect::<Vec<_>>(),
        );
    }
    let mut pairs_per_frame = Vec::with_capacity(horizon);
    for (frame_idx, target) in targets.iter().enumerate() {
        let rot = &rotations[frame_idx + 1];
        let tr = &translations[frame_idx + 1];
        let transformed: Vec<Vector3<f64>> = tool.iter().map(|p| rot * p + tr).collect();
        let mut pairs = Vec::new();
        let index = NnIndex::build(target);
        collect_pairs(&transformed, target, &index, 1.0, &mut pairs);
        pairs_per_frame.push(pairs);
    }

    let surrogate = DeltaSurrogate {
        tool: &tool,
        base_rotation,
        base_translation,
        pairs_per_frame: &pairs_per_frame,
        lambda_r: 0.1,
    };
    let grads = surrogate.gradient(&params);
    let mut analytic = Vec::with_capacity(6 * horizon);
    for g in &grads {
        analytic.extend(g.rotation.iter().copied());
        analytic.extend(g.translation.iter().copied());
    }

    let mut fd = Vec::with_capacity(6 * horizon);
    for step in 0..horizon {
        for coord in 0..6 {
            let mut hi = params.clone();
            let mut lo = params.clone();
            let (hi_d, lo_d) = (&mut hi[step], &mut lo[step]);
            if coord < 3 {
                hi_d.rotation[coord] += h;
                lo_d.rotation[coord] -= h;
            } else {
                hi_d.translation[coord - 3] += h;
                lo_d.translation[coord - 3] -= h;
            }
            fd.push((surrogate.value(&hi) - surrogate.value(&lo)) / (2.0 * h));
        }
    }
    relative_error(&analytic, &fd)
}
