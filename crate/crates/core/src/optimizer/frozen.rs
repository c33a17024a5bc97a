//! Frozen-correspondence surrogate objectives and their analytic gradients.
//!
//! Each optimizer iteration recomputes nearest-neighbor correspondences at
//! the current iterate and then treats them as constant: the surrogate is a
//! weighted sum of squared point-to-target distances, smooth in the pose
//! parameters, and its gradient is the subgradient the descent follows.
//! Step acceptance compares surrogate values on the same frozen pairs.
//!
//! The reset stage differentiates with respect to a raw quaternion. To keep
//! the objective well-defined off the unit sphere (finite differences probe
//! there), the rotation is the homogeneous form `R_h(q) / ‖q‖²`, which equals
//! the standard rotation for unit `q` and is scale-invariant, so gradients
//! are automatically tangent to the sphere.

use nalgebra::{Matrix3, Vector3, Vector4};

use crate::geometry::EulerDelta;
use crate::metrics::NnIndex;

/// One frozen correspondence: a tool point index, the target it was matched
/// to, and the (signed) weight of its squared distance in the objective.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Pair {
    pub tool_idx: u32,
    pub target: Vector3<f64>,
    pub weight: f64,
}

/// Collects both Chamfer directions between already-transformed tool points
/// and a target cloud, appending to `pairs`. Returns the objective
/// contribution, i.e. `scale` times the Chamfer value at the anchor.
pub(crate) fn collect_pairs(
    transformed: &[Vector3<f64>],
    target: &[Vector3<f64>],
    target_index: &NnIndex<'_>,
    scale: f64,
    pairs: &mut Vec<Pair>,
) -> f64 {
    let mut value = 0.0;
    let w_fwd = scale / transformed.len() as f64;
    for (k, y) in transformed.iter().enumerate() {
        let (j, d2) = target_index.nearest(y);
        pairs.push(Pair {
            tool_idx: k as u32,
            target: target[j],
            weight: w_fwd,
        });
        value += w_fwd * d2;
    }
    let transformed_index = NnIndex::build(transformed);
    let w_rev = scale / target.len() as f64;
    for z in target {
        let (k, d2) = transformed_index.nearest(z);
        pairs.push(Pair {
            tool_idx: k as u32,
            target: *z,
            weight: w_rev,
        });
        value += w_rev * d2;
    }
    value
}

/// Homogeneous rotation `R_h(q) / ‖q‖²` for a raw `(w, x, y, z)` quaternion.
pub(crate) fn rotation_from_raw(q: &Vector4<f64>) -> Matrix3<f64> {
    let (w, x, y, z) = (q.x, q.y, q.z, q.w);
    let s = w * w + x * x + y * y + z * z;
    Matrix3::new(
        w * w + x * x - y * y - z * z,
        2.0 * (x * y - w * z),
        2.0 * (x * z + w * y),
        2.0 * (x * y + w * z),
        w * w - x * x + y * y - z * z,
        2.0 * (y * z - w * x),
        2.0 * (x * z - w * y),
        2.0 * (y * z + w * x),
        w * w - x * x - y * y + z * z,
    ) / s
}

/// Partial derivatives of the *unnormalized* homogeneous form `R_h` with
/// respect to `(w, x, y, z)`.
fn homogeneous_partials(q: &Vector4<f64>) -> [Matrix3<f64>; 4] {
    let (w, x, y, z) = (q.x, q.y, q.z, q.w);
    [
        Matrix3::new(w, -z, y, z, w, -x, -y, x, w) * 2.0,
        Matrix3::new(x, y, z, y, -x, -w, z, w, -x) * 2.0,
        Matrix3::new(-y, x, w, x, y, z, -w, z, -y) * 2.0,
        Matrix3::new(-z, -w, x, w, -z, y, x, y, z) * 2.0,
    ]
}

/// Frozen surrogate for the reset stage:
/// `J(q, t) = Σ w_k ‖R(q) p_k + t − z_k‖²` over the frozen pairs.
pub(crate) struct ResetSurrogate<'a> {
    pub tool: &'a [Vector3<f64>],
    pub pairs: &'a [Pair],
}

impl ResetSurrogate<'_> {
    pub fn value(&self, q: &Vector4<f64>, t: &Vector3<f64>) -> f64 {
        let rot = rotation_from_raw(q);
        let mut value = 0.0;
        for pair in self.pairs {
            let y = rot * self.tool[pair.tool_idx as usize] + t;
            value += pair.weight * (y - pair.target).norm_squared();
        }
        value
    }

    /// Analytic gradient `(∂J/∂q, ∂J/∂t)`.
    pub fn gradient(&self, q: &Vector4<f64>, t: &Vector3<f64>) -> (Vector4<f64>, Vector3<f64>) {
        let rot = rotation_from_raw(q);
        let s = q.norm_squared();
        // M = Σ 2 w r pᵀ and c = Σ 2 w rᵀ(Rp) drive the quaternion gradient:
        // ∂J/∂q_m = (⟨∂R_h/∂q_m, M⟩_F − 2 q_m c) / s.
        let mut m = Matrix3::zeros();
        let mut c = 0.0;
        let mut grad_t = Vector3::zeros();
        for pair in self.pairs {
            let p = self.tool[pair.tool_idx as usize];
            let u = rot * p;
            let r = (u + t - pair.target) * (2.0 * pair.weight);
            grad_t += r;
            m += r * p.transpose();
            c += r.dot(&u);
        }
        let partials = homogeneous_partials(q);
        let mut grad_q = Vector4::zeros();
        for (i, partial) in partials.iter().enumerate() {
            grad_q[i] = (partial.dot(&m) - 2.0 * q[i] * c) / s;
        }
        (grad_q, grad_t)
    }
}

/// Gradient of the delta stage with respect to one step's six parameters.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DeltaGrad {
    pub rotation: Vector3<f64>,
    pub translation: Vector3<f64>,
}

/// Frozen surrogate for the delta stage: pairs are grouped per frame
/// (`pairs_per_frame[t-1]` belongs to generated frame `t`), the pose chain is
/// `A_t = T(e_t, τ_t) ∘ A_{t−1}` starting from the fixed reset pose, and the
/// regularizer `λ_r Σ_t (‖τ_t‖ + ‖e_t‖)` is included in the value and
/// gradient.
pub(crate) struct DeltaSurrogate<'a> {
    pub tool: &'a [Vector3<f64>],
    pub base_rotation: Matrix3<f64>,
    pub base_translation: Vector3<f64>,
    pub pairs_per_frame: &'a [Vec<Pair>],
    pub lambda_r: f64,
}

impl DeltaSurrogate<'_> {
    fn chain(&self, params: &[EulerDelta]) -> (Vec<Matrix3<f64>>, Vec<Vector3<f64>>) {
        let horizon = params.len();
        let mut rotations = Vec::with_capacity(horizon + 1);
        let mut translations = Vec::with_capacity(horizon + 1);
        rotations.push(self.base_rotation);
        translations.push(self.base_translation);
        for delta in params {
            let step_rot = delta.rotation_matrix();
            let prev_rot = rotations.last().expect("seeded with base");
            let prev_tr = translations.last().expect("seeded with base");
            rotations.push(step_rot * prev_rot);
            translations.push(step_rot * prev_tr + delta.translation);
        }
        (rotations, translations)
    }

    fn regularizer(&self, params: &[EulerDelta]) -> f64 {
        self.lambda_r
            * params
                .iter()
                .map(|d| d.translation.norm() + d.rotation.norm())
                .sum::<f64>()
    }

    pub fn value(&self, params: &[EulerDelta]) -> f64 {
        debug_assert_eq!(params.len(), self.pairs_per_frame.len());
        let (rotations, translations) = self.chain(params);
        let mut value = self.regularizer(params);
        for (frame_idx, pairs) in self.pairs_per_frame.iter().enumerate() {
            let rot = &rotations[frame_idx + 1];
            let tr = &translations[frame_idx + 1];
            for pair in pairs {
                let y = rot * self.tool[pair.tool_idx as usize] + tr;
                value += pair.weight * (y - pair.target).norm_squared();
            }
        }
        value
    }

    /// Reverse-mode gradient over the whole chain in `O(H · n)`.
    pub fn gradient(&self, params: &[EulerDelta]) -> Vec<DeltaGrad> {
        let horizon = params.len();
        let n = self.tool.len();
        let (rotations, translations) = self.chain(params);

        // Transformed tool points for every timestep.
        let mut points = Vec::with_capacity(horizon + 1);
        for t in 0..=horizon {
            let rot = &rotations[t];
            let tr = &translations[t];
            points.push(
                self.tool
                    .iter()
                    .map(|p| rot * p + tr)
                    .collect::<Vec<Vector3<f64>>>(),
            );
        }

        // Per-frame residual gradients g^t_k = Σ 2 w (y^t_k − z).
        let mut residual_grads = vec![vec![Vector3::zeros(); n]; horizon + 1];
        for (frame_idx, pairs) in self.pairs_per_frame.iter().enumerate() {
            let frame = frame_idx + 1;
            for pair in pairs {
                let k = pair.tool_idx as usize;
                let r = (points[frame][k] - pair.target) * (2.0 * pair.weight);
                residual_grads[frame][k] += r;
            }
        }

        // Backward sweep: a^t_k = g^t_k + R_{t+1}ᵀ a^{t+1}_k; the step-t
        // gradients read a^t against the previous frame's points.
        let mut grads = vec![
            DeltaGrad {
                rotation: Vector3::zeros(),
                translation: Vector3::zeros(),
            };
            horizon
        ];
        let mut adjoint = residual_grads[horizon].clone();
        for t in (1..=horizon).rev() {
            let mut grad_tau = Vector3::zeros();
            let mut outer = Matrix3::zeros();
            for k in 0..n {
                grad_tau += adjoint[k];
                outer += adjoint[k] * points[t - 1][k].transpose();
            }
            let delta = &params[t - 1];
            let partials = euler_partials(&delta.rotation);
            let mut grad_rot = Vector3::new(
                partials[0].dot(&outer),
                partials[1].dot(&outer),
                partials[2].dot(&outer),
            );
            // Norm regularizer; subgradient 0 at the kink.
            if delta.rotation.norm() > 0.0 {
                grad_rot += self.lambda_r * delta.rotation / delta.rotation.norm();
            }
            if delta.translation.norm() > 0.0 {
                grad_tau += self.lambda_r * delta.translation / delta.translation.norm();
            }
            grads[t - 1] = DeltaGrad {
                rotation: grad_rot,
                translation: grad_tau,
            };

            if t > 1 {
                let step_rot_t = delta.rotation_matrix().transpose();
                for k in 0..n {
                    adjoint[k] = step_rot_t * adjoint[k] + residual_grads[t - 1][k];
                }
            }
        }
        grads
    }
}

/// Partials of `R = Rz(yaw) Ry(pitch) Rx(roll)` with respect to each angle.
fn euler_partials(angles: &Vector3<f64>) -> [Matrix3<f64>; 3] {
    let (sa, ca) = angles.x.sin_cos();
    let (sb, cb) = angles.y.sin_cos();
    let (sc, cc) = angles.z.sin_cos();
    let rx = Matrix3::new(1.0, 0.0, 0.0, 0.0, ca, -sa, 0.0, sa, ca);
    let ry = Matrix3::new(cb, 0.0, sb, 0.0, 1.0, 0.0, -sb, 0.0, cb);
    let rz = Matrix3::new(cc, -sc, 0.0, sc, cc, 0.0, 0.0, 0.0, 1.0);
    let drx = Matrix3::new(0.0, 0.0, 0.0, 0.0, -sa, -ca, 0.0, ca, -sa);
    let dry = Matrix3::new(-sb, 0.0, cb, 0.0, 0.0, 0.0, -cb, 0.0, -sb);
    let drz = Matrix3::new(-sc, -cc, 0.0, cc, -sc, 0.0, 0.0, 0.0, 0.0);
    [rz * ry * drx, rz * dry * rx, drz * ry * rx]
}
