//! Point clouds, rigid transforms, and the small-angle delta parameterization.
//!
//! Conventions used everywhere:
//! * right-handed coordinates, distances in meters, angles in radians;
//! * quaternions stored `(w, x, y, z)` and canonicalized to `w >= 0` on
//!   construction (with ties at `w == 0` broken by the first nonzero
//!   component), so equal rotations have equal representations;
//! * Euler angles are fixed-axis XYZ: `R = Rz(yaw) * Ry(pitch) * Rx(roll)`.

mod io;

use nalgebra::{Matrix3, Quaternion, Rotation3, UnitQuaternion, Vector3, Vector4};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Quaternion norms at or below this are treated as degenerate.
pub const MIN_QUATERNION_NORM: f64 = 1e-12;

/// A non-empty set of finite 3-D points.
#[derive(Debug, Clone)]
pub struct PointCloud {
    points: Vec<Vector3<f64>>,
}

impl PointCloud {
    /// Validates that the cloud is non-empty and every coordinate is finite.
    pub fn new(points: Vec<Vector3<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::argument("point cloud must contain at least one point"));
        }
        for (i, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
                return Err(Error::argument(format!(
                    "point {i} has a non-finite coordinate: ({}, {}, {})",
                    p.x, p.y, p.z
                )));
            }
        }
        Ok(PointCloud { points })
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Clouds are never empty, kept for `len`/`is_empty` pairing lints.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn centroid(&self) -> Vector3<f64> {
        self.points.iter().sum::<Vector3<f64>>() / self.points.len() as f64
    }

    pub fn bounding_box(&self) -> Aabb {
        let mut min = self.points[0];
        let mut max = self.points[0];
        for p in &self.points[1..] {
            min = min.inf(p);
            max = max.sup(p);
        }
        Aabb { min, max }
    }

    /// Largest pairwise distance. Quadratic, intended for desk-scale clouds.
    pub fn diameter(&self) -> f64 {
        let mut best = 0.0f64;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                best = best.max((p - q).norm_squared());
            }
        }
        best.sqrt()
    }
}

/// An axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Aabb {
    pub fn new(min: Vector3<f64>, max: Vector3<f64>) -> Result<Self> {
        if !(min.iter().all(|v| v.is_finite()) && max.iter().all(|v| v.is_finite())) {
            return Err(Error::argument("bounding box corners must be finite"));
        }
        if min.iter().zip(max.iter()).any(|(lo, hi)| lo > hi) {
            return Err(Error::argument(format!(
                "bounding box min {:?} exceeds max {:?}",
                min, max
            )));
        }
        Ok(Aabb { min, max })
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    /// Grows the box by `margin` on every side.
    pub fn inflate(&self, margin: f64) -> Aabb {
        let m = Vector3::repeat(margin);
        Aabb {
            min: self.min - m,
            max: self.max + m,
        }
    }

    pub fn center(&self) -> Vector3<f64> {
        (self.min + self.max) * 0.5
    }

    pub fn extents(&self) -> Vector3<f64> {
        self.max - self.min
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        (0..3).all(|i| self.min[i] <= p[i] && p[i] <= self.max[i])
    }
}

/// A rotation + translation, applied as `R * p + t`.
#[derive(Debug, Clone, Copy)]
pub struct RigidTransform {
    rotation: UnitQuaternion<f64>,
    translation: Vector3<f64>,
}

impl RigidTransform {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: UnitQuaternion::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds from an already-normalized rotation; canonicalizes the sign.
    pub fn from_parts(rotation: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        RigidTransform {
            rotation: canonicalize_quaternion(rotation),
            translation,
        }
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        RigidTransform {
            rotation: UnitQuaternion::identity(),
            translation,
        }
    }

    /// Builds from a raw `(w, x, y, z)` quaternion, normalizing it first.
    pub fn from_quaternion_vector(q: Vector4<f64>, translation: Vector3<f64>) -> Result<Self> {
        let unit = project_unit_quaternion(q)?;
        Ok(Self::from_parts(unit_from_vector(unit), translation))
    }

    /// Builds from an `(w, x, y, z)` quaternion that must already be within
    /// `1e-6` of unit norm; the components are used exactly as given (no
    /// renormalization), which keeps file round trips bit-stable.
    pub fn from_normalized_components(q: Vector4<f64>, translation: Vector3<f64>) -> Result<Self> {
        let norm = q.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-6 {
            return Err(Error::argument(format!(
                "quaternion norm {norm} is not within 1e-6 of 1"
            )));
        }
        Ok(RigidTransform {
            rotation: canonicalize_quaternion(UnitQuaternion::new_unchecked(Quaternion::new(
                q.x, q.y, q.z, q.w,
            ))),
            translation,
        })
    }

    pub fn from_rotation_matrix(rotation: &Matrix3<f64>, translation: Vector3<f64>) -> Self {
        let rot = Rotation3::from_matrix_unchecked(*rotation);
        Self::from_parts(UnitQuaternion::from_rotation_matrix(&rot), translation)
    }

    pub fn rotation(&self) -> &UnitQuaternion<f64> {
        &self.rotation
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        self.rotation.to_rotation_matrix().into_inner()
    }

    /// Rotation as `(w, x, y, z)`.
    pub fn quaternion_vector(&self) -> Vector4<f64> {
        let q = self.rotation.quaternion();
        Vector4::new(q.w, q.i, q.j, q.k)
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.translation
    }

    pub fn apply_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    pub fn apply(&self, cloud: &PointCloud) -> PointCloud {
        let rot = self.rotation_matrix();
        PointCloud {
            points: cloud
                .points
                .iter()
                .map(|p| rot * p + self.translation)
                .collect(),
        }
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform::from_parts(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn inverse(&self) -> RigidTransform {
        let inv_rot = self.rotation.inverse();
        RigidTransform::from_parts(inv_rot, -(inv_rot * self.translation))
    }

    /// Rotation angle in `[0, π]`.
    pub fn rotation_angle(&self) -> f64 {
        self.rotation.angle()
    }
}

/// Normalizes a raw `(w, x, y, z)` quaternion onto the unit sphere.
///
/// Returns exactly `q / ‖q‖` (no sign canonicalization), so the projection is
/// idempotent. Errors when the norm is at or below [`MIN_QUATERNION_NORM`].
pub fn project_unit_quaternion(q: Vector4<f64>) -> Result<Vector4<f64>> {
    let norm = q.norm();
    if !norm.is_finite() || norm <= MIN_QUATERNION_NORM {
        return Err(Error::DegenerateQuaternion {
            norm,
            min: MIN_QUATERNION_NORM,
        });
    }
    Ok(q / norm)
}

/// Flips the sign so `w > 0`, or if `w == 0` so the first nonzero of
/// `(x, y, z)` is positive. Both signs encode the same rotation.
pub fn canonicalize_quaternion(q: UnitQuaternion<f64>) -> UnitQuaternion<f64> {
    let inner = q.quaternion();
    let flip = if inner.w != 0.0 {
        inner.w < 0.0
    } else {
        let first = [inner.i, inner.j, inner.k]
            .into_iter()
            .find(|v| *v != 0.0)
            .unwrap_or(0.0);
        first < 0.0
    };
    if flip {
        UnitQuaternion::new_unchecked(-inner)
    } else {
        q
    }
}

fn unit_from_vector(q: Vector4<f64>) -> UnitQuaternion<f64> {
    UnitQuaternion::new_unchecked(Quaternion::new(q.x, q.y, q.z, q.w))
}

/// A per-step pose parameterized by fixed-axis XYZ Euler angles and a
/// translation; the small-motion parameterization used by the delta stage.
#[derive(Debug, Clone, Copy)]
pub struct EulerDelta {
    /// `(roll, pitch, yaw)` about the fixed x, y, z axes.
    pub rotation: Vector3<f64>,
    pub translation: Vector3<f64>,
}

impl EulerDelta {
    pub fn zero() -> Self {
        EulerDelta {
            rotation: Vector3::zeros(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: Vector3<f64>, translation: Vector3<f64>) -> Self {
        EulerDelta {
            rotation,
            translation,
        }
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        Rotation3::from_euler_angles(self.rotation.x, self.rotation.y, self.rotation.z)
            .into_inner()
    }

    pub fn to_transform(&self) -> RigidTransform {
        RigidTransform::from_parts(
            UnitQuaternion::from_euler_angles(self.rotation.x, self.rotation.y, self.rotation.z),
            self.translation,
        )
    }

    /// Extracts angles in `(−π, π]` (pitch in `[−π/2, π/2]`) from a transform.
    pub fn from_transform(t: &RigidTransform) -> Self {
        let (roll, pitch, yaw) = t.rotation().euler_angles();
        EulerDelta {
            rotation: Vector3::new(roll, pitch, yaw),
            translation: t.translation(),
        }
    }
}

/// Uniform random rotation: four standard normals, normalized.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> UnitQuaternion<f64> {
    loop {
        let q = Vector4::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        if let Ok(unit) = project_unit_quaternion(q) {
            return canonicalize_quaternion(unit_from_vector(unit));
        }
    }
}

/// Uniform random point inside an axis-aligned box.
pub fn random_point_in<R: Rng + ?Sized>(aabb: &Aabb, rng: &mut R) -> Vector3<f64> {
    Vector3::new(
        sample_range(rng, aabb.min.x, aabb.max.x),
        sample_range(rng, aabb.min.y, aabb.max.y),
        sample_range(rng, aabb.min.z, aabb.max.z),
    )
}

fn sample_range<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..hi)
    }
}
