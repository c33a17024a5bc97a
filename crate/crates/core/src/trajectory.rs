//! Trajectory containers and their on-disk formats.
//!
//! A [`GeneratedTrajectory`] is the target: one point cloud per timestep,
//! stored as `frame <t>` blocks of `x y z` lines. A [`PoseTrajectory`] is the
//! executable answer: absolute rigid poses per timestep (row 0 is the reset
//! pose), stored as CSV with header `t,tx,ty,tz,qw,qx,qy,qz`.
//!
//! Pose rows are written with nine significant digits and re-read without
//! renormalizing (the parsed quaternion is used as-is after a unit-norm
//! sanity check), so writing a parsed trajectory reproduces the file byte for
//! byte and residuals computed from quantized poses survive a round trip.

use std::fs;
use std::path::Path;

use nalgebra::{Vector3, Vector4};

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, RigidTransform};
use crate::numfmt::{quantize, sig9};

/// A sequence of target point clouds, one per timestep `0..=H`.
#[derive(Debug, Clone)]
pub struct GeneratedTrajectory {
    frames: Vec<PointCloud>,
}

impl GeneratedTrajectory {
    pub fn new(frames: Vec<PointCloud>) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::argument(
                "generated trajectory needs at least one frame",
            ));
        }
        Ok(GeneratedTrajectory { frames })
    }

    /// Number of delta steps `H`; one less than the frame count.
    pub fn horizon(&self) -> usize {
        self.frames.len() - 1
    }

    pub fn frames(&self) -> &[PointCloud] {
        &self.frames
    }

    pub fn frame(&self, t: usize) -> &PointCloud {
        &self.frames[t]
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        const KIND: &str = "generated trajectory";
        let mut frames: Vec<PointCloud> = Vec::new();
        let mut current: Vec<Vector3<f64>> = Vec::new();
        let mut open_frame: Option<usize> = None;
        let mut last_line = 0;

        let close_frame = |current: &mut Vec<Vector3<f64>>,
                               frames: &mut Vec<PointCloud>,
                               frame: usize,
                               line: usize|
         -> Result<()> {
            if current.is_empty() {
                return Err(Error::format(
                    KIND,
                    line,
                    format!("frame {frame} declares no points"),
                ));
            }
            frames.push(PointCloud::new(std::mem::take(current))?);
            Ok(())
        };

        for (idx, raw) in text.lines().enumerate() {
            last_line = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("frame") {
                let rest = rest.trim();
                let index: usize = rest.parse().map_err(|_| {
                    Error::format(KIND, idx + 1, format!("bad frame index `{rest}`"))
                })?;
                if let Some(open) = open_frame {
                    close_frame(&mut current, &mut frames, open, idx + 1)?;
                }
                let expected = frames.len();
                if index != expected {
                    return Err(Error::format(
                        KIND,
                        idx + 1,
                        format!("expected frame {expected}, found frame {index}"),
                    ));
                }
                open_frame = Some(index);
                continue;
            }
            if open_frame.is_none() {
                return Err(Error::format(
                    KIND,
                    idx + 1,
                    "point line before the first `frame` header",
                ));
            }
            let mut coords = [0.0f64; 3];
            let mut fields = line.split_whitespace();
            for slot in &mut coords {
                let token = fields
                    .next()
                    .ok_or_else(|| Error::format(KIND, idx + 1, "expected three coordinates"))?;
                *slot = token.parse().map_err(|_| {
                    Error::format(KIND, idx + 1, format!("cannot parse `{token}` as a number"))
                })?;
                if !slot.is_finite() {
                    return Err(Error::format(
                        KIND,
                        idx + 1,
                        format!("non-finite coordinate `{token}`"),
                    ));
                }
            }
            if fields.next().is_some() {
                return Err(Error::format(KIND, idx + 1, "expected exactly three coordinates"));
            }
            current.push(Vector3::new(coords[0], coords[1], coords[2]));
        }
        if let Some(open) = open_frame {
            close_frame(&mut current, &mut frames, open, last_line + 1)?;
        }
        if frames.is_empty() {
            return Err(Error::format(KIND, last_line + 1, "no frames found"));
        }
        Ok(GeneratedTrajectory { frames })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (t, frame) in self.frames.iter().enumerate() {
            out.push_str(&format!("frame {t}\n"));
            out.push_str(&frame.to_xyz_string());
        }
        out
    }
}

/// Absolute rigid poses per timestep; index 0 is the reset pose.
#[derive(Debug, Clone)]
pub struct PoseTrajectory {
    poses: Vec<RigidTransform>,
}

impl PoseTrajectory {
    pub fn from_absolute(poses: Vec<RigidTransform>) -> Result<Self> {
        if poses.is_empty() {
            return Err(Error::argument("pose trajectory needs at least one pose"));
        }
        Ok(PoseTrajectory { poses })
    }

    /// Chains world-frame deltas onto a reset pose: `A_t = δ_t ∘ A_{t−1}`.
    pub fn from_deltas(reset: RigidTransform, deltas: &[RigidTransform]) -> Self {
        let mut poses = Vec::with_capacity(deltas.len() + 1);
        poses.push(reset);
        for delta in deltas {
            let prev = *poses.last().expect("non-empty by construction");
            poses.push(delta.compose(&prev));
        }
        PoseTrajectory { poses }
    }

    pub fn horizon(&self) -> usize {
        self.poses.len() - 1
    }

    pub fn poses(&self) -> &[RigidTransform] {
        &self.poses
    }

    pub fn reset(&self) -> &RigidTransform {
        &self.poses[0]
    }

    /// Recovers the world-frame delta `A_t ∘ A_{t−1}⁻¹` for `t ≥ 1`.
    pub fn delta(&self, t: usize) -> RigidTransform {
        self.poses[t].compose(&self.poses[t - 1].inverse())
    }

    /// Quantizes every pose to nine significant digits, returning the exact
    /// transforms a reader of the written CSV will reconstruct.
    pub fn quantized(&self) -> Self {
        let poses = self
            .poses
            .iter()
            .map(|p| {
                let q = p.quaternion_vector().map(quantize);
                let t = p.translation().map(quantize);
                RigidTransform::from_normalized_components(q, t)
                    .expect("quantized unit quaternion stays near unit norm")
            })
            .collect();
        PoseTrajectory { poses }
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse_csv(&text)
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        const KIND: &str = "pose trajectory";
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::format(KIND, 1, "empty file"))?;
        if header.trim() != "t,tx,ty,tz,qw,qx,qy,qz" {
            return Err(Error::format(
                KIND,
                1,
                format!("bad header `{}`, expected `t,tx,ty,tz,qw,qx,qy,qz`", header.trim()),
            ));
        }
        let mut poses = Vec::new();
        for (idx, raw) in lines {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 8 {
                return Err(Error::format(
                    KIND,
                    idx + 1,
                    format!("expected 8 comma-separated fields, found {}", fields.len()),
                ));
            }
            let t: usize = fields[0].parse().map_err(|_| {
                Error::format(KIND, idx + 1, format!("bad timestep `{}`", fields[0]))
            })?;
            if t != poses.len() {
                return Err(Error::format(
                    KIND,
                    idx + 1,
                    format!("expected timestep {}, found {t}", poses.len()),
                ));
            }
            let mut values = [0.0f64; 7];
            for (slot, token) in values.iter_mut().zip(&fields[1..]) {
                *slot = token.parse().map_err(|_| {
                    Error::format(KIND, idx + 1, format!("cannot parse `{token}` as a number"))
                })?;
                if !slot.is_finite() {
                    return Err(Error::format(
                        KIND,
                        idx + 1,
                        format!("non-finite value `{token}`"),
                    ));
                }
            }
            let translation = Vector3::new(values[0], values[1], values[2]);
            let q = Vector4::new(values[3], values[4], values[5], values[6]);
            let pose = RigidTransform::from_normalized_components(q, translation)
                .map_err(|e| Error::format(KIND, idx + 1, e.to_string()))?;
            poses.push(pose);
        }
        Self::from_absolute(poses)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("t,tx,ty,tz,qw,qx,qy,qz\n");
        for (t, pose) in self.poses.iter().enumerate() {
            let tr = pose.translation();
            let q = pose.quaternion_vector();
            out.push_str(&format!(
                "{t},{},{},{},{},{},{},{}\n",
                sig9(tr.x),
                sig9(tr.y),
                sig9(tr.z),
                sig9(q.x),
                sig9(q.y),
                sig9(q.z),
                sig9(q.w),
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::random_rotation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_gen() -> GeneratedTrajectory {
        let text = "\
# two-frame trajectory
frame 0
0 0 0
1 0 0
frame 1
0 0 0.5
1 0 0.5
";
        GeneratedTrajectory::parse(text).unwrap()
    }

    #[test]
    fn parses_frames_and_horizon() {
        let gen = sample_gen();
        assert_eq!(gen.horizon(), 1);
        assert_eq!(gen.frame(0).len(), 2);
        assert_eq!(gen.frame(1).points()[0], Vector3::new(0.0, 0.0, 0.5));
    }

    #[test]
    fn generated_round_trips_through_text() {
        let gen = sample_gen();
        let text = gen.to_text();
        let again = GeneratedTrajectory::parse(&text).unwrap().to_text();
        assert_eq!(text, again);
    }

    #[test]
    fn rejects_malformed_generated_trajectories() {
        for (text, needle) in [
            ("frame 0\n0 0 0\nframe 2\n0 0 1\n", "expected frame 1"),
            ("frame 1\n0 0 0\n", "expected frame 0"),
            ("0 0 0\nframe 0\n0 0 0\n", "before the first"),
            ("frame 0\nframe 1\n0 0 0\n", "declares no points"),
            ("frame 0\n0 0 0\nframe 1\n", "declares no points"),
            ("frame x\n0 0 0\n", "bad frame index"),
            ("# nothing\n", "no frames"),
            ("frame 0\n0 0\n", "three coordinates"),
        ] {
            let err = GeneratedTrajectory::parse(text).unwrap_err();
            assert!(
                err.to_string().contains(needle),
                "expected `{needle}` in `{err}` for {text:?}"
            );
        }
    }

    #[test]
    fn pose_csv_round_trip_is_byte_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let poses: Vec<RigidTransform> = (0..6)
            .map(|_| {
                RigidTransform::from_parts(
                    random_rotation(&mut rng),
                    Vector3::new(
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                        rng.gen_range(-1.0..1.0),
                    ),
                )
            })
            .collect();
        let traj = PoseTrajectory::from_absolute(poses).unwrap().quantized();
        let text = traj.to_csv_string();
        let reread = PoseTrajectory::parse_csv(&text).unwrap();
        assert_eq!(text, reread.to_csv_string());
        // Parsed transforms are bit-identical to the quantized originals.
        for (a, b) in traj.poses().iter().zip(reread.poses()) {
            assert_eq!(a.translation(), b.translation());
            assert_eq!(a.quaternion_vector(), b.quaternion_vector());
        }
    }

    #[test]
    fn rejects_malformed_pose_csv() {
        for (text, needle) in [
            ("tx,ty\n", "bad header"),
            ("t,tx,ty,tz,qw,qx,qy,qz\n0,0,0,0,1,0,0\n", "8 comma-separated"),
            ("t,tx,ty,tz,qw,qx,qy,qz\n1,0,0,0,1,0,0,0\n", "expected timestep 0"),
            ("t,tx,ty,tz,qw,qx,qy,qz\n0,0,0,0,1,0,0,0\n2,0,0,0,1,0,0,0\n", "expected timestep 1"),
            ("t,tx,ty,tz,qw,qx,qy,qz\n0,0,0,0,0.5,0,0,0\n", "norm"),
            ("t,tx,ty,tz,qw,qx,qy,qz\n0,0,0,x,1,0,0,0\n", "cannot parse"),
            ("t,tx,ty,tz,qw,qx,qy,qz\n", "at least one pose"),
        ] {
            let err = PoseTrajectory::parse_csv(text).unwrap_err();
            assert!(
                err.to_string().contains(needle),
                "expected `{needle}` in `{err}` for {text:?}"
            );
        }
    }

    #[test]
    fn delta_inverts_from_deltas() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let reset = RigidTransform::from_parts(
            random_rotation(&mut rng),
            Vector3::new(0.3, -0.2, 0.5),
        );
        let deltas: Vec<RigidTransform> = (0..5)
            .map(|_| {
                RigidTransform::from_parts(
                    random_rotation(&mut rng),
                    Vector3::new(
                        rng.gen_range(-0.01..0.01),
                        rng.gen_range(-0.01..0.01),
                        rng.gen_range(-0.01..0.01),
                    ),
                )
            })
            .collect();
        let traj = PoseTrajectory::from_deltas(reset, &deltas);
        assert_eq!(traj.horizon(), 5);
        for (t, delta) in deltas.iter().enumerate() {
            let recovered = traj.delta(t + 1);
            assert!(recovered.rotation().angle_to(delta.rotation()) < 1e-9);
            assert!((recovered.translation() - delta.translation()).norm() < 1e-9);
        }
    }

    #[test]
    fn files_round_trip_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let gen_path = dir.path().join("gen_traj.txt");
        let pose_path = dir.path().join("poses.csv");
        let gen = sample_gen();
        gen.write(&gen_path).unwrap();
        assert_eq!(GeneratedTrajectory::read(&gen_path).unwrap().to_text(), gen.to_text());
        let traj = PoseTrajectory::from_absolute(vec![RigidTransform::identity()]).unwrap();
        traj.write_csv(&pose_path).unwrap();
        let again = PoseTrajectory::read_csv(&pose_path).unwrap();
        assert_eq!(again.horizon(), 0);
        assert_eq!(again.to_csv_string(), traj.to_csv_string());
    }
}
