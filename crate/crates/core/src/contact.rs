//! Swept-contact displacement model.
//!
//! A cheap stand-in for material response: as the tool moves through its
//! frame sequence, any observed point within the contact radius of a tool
//! point is carried along by that tool point's motion to the next frame.
//! Displacements compound across steps, so a point pushed in step 3 can be
//! pushed again in step 7. The model is deliberately simple — it exists to
//! turn a tool trajectory into a predicted final state of the observed
//! surface, for scoring, not to simulate mechanics.

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::metrics::NnIndex;

/// Default contact radius in meters.
pub const CONTACT_RADIUS: f64 = 0.01;

/// Displaces `obs` by the motion of nearby tool points across `frames`.
///
/// `frames` holds the tool cloud at each step of the trajectory (all the same
/// size, index-aligned: point `k` of one frame is point `k` of the next). For
/// each consecutive frame pair, every observed point whose nearest tool point
/// in the earlier frame lies within `radius` is translated by that tool
/// point's displacement into the later frame.
pub fn displaced_by_sweep(
    obs: &PointCloud,
    frames: &[PointCloud],
    radius: f64,
) -> Result<PointCloud> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::argument(format!(
            "contact radius must be finite and positive, got {radius}"
        )));
    }
    if frames.is_empty() {
        return Err(Error::argument("sweep needs at least one tool frame"));
    }
    let size = frames[0].len();
    if frames.iter().any(|f| f.len() != size) {
        return Err(Error::argument(
            "all tool frames in a sweep must have the same number of points",
        ));
    }

    let r2 = radius * radius;
    let mut points = obs.points().to_vec();
    for pair in frames.windows(2) {
        let index = NnIndex::build(pair[0].points());
        for p in &mut points {
            let (k, d2) = index.nearest(p);
            if d2 <= r2 {
                *p += pair[1].points()[k] - pair[0].points()[k];
            }
        }
    }
    PointCloud::new(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn cloud(pts: &[[f64; 3]]) -> PointCloud {
        PointCloud::new(pts.iter().map(|p| Vector3::new(p[0], p[1], p[2])).collect()).unwrap()
    }

    #[test]
    fn far_tool_leaves_observation_untouched() {
        let obs = cloud(&[[0.0, 0.0, 0.0], [0.1, 0.0, 0.0]]);
        let frames = vec![
            cloud(&[[5.0, 5.0, 5.0]]),
            cloud(&[[5.0, 5.0, 4.0]]),
            cloud(&[[5.0, 5.0, 3.0]]),
        ];
        let out = displaced_by_sweep(&obs, &frames, CONTACT_RADIUS).unwrap();
        assert_eq!(out.points(), obs.points());
    }

    #[test]
    fn single_frame_means_no_motion() {
        let obs = cloud(&[[0.0, 0.0, 0.0]]);
        let frames = vec![cloud(&[[0.001, 0.0, 0.0]])];
        let out = displaced_by_sweep(&obs, &frames, CONTACT_RADIUS).unwrap();
        assert_eq!(out.points(), obs.points());
    }

    #[test]
    fn contacted_points_follow_the_tool() {
        // Tool point passes within radius of the first observed point only.
        let obs = cloud(&[[0.0, 0.0, 0.005], [0.5, 0.0, 0.0]]);
        let frames = vec![
            cloud(&[[0.0, 0.0, 0.01]]),
            cloud(&[[0.0, 0.0, 0.0]]),
        ];
        let out = displaced_by_sweep(&obs, &frames, CONTACT_RADIUS).unwrap();
        // Carried down by the tool's -0.01 step.
        assert_eq!(out.points()[0], Vector3::new(0.0, 0.0, -0.005));
        assert_eq!(out.points()[1], obs.points()[1]);
    }

    #[test]
    fn displacements_compound_across_steps() {
        let obs = cloud(&[[0.0, 0.0, 0.0]]);
        // Tool stays within radius while translating +x twice.
        let frames = vec![
            cloud(&[[0.005, 0.0, 0.0]]),
            cloud(&[[0.009, 0.0, 0.0]]),
            cloud(&[[0.013, 0.0, 0.0]]),
        ];
        let out = displaced_by_sweep(&obs, &frames, CONTACT_RADIUS).unwrap();
        // Step 1 carries the point by 0.004 (to 0.004, still within radius of
        // 0.009), step 2 carries it by another 0.004.
        assert!((out.points()[0].x - 0.008).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_arguments() {
        let obs = cloud(&[[0.0, 0.0, 0.0]]);
        let a = cloud(&[[1.0, 0.0, 0.0]]);
        let two = cloud(&[[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]);
        assert!(displaced_by_sweep(&obs, &[a.clone()], 0.0).is_err());
        assert!(displaced_by_sweep(&obs, &[a.clone()], f64::NAN).is_err());
        assert!(displaced_by_sweep(&obs, &[], 0.01).is_err());
        assert!(displaced_by_sweep(&obs, &[a, two], 0.01).is_err());
    }
}
