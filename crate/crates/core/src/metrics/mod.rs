//! Point-set metrics: Chamfer distance, debiased entropic transport, and the
//! normalized improvement score.
//!
//! Both Chamfer routes (brute force and kd-tree) share one squared-distance
//! kernel and accumulate per-query minima in cloud order, so they agree
//! bit-for-bit; the accelerated route only changes how candidates are found.

mod chamfer;
mod kdtree;
mod sinkhorn;

pub use chamfer::{chamfer, chamfer_brute, min_distance};
pub use sinkhorn::{entropic_transport_cost, sinkhorn_divergence, SinkhornConfig, SinkhornOutcome};

pub(crate) use chamfer::NnIndex;

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// The one squared-distance kernel used by every nearest-neighbor path.
#[inline]
pub(crate) fn dist2(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    let dz = a.z - b.z;
    dx * dx + dy * dy + dz * dz
}

/// Normalized improvement `(s_0 − s_H) / s_0` of a final score over the
/// initial one. Positive means improvement; negative means the execution made
/// things worse. Errors when `s_0` is not strictly positive.
pub fn normalized_score(s_0: f64, s_h: f64) -> Result<f64> {
    if !s_0.is_finite() || !s_h.is_finite() {
        return Err(Error::argument(format!(
            "scores must be finite, got s_0 = {s_0}, s_H = {s_h}"
        )));
    }
    if s_0 <= 0.0 {
        return Err(Error::argument(format!(
            "initial score must be strictly positive, got {s_0}"
        )));
    }
    Ok((s_0 - s_h) / s_0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalized_score_examples() {
        assert_eq!(normalized_score(2.0, 0.5).unwrap(), 0.75);
        assert_eq!(normalized_score(1.3, 1.3).unwrap(), 0.0);
        assert_eq!(normalized_score(1.0, 1.2).unwrap(), -0.19999999999999996);
        assert!((normalized_score(1.0, 1.2).unwrap() + 0.2).abs() < 1e-15);
    }

    #[test]
    fn normalized_score_rejects_nonpositive_initial() {
        assert!(matches!(normalized_score(0.0, 1.0), Err(Error::Argument(_))));
        assert!(matches!(normalized_score(-2.0, 1.0), Err(Error::Argument(_))));
        assert!(matches!(normalized_score(f64::NAN, 1.0), Err(Error::Argument(_))));
    }
}
