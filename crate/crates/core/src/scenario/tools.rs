//! Parametric tool surfaces and deterministic point sampling.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitBall};

use crate::error::{Error, Result};
use crate::geometry::PointCloud;

/// Irrational lattice increments (from the plastic constant) for 2-D
/// low-discrepancy sampling of surfaces.
const R2_A: f64 = 0.754_877_666_246_692_8;
const R2_B: f64 = 0.569_840_290_998_053_2;

fn lattice2(i: usize) -> (f64, f64) {
    let i = i as f64 + 0.5;
    ((i * R2_A).fract(), (i * R2_B).fract())
}

/// Analytic tool surface with dimensions in meters. The canonical frame puts
/// the origin on the tool's working axis: the roller's cylinder axis runs
/// along y, the blade hangs with its cutting edge at the bottom (-z), and the
/// scoop's bowl opens upward with the extrusion along x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ToolShape {
    Roller { radius: f64, length: f64 },
    Blade { length: f64, height: f64, thickness: f64 },
    Scoop { width: f64, radius: f64, lip: f64 },
}

impl ToolShape {
    pub fn validate(&self) -> Result<()> {
        let dims: Vec<f64> = match *self {
            ToolShape::Roller { radius, length } => vec![radius, length],
            ToolShape::Blade { length, height, thickness } => vec![length, height, thickness],
            ToolShape::Scoop { width, radius, lip } => vec![width, radius, lip],
        };
        if dims.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::argument(format!(
                "tool dimensions must be finite and positive: {self:?}"
            )));
        }
        Ok(())
    }

    fn point(&self, i: usize) -> Vector3<f64> {
        let (u, v) = lattice2(i);
        match *self {
            ToolShape::Roller { radius, length } => {
                let theta = u * std::f64::consts::TAU;
                let y = (v - 0.5) * length;
                Vector3::new(radius * theta.cos(), y, radius * theta.sin())
            }
            ToolShape::Blade { length, height, thickness } => {
                // Area-weighted choice among the three face pairs of the box.
                let (hx, hy, hz) = (length / 2.0, thickness / 2.0, height / 2.0);
                let a_xy = length * thickness;
                let a_xz = length * height;
                let a_yz = thickness * height;
                let total = 2.0 * (a_xy + a_xz + a_yz);
                let pick = u * total;
                let (su, sv) = lattice2(i.wrapping_mul(7919).wrapping_add(13));
                let (x, y, z);
                if pick < 2.0 * a_xz {
                    // Front/back large faces (normal along y).
                    x = (su - 0.5) * length;
                    z = (sv - 0.5) * height;
                    y = if pick < a_xz { -hy } else { hy };
                } else if pick < 2.0 * (a_xz + a_yz) {
                    // Left/right edge faces (normal along x).
                    y = (su - 0.5) * thickness;
                    z = (sv - 0.5) * height;
                    x = if pick < 2.0 * a_xz + a_yz { -hx } else { hx };
                } else {
                    // Spine and cutting edge (normal along z).
                    x = (su - 0.5) * length;
                    y = (sv - 0.5) * thickness;
                    z = if pick < 2.0 * (a_xz + a_yz) + a_xy { -hz } else { hz };
                }
                Vector3::new(x, y, z)
            }
            ToolShape::Scoop { width, radius, lip } => {
                // Cross-section traced by arc length: down the left lip, around
                // the semicircular bowl, up the right lip.
                let arc = std::f64::consts::PI * radius;
                let total = arc + 2.0 * lip;
                let s = u * total;
                let x = (v - 0.5) * width;
                let (y, z) = if s < lip {
                    (-radius, lip - s)
                } else if s < lip + arc {
                    let alpha = (s - lip) / radius;
                    (-radius * alpha.cos(), -radius * alpha.sin())
                } else {
                    (radius, s - lip - arc)
                };
                Vector3::new(x, y, z)
            }
        }
    }
}

/// Samples `count` points from the tool surface. Deterministic: the same
/// shape and count always produce the same cloud.
pub fn make_tool(shape: &ToolShape, count: usize) -> Result<PointCloud> {
    shape.validate()?;
    if count < 8 {
        return Err(Error::argument(format!(
            "tool sampling needs at least 8 points, got {count}"
        )));
    }
    PointCloud::new((0..count).map(|i| shape.point(i)).collect())
}

/// Jitters every point of `tool` by a random offset of norm at most
/// `0.1 * magnitude * diameter`, deterministically from `seed`.
/// `magnitude` must lie in `[0, 1]`; zero returns the cloud unchanged.
pub fn perturb_tool(tool: &PointCloud, magnitude: f64, seed: u64) -> Result<PointCloud> {
    if !(magnitude.is_finite() && (0.0..=1.0).contains(&magnitude)) {
        return Err(Error::argument(format!(
            "perturbation magnitude must lie in [0, 1], got {magnitude}"
        )));
    }
    if magnitude == 0.0 {
        return Ok(tool.clone());
    }
    let bound = 0.1 * magnitude * tool.diameter();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    PointCloud::new(
        tool.points()
            .iter()
            .map(|p| {
                let offset: [f64; 3] = UnitBall.sample(&mut rng);
                p + bound * Vector3::new(offset[0], offset[1], offset[2])
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roller_points_lie_on_the_cylinder() {
        let shape = ToolShape::Roller { radius: 0.03, length: 0.2 };
        let cloud = make_tool(&shape, 256).unwrap();
        for p in cloud.points() {
            let rho = (p.x * p.x + p.z * p.z).sqrt();
            assert!((rho - 0.03).abs() < 1e-12);
            assert!(p.y.abs() <= 0.1);
        }
    }

    #[test]
    fn blade_points_lie_on_the_box_surface() {
        let shape = ToolShape::Blade { length: 0.12, height: 0.1, thickness: 0.008 };
        let cloud = make_tool(&shape, 256).unwrap();
        for p in cloud.points() {
            let on_face = (p.x.abs() - 0.06).abs() < 1e-12
                || (p.y.abs() - 0.004).abs() < 1e-12
                || (p.z.abs() - 0.05).abs() < 1e-12;
            assert!(on_face, "{p:?}");
            assert!(p.x.abs() <= 0.06 + 1e-12);
            assert!(p.y.abs() <= 0.004 + 1e-12);
            assert!(p.z.abs() <= 0.05 + 1e-12);
        }
    }

    #[test]
    fn scoop_points_lie_on_bowl_or_lips() {
        let shape = ToolShape::Scoop { width: 0.08, radius: 0.03, lip: 0.015 };
        let cloud = make_tool(&shape, 256).unwrap();
        for p in cloud.points() {
            let on_bowl = ((p.y * p.y + p.z * p.z).sqrt() - 0.03).abs() < 1e-12 && p.z <= 1e-12;
            let on_lip =
                (p.y.abs() - 0.03).abs() < 1e-12 && (-1e-12..=0.015 + 1e-12).contains(&p.z);
            assert!(on_bowl || on_lip, "{p:?}");
            assert!(p.x.abs() <= 0.04 + 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let shape = ToolShape::Scoop { width: 0.14, radius: 0.05, lip: 0.025 };
        let a = make_tool(&shape, 128).unwrap();
        let b = make_tool(&shape, 128).unwrap();
        assert_eq!(a.points(), b.points());
    }

    #[test]
    fn rejects_degenerate_shapes_and_tiny_counts() {
        assert!(make_tool(&ToolShape::Roller { radius: 0.0, length: 0.2 }, 64).is_err());
        assert!(make_tool(&ToolShape::Blade { length: 0.1, height: f64::NAN, thickness: 0.01 }, 64)
            .is_err());
        assert!(make_tool(&ToolShape::Roller { radius: 0.03, length: 0.2 }, 4).is_err());
    }

    #[test]
    fn zero_perturbation_is_identity() {
        let tool = make_tool(&ToolShape::Roller { radius: 0.03, length: 0.2 }, 64).unwrap();
        let out = perturb_tool(&tool, 0.0, 9).unwrap();
        assert_eq!(out.points(), tool.points());
    }

    #[test]
    fn perturbation_is_bounded_and_deterministic() {
        let tool = make_tool(&ToolShape::Blade { length: 0.12, height: 0.1, thickness: 0.008 }, 96)
            .unwrap();
        let bound = 0.1 * 0.5 * tool.diameter();
        let a = perturb_tool(&tool, 0.5, 7).unwrap();
        let b = perturb_tool(&tool, 0.5, 7).unwrap();
        let c = perturb_tool(&tool, 0.5, 8).unwrap();
        assert_eq!(a.points(), b.points());
        assert_ne!(a.points(), c.points());
        let max_shift = a
            .points()
            .iter()
            .zip(tool.points())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(max_shift > 0.0 && max_shift <= bound + 1e-15);
    }

    #[test]
    fn rejects_out_of_range_magnitudes() {
        let tool = make_tool(&ToolShape::Roller { radius: 0.03, length: 0.2 }, 32).unwrap();
        assert!(perturb_tool(&tool, -0.1, 0).is_err());
        assert!(perturb_tool(&tool, 1.5, 0).is_err());
        assert!(perturb_tool(&tool, f64::NAN, 0).is_err());
    }
}
