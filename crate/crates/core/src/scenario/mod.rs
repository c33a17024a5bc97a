//! Synthetic manipulation scenarios with known ground truth.
//!
//! Each scenario stages a tabletop task — rolling, cutting, or scooping a
//! deformable mass — and produces exactly the inputs the alignment pipeline
//! consumes: a tool cloud observed somewhere in the workspace, distractor
//! tools, the observed mass, a generated target trajectory, and a goal cloud.
//! The generated frames are built by applying a known pose chain to the tool,
//! so the true optimum is available for every derived quantity.

mod tools;

pub use tools::{make_tool, perturb_tool, ToolShape};

use std::fmt;
use std::str::FromStr;

use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};

use crate::contact::{displaced_by_sweep, CONTACT_RADIUS};
use crate::error::{Error, Result};
use crate::geometry::{random_rotation, PointCloud, RigidTransform};
use crate::trajectory::{GeneratedTrajectory, PoseTrajectory};

/// Default number of points sampled on each tool surface.
pub const DEFAULT_TOOL_POINTS: usize = 256;
/// Number of points sampled on the observed mass.
const OBS_POINTS: usize = 192;
/// Vertical gap between the tool and the mass at the start of the motion.
const CLEARANCE: f64 = 0.01;

/// The manipulation being staged. Each task fixes a tool shape and a motion
/// program for the ground-truth trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskKind {
    Roll,
    Cut,
    ScoopSmall,
    ScoopLarge,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] = [
        TaskKind::Roll,
        TaskKind::Cut,
        TaskKind::ScoopSmall,
        TaskKind::ScoopLarge,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Roll => "roll",
            TaskKind::Cut => "cut",
            TaskKind::ScoopSmall => "scoop-small",
            TaskKind::ScoopLarge => "scoop-large",
        }
    }

    pub fn tool_shape(&self) -> ToolShape {
        match self {
            TaskKind::Roll => ToolShape::Roller { radius: 0.03, length: 0.2 },
            TaskKind::Cut => ToolShape::Blade { length: 0.12, height: 0.1, thickness: 0.008 },
            TaskKind::ScoopSmall => ToolShape::Scoop { width: 0.08, radius: 0.03, lip: 0.015 },
            TaskKind::ScoopLarge => ToolShape::Scoop { width: 0.14, radius: 0.05, lip: 0.025 },
        }
    }

    /// Highest point of the observed mass for this task, in meters.
    fn mass_top(&self) -> f64 {
        match self {
            TaskKind::Roll | TaskKind::Cut => BOX_HEIGHT,
            TaskKind::ScoopSmall | TaskKind::ScoopLarge => MOUND_HEIGHT,
        }
    }

    /// Horizontal position of the tool origin when the motion starts.
    fn start_xy(&self) -> (f64, f64) {
        match self {
            TaskKind::Roll => (-0.05, 0.0),
            TaskKind::Cut => (0.0, 0.0),
            TaskKind::ScoopSmall | TaskKind::ScoopLarge => (-0.02, 0.0),
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::argument(format!(
                    "unknown task {s:?}; expected roll, cut, scoop-small, or scoop-large"
                ))
            })
    }
}

const BOX_HEIGHT: f64 = 0.05;
const MOUND_RADIUS: f64 = 0.06;
const MOUND_HEIGHT: f64 = 0.042;

/// A staged task instance: everything the pipeline sees, plus the truth it
/// should recover.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub task: TaskKind,
    pub seed: u64,
    /// The correct tool, observed at an arbitrary pose in the workspace.
    pub tool: PointCloud,
    /// Wrong-tool candidates at other workspace poses.
    pub distractors: Vec<PointCloud>,
    /// The observed mass the task acts on.
    pub obs: PointCloud,
    /// Desired final state of the mass.
    pub goal: PointCloud,
    /// Target trajectory the aligner must follow.
    pub generated: GeneratedTrajectory,
    /// Pose chain that produced `generated` from `tool`.
    pub truth: PoseTrajectory,
}

impl Scenario {
    pub fn horizon(&self) -> usize {
        self.generated.horizon()
    }

    /// Candidate tool list for selection: the true tool first, then the
    /// distractors.
    pub fn candidates(&self) -> Vec<PointCloud> {
        std::iter::once(self.tool.clone()).chain(self.distractors.iter().cloned()).collect()
    }
}

/// Builds a scenario deterministically from `(task, seed)`.
pub fn make_scenario(
    task: TaskKind,
    seed: u64,
    horizon: usize,
    tool_points: usize,
) -> Result<Scenario> {
    if horizon == 0 {
        return Err(Error::argument("scenario horizon must be at least 1"));
    }
    let canonical = make_tool(&task.tool_shape(), tool_points)?;

    // Independent RNG streams decouple the sampled pieces: changing how one
    // is drawn leaves the others untouched.
    let mut dough_rng = stream_rng(seed, 0);
    let obs = sample_mass(task, &mut dough_rng)?;

    let mut place_rng = stream_rng(seed, 1);
    let placement = random_workspace_pose(&mut place_rng);
    let tool = placement.apply(&canonical);

    let mut distractor_rng = stream_rng(seed, 2);
    let mut distractors = Vec::new();
    for other in TaskKind::ALL.into_iter().filter(|k| k != &task) {
        let shape = make_tool(&other.tool_shape(), tool_points)?;
        let pose = random_workspace_pose(&mut distractor_rng);
        distractors.push(pose.apply(&shape));
    }

    // Start pose: canonical orientation, hovering over the mass with a fixed
    // vertical clearance measured from the sampled cloud itself.
    let min_z = canonical.points().iter().map(|p| p.z).fold(f64::INFINITY, f64::min);
    let (x0, y0) = task.start_xy();
    let start = RigidTransform::from_translation(Vector3::new(
        x0,
        y0,
        task.mass_top() + CLEARANCE - min_z,
    ));

    let reset = start.compose(&placement.inverse());
    let deltas = motion_program(task, horizon, start.translation());
    let truth = PoseTrajectory::from_deltas(reset, &deltas);

    let frames: Vec<PointCloud> = truth.poses().iter().map(|pose| pose.apply(&tool)).collect();
    let generated = GeneratedTrajectory::new(frames)?;
    let goal = displaced_by_sweep(&obs, generated.frames(), CONTACT_RADIUS)?;

    Ok(Scenario { task, seed, tool, distractors, obs, goal, generated, truth })
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform pose with the tool 0.8–1.0 m from the scene origin.
fn random_workspace_pose(rng: &mut ChaCha8Rng) -> RigidTransform {
    let rotation = random_rotation(rng);
    let dir: [f64; 3] = UnitSphere.sample(rng);
    let dist = rng.gen_range(0.8..1.0);
    RigidTransform::from_parts(rotation, dist * Vector3::new(dir[0], dir[1], dir[2]))
}

/// Samples the observed mass: a slab for rolling and cutting, a mound for
/// scooping.
fn sample_mass(task: TaskKind, rng: &mut ChaCha8Rng) -> Result<PointCloud> {
    let points = (0..OBS_POINTS)
        .map(|_| match task {
            TaskKind::Roll | TaskKind::Cut => Vector3::new(
                rng.gen_range(-0.08..0.08),
                rng.gen_range(-0.06..0.06),
                rng.gen_range(0.0..BOX_HEIGHT),
            ),
            TaskKind::ScoopSmall | TaskKind::ScoopLarge => {
                // Paraboloid mound: uniform over the footprint disk, then a
                // height drawn under the local profile.
                let rho = MOUND_RADIUS * rng.gen_range(0.0..1.0f64).sqrt();
                let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                let h = MOUND_HEIGHT * (1.0 - (rho / MOUND_RADIUS).powi(2));
                Vector3::new(rho * phi.cos(), rho * phi.sin(), rng.gen_range(0.0..=1.0) * h)
            }
        })
        .collect();
    PointCloud::new(points)
}

/// World-frame deltas for the task's motion program. Rotating steps pivot
/// about the tool origin's current position so the tool turns in place while
/// its origin translates by the step's displacement.
fn motion_program(task: TaskKind, horizon: usize, start: Vector3<f64>) -> Vec<RigidTransform> {
    let mut center = start;
    let mut deltas = Vec::with_capacity(horizon);
    let mut push = |rotation: UnitQuaternion<f64>, d: Vector3<f64>, center: &mut Vector3<f64>| {
        let translation = *center - rotation * *center + d;
        deltas.push(RigidTransform::from_parts(rotation, translation));
        *center += d;
    };

    match task {
        TaskKind::Cut => {
            // Straight descent through the slab.
            let step = Vector3::new(0.0, 0.0, -0.06 / horizon as f64);
            for _ in 0..horizon {
                push(UnitQuaternion::identity(), step, &mut center);
            }
        }
        TaskKind::Roll => {
            // Press into the slab, then advance while rotating at the no-slip
            // rate for the roller.
            let n_press = (horizon / 10).max(1);
            let n_roll = horizon - n_press;
            let down = Vector3::new(0.0, 0.0, -(CLEARANCE + 0.012) / n_press as f64);
            for _ in 0..n_press {
                push(UnitQuaternion::identity(), down, &mut center);
            }
            if n_roll > 0 {
                let dx = 0.1 / n_roll as f64;
                let ToolShape::Roller { radius, .. } = task.tool_shape() else { unreachable!() };
                let spin = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), dx / radius);
                let step = Vector3::new(dx, 0.0, 0.0);
                for _ in 0..n_roll {
                    push(spin, step, &mut center);
                }
            }
        }
        TaskKind::ScoopSmall | TaskKind::ScoopLarge => {
            // Dig in, tilt forward while creeping ahead, then lift out.
            let n_down = (horizon + 2) / 3;
            let n_arc = (horizon + 1) / 3;
            let n_up = horizon - n_down - n_arc;
            let down = Vector3::new(0.0, 0.0, -0.025 / n_down as f64);
            for _ in 0..n_down {
                push(UnitQuaternion::identity(), down, &mut center);
            }
            let tilt = UnitQuaternion::from_axis_angle(&Vector3::y_axis(), 0.025);
            for _ in 0..n_arc {
                push(tilt, Vector3::new(0.001, 0.0, 0.0), &mut center);
            }
            if n_up > 0 {
                let up = Vector3::new(0.0, 0.0, 0.03 / n_up as f64);
                for _ in 0..n_up {
                    push(UnitQuaternion::identity(), up, &mut center);
                }
            }
        }
    }
    deltas
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{chamfer, min_distance};

    #[test]
    fn task_names_round_trip() {
        for task in TaskKind::ALL {
            assert_eq!(task.name().parse::<TaskKind>().unwrap(), task);
            assert_eq!(task.to_string(), task.name());
        }
        assert!("knead".parse::<TaskKind>().is_err());
    }

    #[test]
    fn generated_frames_are_exactly_the_posed_tool() {
        let s = make_scenario(TaskKind::Roll, 11, 8, 128).unwrap();
        for (t, pose) in s.truth.poses().iter().enumerate() {
            let rebuilt = pose.apply(&s.tool);
            assert_eq!(chamfer(&rebuilt, s.generated.frame(t)), 0.0, "frame {t}");
        }
    }

    #[test]
    fn start_frame_respects_the_clearance() {
        for task in TaskKind::ALL {
            let s = make_scenario(task, 3, 6, 128).unwrap();
            let gap = min_distance(s.generated.frame(0), &s.obs);
            assert!(gap >= CLEARANCE - 1e-12, "{task}: gap {gap}");
        }
    }

    #[test]
    fn cut_net_motion_is_a_pure_descent() {
        let s = make_scenario(TaskKind::Cut, 5, 50, 128).unwrap();
        let net = s.truth.poses().last().unwrap().compose(&s.truth.reset().inverse());
        assert!(net.rotation_angle() < 1e-9);
        let t = net.translation();
        assert!(t.x.abs() < 1e-9 && t.y.abs() < 1e-9);
        assert!((t.z + 0.06).abs() < 1e-9);
    }

    #[test]
    fn roll_sweeps_forward_while_spinning() {
        let s = make_scenario(TaskKind::Roll, 6, 20, 128).unwrap();
        let net = s.truth.poses().last().unwrap().compose(&s.truth.reset().inverse());
        // 0.1 m of travel at radius 0.03 is well past a full turn.
        assert!(net.rotation_angle() > 0.5);
        // The centroid sits a hair off the pin axis, so it precesses as the
        // pin spins; compare travel with a tolerance covering that offset.
        let first = s.generated.frame(0).centroid();
        let last = s.generated.frames().last().unwrap().centroid();
        assert!((last.x - first.x - 0.1).abs() < 1e-2);
    }

    #[test]
    fn same_seed_reproduces_every_artifact() {
        let a = make_scenario(TaskKind::ScoopLarge, 21, 10, 128).unwrap();
        let b = make_scenario(TaskKind::ScoopLarge, 21, 10, 128).unwrap();
        assert_eq!(a.tool.points(), b.tool.points());
        assert_eq!(a.obs.points(), b.obs.points());
        assert_eq!(a.goal.points(), b.goal.points());
        assert_eq!(a.generated.to_text(), b.generated.to_text());
        assert_eq!(a.truth.to_csv_string(), b.truth.to_csv_string());
        let c = make_scenario(TaskKind::ScoopLarge, 22, 10, 128).unwrap();
        assert_ne!(a.tool.points(), c.tool.points());
    }

    #[test]
    fn horizon_one_gives_two_frames() {
        let s = make_scenario(TaskKind::Cut, 1, 1, 128).unwrap();
        assert_eq!(s.generated.frames().len(), 2);
        assert_eq!(s.truth.poses().len(), 2);
        assert_eq!(s.horizon(), 1);
    }

    #[test]
    fn rejects_zero_horizon() {
        assert!(make_scenario(TaskKind::Roll, 0, 0, 128).is_err());
    }

    #[test]
    fn goal_differs_from_observation_where_the_tool_acts() {
        // The motion must actually move material for every task.
        for task in TaskKind::ALL {
            let s = make_scenario(task, 9, 30, DEFAULT_TOOL_POINTS).unwrap();
            let moved = s
                .obs
                .points()
                .iter()
                .zip(s.goal.points())
                .filter(|(a, b)| a != b)
                .count();
            assert!(moved > 0, "{task}: no material moved");
        }
    }

    #[test]
    fn distractors_are_the_other_tools() {
        let s = make_scenario(TaskKind::Cut, 4, 5, 128).unwrap();
        assert_eq!(s.distractors.len(), 3);
        assert_eq!(s.candidates().len(), 4);
        for d in &s.distractors {
            assert_eq!(d.len(), 128);
            // Far from the scene origin, like the real tool.
            assert!(d.centroid().norm() > 0.5);
        }
    }
}
