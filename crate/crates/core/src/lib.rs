//! Alignment of rigid tool point clouds to generated point-cloud trajectories.
//!
//! A generated trajectory is a short sequence of point clouds depicting a tool
//! moving through a manipulation (rolling, cutting, scooping, ...). This crate
//! recovers an executable rigid-pose trajectory for a real tool cloud in two
//! stages: a multi-start projected gradient descent for the *reset* pose that
//! matches the first frame while avoiding the observed scene, followed by a
//! joint gradient descent over per-step *delta* poses that track the remaining
//! frames under a step-magnitude regularizer.
//!
//! Around that core the crate provides the point-set metrics the objectives
//! are built from (Chamfer distance, a debiased entropic transport divergence,
//! and a normalized improvement score), an SVD fit that extracts rigid motions
//! from dense point flows, deterministic synthetic scenarios with known-answer
//! pose trajectories, and a pipeline (tool selection, alignment, evaluation,
//! parameter sweeps) exposed through the `toolpath` CLI.

pub mod contact;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod metrics;
pub mod numfmt;
pub mod optimizer;
mod parallel;
pub mod pipeline;
pub mod scenario;
pub mod trajectory;

pub use error::{Error, Result};
