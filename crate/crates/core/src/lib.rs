//! Relative pose of two calibrated views whose vertical direction is known,
//! from three point correspondences.
//!
//! Each view is first rotated so that its vertical maps to the `Y` axis.
//! The remaining motion is a yaw about `Y` plus a unit baseline, which the
//! coplanarity constraints of three correspondences pin down up to a small
//! finite set of candidates. [`solver`] finds them with a Macaulay-matrix
//! elimination and a multiplication matrix; [`pipeline`] turns them into
//! poses, [`ransac`] wraps them for outlier-contaminated data and [`sim`]
//! benchmarks them on synthetic scenes.

pub mod coplanarity;
pub mod error;
pub mod geometry;
pub mod io;
pub mod pipeline;
pub mod poly;
pub mod ransac;
pub mod sim;
pub mod solver;
pub mod vertical;

pub use coplanarity::{
    build_system, solve_det_oracle, CoplanaritySystem, Correspondence, Solution,
};
pub use error::{Error, Result};
pub use geometry::{
    essential_from_pose, normalize_point, rodrigues, rotation_angle_error, translation_angle_error,
    BearingVector, CameraIntrinsics, PixelPoint, PoseHypothesis, Rotation3, Stage, Translation3,
};
pub use pipeline::{
    align, cheirality_select, compose_final, epipolar_residual, r_phi, solve_minimal,
};
pub use poly::{drl_compare, DrlOrder, Monomial, Poly4};
pub use ransac::{ransac_3pt, RansacConfig, RansacResult};
pub use sim::{
    generate_scene, run_noise_sweep, run_trial, run_vertical_sweep, trial_rng, ExperimentRecord,
    Motion, SceneConfig, SweepKind, SyntheticInstance,
};
pub use solver::{solve_system, solve_system_with, SolverOptions};
pub use vertical::{
    apply_vertical, r_ver_from_imu, r_ver_from_vanishing, ImuAttitude, VerticalDirection,
};
