//! Keypoint voting in a dense 3D accumulator for 6DoF pose estimation.
//!
//! A per-pixel regressor output (simulated here from ground truth plus
//! noise) is turned into votes in a voxel grid: a single voxel for
//! offsets, a ray for unit vectors and polar angles, and a sphere surface
//! for radial distances. Peaks give keypoints, keypoints give a pose.

pub mod accumulator;
pub mod error;
pub mod geometry;
pub mod experiment;
pub mod horn;
pub mod icp;
pub mod io;
pub mod keypoints;
pub mod metrics;
pub mod noise;
pub mod oracle;
pub mod pipeline;
pub mod scheme;
pub mod selftest;
pub mod spatial;
pub mod synthetic;
pub mod vote_map;

pub use error::{Error, Result};
pub use geometry::{CameraIntrinsics, Pixel, Point3, PointCloud, RigidTransform, Vector3};
pub use scheme::SchemeKind;
