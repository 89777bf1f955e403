//! Point-to-point ICP refinement of an object pose against a scene cloud.

use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud, RigidTransform};
use crate::horn::horn_solve;
use crate::spatial::KdTree;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IcpParams {
    pub max_iters: usize,
    /// Stop once the mean residual improves by less than this (mm).
    pub tol: f64,
    /// Scene/model pairs farther apart than this are left out of the
    /// Horn step (mm).
    pub max_correspondence: f64,
}

impl IcpParams {
    /// Defaults tied to an accumulator resolution: the correspondence gate
    /// is two voxels.
    pub fn for_resolution(resolution: f64) -> Self {
        Self {
            max_iters: 50,
            tol: 1e-6,
            max_correspondence: 2.0 * resolution,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IcpResult {
    pub pose: RigidTransform,
    pub iterations: usize,
    /// Mean residual after each accepted iteration, starting with the
    /// initial pose.
    pub residuals: Vec<f64>,
}

/// Mean distance from every scene point to the nearest model point placed
/// by `pose`.
pub fn mean_residual(model: &KdTree, scene: &[Point3], pose: &RigidTransform) -> f64 {
    let inv = pose.inverse();
    let sum: f64 = scene
        .iter()
        .map(|s| model.nearest(&inv.apply(s)).map_or(0.0, |(_, d2)| d2.sqrt()))
        .sum();
    sum / scene.len() as f64
}

/// Refines `init` so that the transformed model fits the scene.
///
/// Each scene point is paired with its nearest model point; pairs within
/// the correspondence gate feed a Horn solve. A step is accepted only if it
/// lowers the mean scene-to-model residual, so residuals never increase.
pub fn icp_refine(
    model: &PointCloud,
    scene: &PointCloud,
    init: &RigidTransform,
    params: &IcpParams,
) -> Result<IcpResult> {
    if model.is_empty() || scene.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    if !(params.max_correspondence > 0.0) {
        return Err(Error::param("max_correspondence", "must be positive"));
    }
    let tree = KdTree::new(model.points());
    let scene_pts = scene.points();

    let mut pose = *init;
    let mut residual = mean_residual(&tree, scene_pts, &pose);
    let mut residuals = vec![residual];
    let gate2 = params.max_correspondence * params.max_correspondence;

    for _ in 0..params.max_iters {
        let inv = pose.inverse();
        let mut src = Vec::new();
        let mut dst = Vec::new();
        for s in scene_pts {
            if let Some((i, d2)) = tree.nearest(&inv.apply(s)) {
                if d2 <= gate2 {
                    src.push(model.points()[i]);
                    dst.push(*s);
                }
            }
        }
        let Ok(candidate) = horn_solve(&src, &dst) else {
            break;
        };
        let next = mean_residual(&tree, scene_pts, &candidate);
        if !(next < residual) {
            break;
        }
        let improvement = residual - next;
        pose = candidate;
        residual = next;
        residuals.push(residual);
        if improvement < params.tol {
            break;
        }
    }

    Ok(IcpResult {
        pose,
        iterations: residuals.len() - 1,
        residuals,
    })
}
