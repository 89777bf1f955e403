//! Vote maps to keypoints to pose.

use crate::accumulator::{cast_votes, find_peak, merge_grids, AccumulatorGrid, GridGeometry, VoteStats};
use crate::error::{Error, Result};
use crate::geometry::{Point3, RigidTransform, Vector3};
use crate::horn::horn_solve;
use crate::keypoints::KeypointSet;
use crate::metrics::{accuracy_at_threshold, auc_metric, mean_std};
use crate::scheme::SchemeKind;
use crate::vote_map::{DepthFrame, VoteMap};

/// Region covered by a keypoint's accumulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridBounds {
    /// Bounding box of the masked scene points padded by `pad` mm.
    Scene { pad: f64 },
    /// Cube of side `2·(object_radius + keypoint_radius)` centred on the
    /// region that must contain the keypoint: every visible point lies
    /// within `object_radius` of the object centroid, and the keypoint
    /// within `keypoint_radius` of it. The side is fixed so that the grid
    /// size depends only on the object and the resolution.
    Envelope { object_radius: f64, keypoint_radius: f64 },
}

/// Two-pass voting: a coarse grid over the full bounds locates the peak,
/// then a fine cube of half-extent `window` mm around it is voted again.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoarseToFine {
    pub resolution: f64,
    pub window: f64,
    pub max_votes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VotingParams {
    pub resolution: f64,
    pub bounds: GridBounds,
    pub refine_peak: bool,
    /// Vote with at most this many masked pixels, drawn at random.
    pub max_votes: Option<usize>,
    /// Used only when its resolution is coarser than `resolution`.
    pub coarse: Option<CoarseToFine>,
    pub seed: u64,
}

impl VotingParams {
    pub fn new(resolution: f64, bounds: GridBounds) -> Self {
        Self {
            resolution,
            bounds,
            refine_peak: false,
            max_votes: None,
            coarse: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeypointEstimate {
    pub location: Point3,
    pub count: u32,
    pub stats: VoteStats,
    /// Size of the final accumulator's count array.
    pub mem_bytes: u64,
}

/// Accumulator covering `bounds` for the masked pixels of `map`.
pub fn grid_for(frame: &DepthFrame, map: &VoteMap, bounds: GridBounds, resolution: f64) -> Result<AccumulatorGrid> {
    let pts = frame.masked_points(&map.mask);
    if pts.is_empty() {
        return Err(Error::EmptyMask);
    }
    let (lo, hi) = crate::geometry::bounds(&pts);
    let geometry = match bounds {
        GridBounds::Scene { pad } => {
            if !(pad.is_finite() && pad >= 0.0) {
                return Err(Error::param("pad", "must be non-negative"));
            }
            let pad = Vector3::repeat(pad);
            GridGeometry::covering(lo - pad, hi + pad, resolution)?
        }
        GridBounds::Envelope {
            object_radius,
            keypoint_radius,
        } => {
            let reach = object_radius + keypoint_radius;
            if !(reach.is_finite() && object_radius >= 0.0 && keypoint_radius >= 0.0) {
                return Err(Error::param("bounds", "radii must be non-negative"));
            }
            let mut a = hi - Vector3::repeat(reach);
            let mut b = lo + Vector3::repeat(reach);
            for k in 0..3 {
                if a[k] > b[k] {
                    let m = 0.5 * (a[k] + b[k]);
                    (a[k], b[k]) = (m, m);
                }
            }
            cube_around(nalgebra::center(&a, &b), reach, resolution)?
        }
    };
    Ok(AccumulatorGrid::new(geometry))
}

/// Cube of side `2·half_extent` centred on `center`.
pub fn cube_around(center: Point3, half_extent: f64, resolution: f64) -> Result<GridGeometry> {
    let n = crate::accumulator::voxels_for_extent(2.0 * half_extent, resolution);
    let half = 0.5 * n as f64 * resolution;
    GridGeometry::new(center - Vector3::repeat(half), resolution, [n; 3])
}

/// Votes one keypoint's map and returns the accumulator peak.
pub fn estimate_keypoint(frame: &DepthFrame, map: &VoteMap, params: &VotingParams) -> Result<KeypointEstimate> {
    estimate_keypoint_merged(frame, std::slice::from_ref(map), params)
}

/// Votes several maps of the same keypoint into grids of one geometry,
/// sums the grids and returns the peak of the sum. Grid bounds follow the
/// first map's mask.
pub fn estimate_keypoint_merged(frame: &DepthFrame, maps: &[VoteMap], params: &VotingParams) -> Result<KeypointEstimate> {
    let (grid, stats) = vote_keypoint(frame, maps, params)?;
    let peak = find_peak(&grid, params.refine_peak)?;
    Ok(KeypointEstimate {
        location: peak.location,
        count: peak.count,
        stats,
        mem_bytes: grid.geometry().memory_bytes(),
    })
}

/// The final accumulator of [`estimate_keypoint_merged`], before peak
/// detection.
pub fn vote_keypoint(frame: &DepthFrame, maps: &[VoteMap], params: &VotingParams) -> Result<(AccumulatorGrid, VoteStats)> {
    let first = maps.first().ok_or(Error::EmptyMask)?;
    let subsample = |m: &VoteMap, max: Option<usize>, seed: u64| match max {
        Some(n) => m.subsampled(n, seed),
        None => m.clone(),
    };
    let mut stats = VoteStats::default();
    let mut vote_all = |geometry: GridGeometry, max: Option<usize>, seed: u64| -> Result<AccumulatorGrid> {
        let mut grids = Vec::with_capacity(maps.len());
        for m in maps {
            let mut g = AccumulatorGrid::new(geometry);
            stats.add(&cast_votes(&mut g, &subsample(m, max, seed), frame)?);
            grids.push(g);
        }
        if grids.len() == 1 {
            Ok(grids.pop().unwrap_or_else(|| AccumulatorGrid::new(geometry)))
        } else {
            merge_grids(&grids)
        }
    };
    let geometry = match params.coarse {
        Some(c) if c.resolution > params.resolution => {
            let seed = params.seed ^ 0x9e37_79b9_7f4a_7c15;
            let coarse_geometry = *grid_for(frame, &subsample(first, c.max_votes, seed), params.bounds, c.resolution)?.geometry();
            let coarse = vote_all(coarse_geometry, c.max_votes, seed)?;
            cube_around(max_voxels_center(&coarse, 0.5 * c.window)?, c.window, params.resolution)?
        }
        _ => *grid_for(frame, &subsample(first, params.max_votes, params.seed), params.bounds, params.resolution)?.geometry(),
    };
    let grid = vote_all(geometry, params.max_votes, params.seed)?;
    Ok((grid, stats))
}

/// Mean centre of the voxels holding the maximum count that lie within
/// `reach` of the first of them. Near-tangent spheres leave a plateau of
/// tied maxima at coarse resolution; its centre is a better window centre
/// than any single member. Distant ties (mirror images of the keypoint
/// across a planar patch) are left out, since their midpoint may see no
/// votes at all.
fn max_voxels_center(grid: &AccumulatorGrid, reach: f64) -> Result<Point3> {
    let peak = find_peak(grid, false)?;
    let g = grid.geometry();
    let (mut sum, mut n) = (Vector3::zeros(), 0.0);
    for (i, _) in grid.counts().iter().enumerate().filter(|(_, c)| **c == peak.count) {
        let c = g.voxel_center(g.voxel_from_linear(i));
        if (c - peak.location).norm() <= reach {
            sum += c.coords;
            n += 1.0;
        }
    }
    Ok(Point3::from(sum / n))
}

/// One estimate per map; each keypoint is voted in its own accumulator.
pub fn estimate_keypoints(frame: &DepthFrame, maps: &[VoteMap], params: &VotingParams) -> Result<Vec<KeypointEstimate>> {
    if maps.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: maps.len(),
        });
    }
    maps.iter()
        .enumerate()
        .map(|(j, m)| {
            let p = VotingParams {
                seed: params.seed.wrapping_add(j as u64),
                ..*params
            };
            estimate_keypoint(frame, m, &p)
        })
        .collect()
}

/// Rigid transform taking the object-frame keypoints onto their estimates.
pub fn recover_pose(object_keypoints: &KeypointSet, estimated: &[Point3]) -> Result<RigidTransform> {
    horn_solve(object_keypoints.points(), estimated)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoseEstimate {
    pub pose: RigidTransform,
    /// Distance of each estimated keypoint from its true position (mm).
    pub per_keypoint_error: Vec<f64>,
    pub scheme: SchemeKind,
    pub refined_with_icp: bool,
}

impl PoseEstimate {
    pub fn new(
        object_keypoints: &KeypointSet,
        estimated: &[Point3],
        truth: &[Point3],
        scheme: SchemeKind,
    ) -> Result<Self> {
        if estimated.len() != truth.len() {
            return Err(Error::SizeMismatch {
                what: "estimated vs true keypoints",
                left: estimated.len(),
                right: truth.len(),
            });
        }
        Ok(Self {
            pose: recover_pose(object_keypoints, estimated)?,
            per_keypoint_error: estimated.iter().zip(truth).map(|(e, t)| (e - t).norm()).collect(),
            scheme,
            refined_with_icp: false,
        })
    }
}

/// Summary over a set of trials.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub add_values: Vec<f64>,
    pub accuracy_at_threshold: f64,
    pub auc: f64,
    pub mean_kp_error: f64,
    pub kp_error_std: f64,
}

impl EvalReport {
    /// `add_values` holds one pose error per trial, `kp_errors` every
    /// keypoint error of every trial.
    pub fn new(
        add_values: Vec<f64>,
        kp_errors: &[f64],
        object_radius: f64,
        threshold_fraction: f64,
        auc_max: f64,
    ) -> Result<Self> {
        let (mean_kp_error, kp_error_std) = mean_std(kp_errors);
        Ok(Self {
            accuracy_at_threshold: accuracy_at_threshold(&add_values, object_radius, threshold_fraction)?,
            auc: auc_metric(&add_values, auc_max)?,
            add_values,
            mean_kp_error,
            kp_error_std,
        })
    }
}
