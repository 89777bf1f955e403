//! Dense voxel accumulator: grid construction, vote casting for every
//! scheme, peak detection and merging.

mod grid;
mod raster;

use std::time::Instant;

pub use grid::{build_grid, voxels_for_extent, AccumulatorGrid, GridGeometry};
#[doc(hidden)]
pub use raster::cast_sphere_vote_with;
pub use raster::{cast_offset_vote, cast_ray_vote, cast_sphere_vote, for_each_ray_voxel, RAY_TIE, VOXEL_HALF_EXTENT};

use crate::error::{Error, Result};
use crate::geometry::{Point3, Vector3};
use crate::scheme::{polar_to_unit, SchemeKind};
use crate::vote_map::{DepthFrame, VoteMap};

/// Counters from one [`cast_votes`] call.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct VoteStats {
    /// Masked pixels with valid depth that cast a vote.
    pub pixels_voted: u64,
    /// Total voxel increments.
    pub increments: u64,
    /// Votes that touched no voxel of the grid.
    pub dropped: u64,
    pub wall_ms: f64,
}

impl VoteStats {
    pub fn add(&mut self, other: &VoteStats) {
        self.pixels_voted += other.pixels_voted;
        self.increments += other.increments;
        self.dropped += other.dropped;
        self.wall_ms += other.wall_ms;
    }
}

/// Casts one vote per masked pixel with valid depth, dispatching on the
/// map's scheme. Directions are flipped to point from the pixel towards
/// the keypoint; a radial value of exactly zero votes the pixel's own voxel.
pub fn cast_votes(grid: &mut AccumulatorGrid, map: &VoteMap, frame: &DepthFrame) -> Result<VoteStats> {
    if map.width != frame.width() || map.height != frame.height() {
        return Err(Error::SizeMismatch {
            what: "vote map vs depth frame pixels",
            left: map.len(),
            right: frame.depth().len(),
        });
    }
    let start = Instant::now();
    let mut stats = VoteStats::default();
    for i in map.masked_indices() {
        let Some(p) = frame.point(i) else { continue };
        let v = map.value(i);
        let n = match map.scheme {
            SchemeKind::Offset => cast_offset_vote(grid, &p, &Vector3::new(v[0], v[1], v[2])) as u64,
            SchemeKind::Vector => cast_ray_vote(grid, &p, &-Vector3::new(v[0], v[1], v[2]))?,
            SchemeKind::Polar => cast_ray_vote(grid, &p, &-polar_to_unit(v[0], v[1]))?,
            SchemeKind::Radial if v[0] == 0.0 => cast_offset_vote(grid, &p, &Vector3::zeros()) as u64,
            SchemeKind::Radial => cast_sphere_vote(grid, &p, v[0])?,
        };
        stats.pixels_voted += 1;
        stats.increments += n;
        if n == 0 {
            stats.dropped += 1;
        }
    }
    stats.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(stats)
}

/// Global maximum of an accumulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakResult {
    pub location: Point3,
    pub voxel: [usize; 3],
    pub count: u32,
    pub refined: bool,
}

/// Finds the voxel with the highest count, preferring the smallest linear
/// index on ties. With `refine`, the location becomes the count-weighted
/// centroid of voxel centers in the 3×3×3 neighbourhood of the maximum.
pub fn find_peak(grid: &AccumulatorGrid, refine: bool) -> Result<PeakResult> {
    let (mut best, mut count) = (0usize, 0u32);
    for (i, &c) in grid.counts().iter().enumerate() {
        if c > count {
            best = i;
            count = c;
        }
    }
    if count == 0 {
        return Err(Error::NoPeak);
    }
    let geometry = grid.geometry();
    let voxel = geometry.voxel_from_linear(best);
    let mut location = geometry.voxel_center(voxel);
    if refine {
        let mut sum = Vector3::zeros();
        let mut weight = 0.0;
        for dz in -1i64..=1 {
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let n = [voxel[0] as i64 + dx, voxel[1] as i64 + dy, voxel[2] as i64 + dz];
                    if (0..3).any(|a| n[a] < 0 || n[a] >= geometry.dims[a] as i64) {
                        continue;
                    }
                    let n = [n[0] as usize, n[1] as usize, n[2] as usize];
                    let w = grid.count(n) as f64;
                    sum += geometry.voxel_center(n).coords * w;
                    weight += w;
                }
            }
        }
        location = Point3::from(sum / weight);
    }
    Ok(PeakResult {
        location,
        voxel,
        count,
        refined: refine,
    })
}

/// Element-wise sum of grids sharing one geometry.
pub fn merge_grids(grids: &[AccumulatorGrid]) -> Result<AccumulatorGrid> {
    let (first, rest) = grids
        .split_first()
        .ok_or_else(|| Error::param("grids", "nothing to merge"))?;
    let mut out = first.clone();
    for g in rest {
        out.add_assign(g)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CameraIntrinsics;

    fn grid(dims: [usize; 3]) -> AccumulatorGrid {
        AccumulatorGrid::new(GridGeometry::new(Point3::origin(), 1.0, dims).unwrap())
    }

    #[test]
    fn peak_of_single_vote() {
        let mut g = grid([4, 4, 4]);
        cast_offset_vote(&mut g, &Point3::new(2.2, 1.7, 3.9), &Vector3::zeros());
        let p = find_peak(&g, false).unwrap();
        assert_eq!(p.voxel, [2, 1, 3]);
        assert_eq!(p.location, Point3::new(2.5, 1.5, 3.5));
        assert_eq!(p.count, 1);
        // refinement around an isolated voxel stays on its center
        assert_eq!(find_peak(&g, true).unwrap().location, p.location);
    }

    #[test]
    fn peak_ties_take_smallest_index() {
        let mut g = grid([4, 4, 4]);
        cast_offset_vote(&mut g, &Point3::new(3.5, 3.5, 0.5), &Vector3::zeros());
        cast_offset_vote(&mut g, &Point3::new(0.5, 0.5, 2.5), &Vector3::zeros());
        assert_eq!(find_peak(&g, false).unwrap().voxel, [3, 3, 0]);
        assert_eq!(find_peak(&grid([2, 2, 2]), false), Err(Error::NoPeak));
    }

    #[test]
    fn refined_peak_is_weighted() {
        let mut g = grid([3, 3, 3]);
        for _ in 0..3 {
            cast_offset_vote(&mut g, &Point3::new(1.5, 1.5, 1.5), &Vector3::zeros());
        }
        cast_offset_vote(&mut g, &Point3::new(2.5, 1.5, 1.5), &Vector3::zeros());
        let p = find_peak(&g, true).unwrap();
        assert!((p.location.x - 1.75).abs() < 1e-12);
        assert_eq!(p.location.y, 1.5);
    }

    #[test]
    fn merge_sums_and_checks_geometry() {
        let mut a = grid([2, 2, 2]);
        let mut b = grid([2, 2, 2]);
        cast_offset_vote(&mut a, &Point3::new(0.5, 0.5, 0.5), &Vector3::zeros());
        cast_offset_vote(&mut b, &Point3::new(0.5, 0.5, 0.5), &Vector3::zeros());
        cast_offset_vote(&mut b, &Point3::new(1.5, 0.5, 0.5), &Vector3::zeros());
        let m = merge_grids(&[a.clone(), b]).unwrap();
        assert_eq!(&m.counts()[..2], &[2, 1]);
        assert_eq!(merge_grids(&[a.clone(), grid([2, 2, 2])]).unwrap(), a);
        assert_eq!(merge_grids(&[a, grid([2, 2, 3])]), Err(Error::GridMismatch));
        assert!(merge_grids(&[]).is_err());
    }

    #[test]
    fn empty_mask_casts_nothing() {
        let k = CameraIntrinsics::new(10.0, 10.0, 2.0, 2.0, 4, 4).unwrap();
        let frame = DepthFrame::new(k, vec![100.0; 16]).unwrap();
        let map = VoteMap::empty(4, 4, SchemeKind::Radial);
        let mut g = grid([4, 4, 4]);
        let s = cast_votes(&mut g, &map, &frame).unwrap();
        assert_eq!(s.pixels_voted, 0);
        assert_eq!(g.total(), 0);
    }
}
