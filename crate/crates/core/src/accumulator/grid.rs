use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud, Vector3};

/// Placement of a voxel grid: min corner, edge length and voxel counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub origin: Point3,
    pub resolution: f64,
    pub dims: [usize; 3],
}

impl GridGeometry {
    pub fn new(origin: Point3, resolution: f64, dims: [usize; 3]) -> Result<Self> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::param("resolution", "must be positive"));
        }
        if dims.iter().any(|d| *d == 0) {
            return Err(Error::param("dims", "every axis needs at least one voxel"));
        }
        if dims.iter().try_fold(1usize, |acc, d| acc.checked_mul(*d)).is_none() {
            return Err(Error::param("dims", "voxel count overflows"));
        }
        Ok(Self {
            origin,
            resolution,
            dims,
        })
    }

    /// Smallest grid with edge `resolution` covering the box `[lo, hi]`.
    pub fn covering(lo: Point3, hi: Point3, resolution: f64) -> Result<Self> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::param("resolution", "must be positive"));
        }
        let mut dims = [1usize; 3];
        for (a, d) in dims.iter_mut().enumerate() {
            *d = voxels_for_extent(hi[a] - lo[a], resolution);
        }
        Self::new(lo, resolution, dims)
    }

    pub fn voxel_count(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    /// Bytes held by the count array (one 32-bit word per voxel).
    pub fn memory_bytes(&self) -> u64 {
        self.voxel_count() as u64 * 4
    }

    pub fn max_corner(&self) -> Point3 {
        self.origin
            + Vector3::new(
                self.dims[0] as f64,
                self.dims[1] as f64,
                self.dims[2] as f64,
            ) * self.resolution
    }

    /// Position in voxel units relative to the origin.
    pub fn to_grid(&self, p: &Point3) -> Vector3 {
        (p - self.origin) / self.resolution
    }

    pub fn linear_index(&self, v: [usize; 3]) -> usize {
        v[0] + self.dims[0] * (v[1] + self.dims[1] * v[2])
    }

    pub fn voxel_from_linear(&self, i: usize) -> [usize; 3] {
        let nx = self.dims[0];
        let ny = self.dims[1];
        [i % nx, (i / nx) % ny, i / (nx * ny)]
    }

    pub fn voxel_center(&self, v: [usize; 3]) -> Point3 {
        self.origin
            + Vector3::new(v[0] as f64 + 0.5, v[1] as f64 + 0.5, v[2] as f64 + 0.5) * self.resolution
    }

    /// Voxel containing `p`. The grid box is closed, so points on the max
    /// faces belong to the last voxel layer.
    pub fn voxel_of(&self, p: &Point3) -> Option<[usize; 3]> {
        let g = self.to_grid(p);
        let mut v = [0usize; 3];
        for a in 0..3 {
            let x = g[a];
            let n = self.dims[a] as f64;
            if !(x >= 0.0 && x <= n) {
                return None;
            }
            v[a] = (x.floor() as usize).min(self.dims[a] - 1);
        }
        Some(v)
    }
}

/// `ceil(extent / resolution)`, at least one voxel; ratios within 1e-9 of
/// an integer are not bumped up by rounding noise.
pub fn voxels_for_extent(extent: f64, resolution: f64) -> usize {
    let n = extent.max(0.0) / resolution;
    let r = n.round();
    let n = if (n - r).abs() < 1e-9 { r } else { n.ceil() };
    (n as usize).max(1)
}

/// Dense voxel grid of vote counts, x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct AccumulatorGrid {
    geometry: GridGeometry,
    counts: Vec<u32>,
}

impl AccumulatorGrid {
    pub fn new(geometry: GridGeometry) -> Self {
        Self {
            counts: vec![0; geometry.voxel_count()],
            geometry,
        }
    }

    pub fn from_counts(geometry: GridGeometry, counts: Vec<u32>) -> Result<Self> {
        if counts.len() != geometry.voxel_count() {
            return Err(Error::SizeMismatch {
                what: "counts vs voxel count",
                left: counts.len(),
                right: geometry.voxel_count(),
            });
        }
        Ok(Self { geometry, counts })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn dims(&self) -> [usize; 3] {
        self.geometry.dims
    }

    pub fn resolution(&self) -> f64 {
        self.geometry.resolution
    }

    pub fn origin(&self) -> Point3 {
        self.geometry.origin
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn count(&self, v: [usize; 3]) -> u32 {
        self.counts[self.geometry.linear_index(v)]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|c| *c as u64).sum()
    }

    pub fn clear(&mut self) {
        self.counts.fill(0);
    }

    #[inline]
    pub(crate) fn bump(&mut self, linear: usize) {
        self.counts[linear] += 1;
    }

    /// Adds `other`'s counts into `self`.
    pub fn add_assign(&mut self, other: &AccumulatorGrid) -> Result<()> {
        if self.geometry != other.geometry {
            return Err(Error::GridMismatch);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += *b;
        }
        Ok(())
    }
}

/// Grid spanning the bounding box of `scene` padded by `max_radius` on
/// every side, with `ceil(extent / resolution)` voxels per axis.
pub fn build_grid(scene: &PointCloud, max_radius: f64, resolution: f64) -> Result<AccumulatorGrid> {
    if !(max_radius.is_finite() && max_radius >= 0.0) {
        return Err(Error::param("max_radius", "must be non-negative"));
    }
    let (lo, hi) = scene.bounds();
    let pad = Vector3::repeat(max_radius);
    Ok(AccumulatorGrid::new(GridGeometry::covering(lo - pad, hi + pad, resolution)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_grid() {
        let cloud = PointCloud::new(vec![Point3::new(3.0, 4.0, 5.0)]).unwrap();
        let g = build_grid(&cloud, 0.0, 1.0).unwrap();
        assert_eq!(g.dims(), [1, 1, 1]);
        assert_eq!(g.geometry().voxel_of(&Point3::new(3.0, 4.0, 5.0)), Some([0, 0, 0]));
    }

    #[test]
    fn unit_cube_at_half_mm() {
        let cloud = PointCloud::new(
            (0..8)
                .map(|i| Point3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
                .collect(),
        )
        .unwrap();
        let g = build_grid(&cloud, 0.0, 0.5).unwrap();
        assert_eq!(g.dims(), [2, 2, 2]);
        // max-face points land in the last layer
        assert_eq!(g.geometry().voxel_of(&Point3::new(1.0, 1.0, 1.0)), Some([1, 1, 1]));
        assert_eq!(g.geometry().voxel_of(&Point3::new(1.0001, 1.0, 1.0)), None);
    }

    #[test]
    fn linemod_sized_extent() {
        let cloud = PointCloud::new(vec![Point3::origin(), Point3::new(479.0, 479.0, 479.0)]).unwrap();
        let g = build_grid(&cloud, 0.0, 1.0).unwrap();
        assert_eq!(g.dims(), [479; 3]);
        assert_eq!(g.geometry().memory_bytes(), 4 * 479u64.pow(3));
    }

    #[test]
    fn padding_and_ceil() {
        let cloud = PointCloud::new(vec![Point3::origin(), Point3::new(10.0, 3.0, 0.0)]).unwrap();
        let g = build_grid(&cloud, 2.0, 4.0).unwrap();
        assert_eq!(g.dims(), [4, 2, 1]);
        assert_eq!(g.origin(), Point3::new(-2.0, -2.0, -2.0));
        assert!(build_grid(&cloud, -1.0, 1.0).is_err());
        assert!(build_grid(&cloud, 1.0, 0.0).is_err());
    }

    #[test]
    fn index_round_trip() {
        let g = GridGeometry::new(Point3::origin(), 1.0, [3, 4, 5]).unwrap();
        for i in 0..g.voxel_count() {
            assert_eq!(g.linear_index(g.voxel_from_linear(i)), i);
        }
        assert_eq!(g.linear_index([1, 0, 0]), 1);
        assert_eq!(g.linear_index([0, 1, 0]), 3);
    }
}
