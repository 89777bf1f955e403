//! Object-frame keypoint selection: farthest point sampling on the model
//! surface, scaled bounding-box corners, and radial dispersion.

use crate::error::{Error, Result};
use crate::geometry::{is_non_collinear, Point3, PointCloud};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SelectionMethod {
    Fps,
    ScaledBBox,
}

/// Ordered object-frame keypoints.
///
/// `dispersion_scale` is expressed in object-radius units and is `1` for
/// keypoints sampled on the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct KeypointSet {
    keypoints: Vec<Point3>,
    pub selection_method: SelectionMethod,
    pub dispersion_scale: f64,
}

impl KeypointSet {
    pub fn new(
        keypoints: Vec<Point3>,
        selection_method: SelectionMethod,
        dispersion_scale: f64,
    ) -> Result<Self> {
        if keypoints.len() < 3 {
            return Err(Error::TooFewPoints {
                needed: 3,
                got: keypoints.len(),
            });
        }
        if !is_non_collinear(&keypoints) {
            return Err(Error::Degenerate("keypoints are collinear"));
        }
        if !(dispersion_scale.is_finite() && dispersion_scale > 0.0) {
            return Err(Error::param("dispersion_scale", "must be positive"));
        }
        Ok(Self {
            keypoints,
            selection_method,
            dispersion_scale,
        })
    }

    pub fn points(&self) -> &[Point3] {
        &self.keypoints
    }

    pub fn len(&self) -> usize {
        self.keypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keypoints.is_empty()
    }

    /// Mean keypoint distance to `centroid`.
    pub fn mean_distance_to(&self, centroid: &Point3) -> f64 {
        self.keypoints.iter().map(|k| (k - centroid).norm()).sum::<f64>()
            / self.keypoints.len() as f64
    }

    /// The first `k` keypoints, keeping their order.
    pub fn truncated(&self, k: usize) -> Result<Self> {
        Self::new(
            self.keypoints[..k.min(self.keypoints.len())].to_vec(),
            self.selection_method,
            self.dispersion_scale,
        )
    }

    /// The keypoints at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::new(
            indices.iter().map(|&i| self.keypoints[i]).collect(),
            self.selection_method,
            self.dispersion_scale,
        )
    }
}

/// Index of the point farthest from the cloud centroid (first one on ties).
pub fn default_fps_seed(cloud: &PointCloud) -> usize {
    let c = cloud.centroid();
    let mut best = (0, f64::NEG_INFINITY);
    for (i, p) in cloud.points().iter().enumerate() {
        let d = (p - c).norm_squared();
        if d > best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Indices chosen by greedy farthest point sampling starting at `seed`.
///
/// Each step keeps, for every point, its squared distance to the nearest
/// chosen point and picks the maximum; ties go to the lowest index.
pub fn fps_indices(points: &[Point3], k: usize, seed: usize) -> Result<Vec<usize>> {
    if k > points.len() {
        return Err(Error::SizeMismatch {
            what: "requested keypoints vs cloud size",
            left: k,
            right: points.len(),
        });
    }
    if seed >= points.len() {
        return Err(Error::param("seed_index", "out of range"));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut chosen = Vec::with_capacity(k);
    chosen.push(seed);
    let mut min_d2: Vec<f64> = points.iter().map(|p| (p - points[seed]).norm_squared()).collect();
    while chosen.len() < k {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for (i, &d) in min_d2.iter().enumerate() {
            if d > best.1 {
                best = (i, d);
            }
        }
        let next = best.0;
        chosen.push(next);
        let q = points[next];
        for (d, p) in min_d2.iter_mut().zip(points) {
            *d = d.min((p - q).norm_squared());
        }
    }
    Ok(chosen)
}

/// Farthest point sampling of `k` surface keypoints.
pub fn fps_keypoints(cloud: &PointCloud, k: usize, seed_index: usize) -> Result<KeypointSet> {
    let idx = fps_indices(cloud.points(), k, seed_index)?;
    KeypointSet::new(
        idx.iter().map(|&i| cloud.points()[i]).collect(),
        SelectionMethod::Fps,
        1.0,
    )
}

/// The 8 corners of the cloud's bounding box scaled by `scale` about its
/// centre. Corner `i` takes the max coordinate on axis `a` when bit `a` of
/// `i` is set.
pub fn bbox_keypoints(cloud: &PointCloud, scale: f64) -> Result<KeypointSet> {
    if !(scale.is_finite() && scale >= 1.0) {
        return Err(Error::param("scale", "must be >= 1"));
    }
    let (lo, hi) = cloud.bounds();
    let center = nalgebra::center(&lo, &hi);
    let half = (hi - lo) * (0.5 * scale);
    if half.iter().filter(|h| **h > 0.0).count() < 2 {
        return Err(Error::Degenerate("bounding box has zero extent"));
    }
    let corners = (0..8)
        .map(|i| {
            let mut c = center;
            for a in 0..3 {
                c[a] += if i & (1 << a) != 0 { half[a] } else { -half[a] };
            }
            c
        })
        .collect();
    KeypointSet::new(corners, SelectionMethod::ScaledBBox, scale)
}

/// Picks the `k` keypoints maximising the smallest pairwise distance. Ties
/// go to the lexicographically smallest index tuple.
pub fn most_separated_subset(kps: &KeypointSet, k: usize) -> Result<KeypointSet> {
    let n = kps.len();
    if k < 3 || k > n {
        return Err(Error::param("k", format!("must be in 3..={n}")));
    }
    let pts = kps.points();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut combo: Vec<usize> = (0..k).collect();
    loop {
        let mut min_d = f64::INFINITY;
        for a in 0..k {
            for b in a + 1..k {
                min_d = min_d.min((pts[combo[a]] - pts[combo[b]]).norm());
            }
        }
        let candidate = KeypointSet::new(
            combo.iter().map(|&i| pts[i]).collect(),
            kps.selection_method,
            kps.dispersion_scale,
        );
        if candidate.is_ok() && best.as_ref().is_none_or(|(d, _)| min_d > *d) {
            best = Some((min_d, combo.clone()));
        }
        // next combination in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                let (_, idx) = best.ok_or(Error::Degenerate("no non-collinear subset"))?;
                return kps.subset(&idx);
            }
            i -= 1;
            if combo[i] < n - k + i {
                break;
            }
        }
        combo[i] += 1;
        for j in i + 1..k {
            combo[j] = combo[j - 1] + 1;
        }
    }
}

/// Moves every keypoint along its ray from `centroid` to a distance of
/// `target_scale * object_radius`.
pub fn disperse_keypoints(
    kps: &KeypointSet,
    centroid: &Point3,
    target_scale: f64,
    object_radius: f64,
) -> Result<KeypointSet> {
    if !(target_scale.is_finite() && target_scale > 0.0) {
        return Err(Error::param("target_scale", "must be positive"));
    }
    if !(object_radius.is_finite() && object_radius > 0.0) {
        return Err(Error::param("object_radius", "must be positive"));
    }
    let dist = target_scale * object_radius;
    let moved = kps
        .points()
        .iter()
        .map(|k| {
            let d = k - centroid;
            let n = d.norm();
            if n == 0.0 {
                Err(Error::Degenerate("keypoint coincides with centroid"))
            } else {
                Ok(centroid + d * (dist / n))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    KeypointSet::new(moved, kps.selection_method, target_scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_cube() -> PointCloud {
        PointCloud::new(
            (0..8)
                .map(|i| Point3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
                .collect(),
        )
        .unwrap()
    }

    // Recomputes every candidate's distance to the full chosen set from scratch.
    fn brute_force_fps(points: &[Point3], k: usize, seed: usize) -> Vec<usize> {
        let mut chosen = vec![seed];
        while chosen.len() < k {
            let mut best = (0, -1.0);
            for (i, p) in points.iter().enumerate() {
                let d = chosen
                    .iter()
                    .map(|&c| (p - points[c]).norm_squared())
                    .fold(f64::INFINITY, f64::min);
                if d > best.1 {
                    best = (i, d);
                }
            }
            chosen.push(best.0);
        }
        chosen
    }

    #[test]
    fn fps_two_points() {
        let pts = vec![Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 2.0, 3.0)];
        assert_eq!(fps_indices(&pts, 2, 0).unwrap(), vec![0, 1]);
    }

    #[test]
    fn fps_cube_picks_opposite_corner() {
        let cube = unit_cube();
        let idx = fps_indices(cube.points(), 2, 0).unwrap();
        assert_eq!(cube.points()[idx[1]], Point3::new(1.0, 1.0, 1.0));
    }

    #[test]
    fn fps_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..20 {
            let n = if trial == 0 { 500 } else { 200 };
            let pts: Vec<_> = (0..n)
                .map(|_| Point3::new(rng.random(), rng.random(), rng.random()))
                .collect();
            let seed = rng.random_range(0..n);
            assert_eq!(fps_indices(&pts, 4, seed).unwrap(), brute_force_fps(&pts, 4, seed));
        }
    }

    #[test]
    fn fps_too_many() {
        let cube = unit_cube();
        assert!(matches!(fps_keypoints(&cube, 9, 0), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn bbox_unit_and_scaled() {
        let cube = unit_cube();
        let k1 = bbox_keypoints(&cube, 1.0).unwrap();
        assert_eq!(k1.points(), cube.points());
        let k2 = bbox_keypoints(&cube, 2.0).unwrap();
        for (c, p) in k2.points().iter().zip(cube.points()) {
            let expect = Point3::new(2.0 * p.x - 0.5, 2.0 * p.y - 0.5, 2.0 * p.z - 0.5);
            assert!((c - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn bbox_matches_extent_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<_> = (0..300)
            .map(|_| Point3::new(rng.random_range(-5.0..9.0), rng.random_range(1.0..2.0), rng.random_range(-30.0..0.0)))
            .collect();
        let cloud = PointCloud::new(pts.clone()).unwrap();
        let kps = bbox_keypoints(&cloud, 2.0).unwrap();
        for a in 0..3 {
            let lo = pts.iter().map(|p| p[a]).fold(f64::INFINITY, f64::min);
            let hi = pts.iter().map(|p| p[a]).fold(f64::NEG_INFINITY, f64::max);
            let (c, h) = ((lo + hi) / 2.0, (hi - lo));
            let got_lo = kps.points().iter().map(|p| p[a]).fold(f64::INFINITY, f64::min);
            let got_hi = kps.points().iter().map(|p| p[a]).fold(f64::NEG_INFINITY, f64::max);
            assert!((got_lo - (c - h)).abs() < 1e-12 && (got_hi - (c + h)).abs() < 1e-12);
        }
    }

    #[test]
    fn bbox_degenerate() {
        let cloud = PointCloud::new(vec![Point3::new(1.0, 1.0, 1.0); 4]).unwrap();
        assert!(matches!(bbox_keypoints(&cloud, 2.0), Err(Error::Degenerate(_))));
        assert!(bbox_keypoints(&unit_cube(), 0.5).is_err());
    }

    #[test]
    fn separated_subset_of_box_corners() {
        let cloud = PointCloud::new(vec![Point3::origin(), Point3::new(4.0, 2.0, 1.0)]).unwrap();
        let corners = bbox_keypoints(&cloud, 1.0).unwrap();
        let sub = most_separated_subset(&corners, 3).unwrap();
        assert_eq!(sub.len(), 3);
        // brute force the optimum value
        let pts = corners.points();
        let mut best = 0.0f64;
        for a in 0..8 {
            for b in a + 1..8 {
                for c in b + 1..8 {
                    let m = (pts[a] - pts[b]).norm().min((pts[a] - pts[c]).norm()).min((pts[b] - pts[c]).norm());
                    best = best.max(m);
                }
            }
        }
        let s = sub.points();
        let got = (s[0] - s[1]).norm().min((s[0] - s[2]).norm()).min((s[1] - s[2]).norm());
        assert_eq!(got, best);
    }

    #[test]
    fn disperse_examples() {
        let r = 10.0;
        let kps = KeypointSet::new(
            vec![Point3::new(r, 0.0, 0.0), Point3::new(0.0, r, 0.0), Point3::new(0.0, 0.0, r)],
            SelectionMethod::Fps,
            1.0,
        )
        .unwrap();
        let same = disperse_keypoints(&kps, &Point3::origin(), 1.0, r).unwrap();
        assert_eq!(same.points(), kps.points());
        let far = disperse_keypoints(&kps, &Point3::origin(), 3.0, r).unwrap();
        assert_eq!(far.points()[0], Point3::new(3.0 * r, 0.0, 0.0));
        assert_eq!(far.dispersion_scale, 3.0);
    }

    #[test]
    fn disperse_preserves_directions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = Point3::new(1.0, -2.0, 3.0);
        let pts: Vec<_> = (0..6)
            .map(|_| c + nalgebra::Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * 50.0)
            .collect();
        let kps = KeypointSet::new(pts, SelectionMethod::Fps, 1.0).unwrap();
        let out = disperse_keypoints(&kps, &c, 2.5, 40.0).unwrap();
        for (a, b) in kps.points().iter().zip(out.points()) {
            assert!(((b - c).norm() - 100.0).abs() < 1e-9);
            assert!(((a - c).normalize() - (b - c).normalize()).norm() < 1e-12);
        }
        for i in 0..6 {
            for j in i + 1..6 {
                let angle = |p: &[Point3]| (p[i] - c).angle(&(p[j] - c));
                assert!((angle(kps.points()) - angle(out.points())).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn disperse_centroid_coincident() {
        let kps = KeypointSet::new(
            vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)],
            SelectionMethod::Fps,
            1.0,
        )
        .unwrap();
        assert!(matches!(
            disperse_keypoints(&kps, &Point3::origin(), 2.0, 1.0),
            Err(Error::Degenerate(_))
        ));
    }
}
