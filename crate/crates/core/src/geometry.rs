//! Basic 3D types shared by every module: points, camera intrinsics, rigid
//! transforms and point clouds. All lengths are millimetres.

use nalgebra::{Rotation3, Unit};

use crate::error::{Error, Result};

pub type Point3 = nalgebra::Point3<f64>;
pub type Vector3 = nalgebra::Vector3<f64>;
pub type Matrix3 = nalgebra::Matrix3<f64>;

/// Tolerance used when validating rotation matrices.
pub const ROTATION_TOLERANCE: f64 = 1e-9;

/// An image pixel with its measured depth. A depth of zero or NaN marks the
/// pixel as invalid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pixel {
    pub u: u32,
    pub v: u32,
    pub depth: f64,
}

impl Pixel {
    pub fn new(u: u32, v: u32, depth: f64) -> Self {
        Self { u, v, depth }
    }

    pub fn has_valid_depth(&self) -> bool {
        self.depth.is_finite() && self.depth > 0.0
    }
}

/// Pinhole camera intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    /// The Kinect intrinsics shipped with the LINEMOD dataset.
    pub fn linemod() -> Self {
        Self {
            fx: 572.4114,
            fy: 573.57043,
            cx: 325.2611,
            cy: 242.04899,
            width: 640,
            height: 480,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx.is_finite() && self.fx > 0.0) {
            return Err(Error::param("fx", "focal length must be positive"));
        }
        if !(self.fy.is_finite() && self.fy > 0.0) {
            return Err(Error::param("fy", "focal length must be positive"));
        }
        if !(self.cx > 0.0 && self.cx < self.width as f64) {
            return Err(Error::param("cx", "principal point outside the image"));
        }
        if !(self.cy > 0.0 && self.cy < self.height as f64) {
            return Err(Error::param("cy", "principal point outside the image"));
        }
        Ok(())
    }

    /// Same camera with the image downsampled by an integer factor.
    pub fn downsampled(&self, factor: u32) -> Self {
        let f = factor.max(1) as f64;
        Self {
            fx: self.fx / f,
            fy: self.fy / f,
            cx: self.cx / f,
            cy: self.cy / f,
            width: (self.width / factor.max(1)).max(1),
            height: (self.height / factor.max(1)).max(1),
        }
    }

    /// Continuous image coordinates of a camera-frame point, or `None` for
    /// points on or behind the image plane.
    pub fn project(&self, p: &Point3) -> Option<(f64, f64)> {
        if !(p.z > 0.0) {
            return None;
        }
        Some((self.fx * p.x / p.z + self.cx, self.fy * p.y / p.z + self.cy))
    }

    /// Pixel hit by a camera-frame point (nearest integer coordinates).
    pub fn project_to_pixel(&self, p: &Point3) -> Option<(u32, u32)> {
        let (u, v) = self.project(p)?;
        let (u, v) = (u.round(), v.round());
        if u < 0.0 || v < 0.0 || u >= self.width as f64 || v >= self.height as f64 {
            return None;
        }
        Some((u as u32, v as u32))
    }
}

/// Lifts a pixel with depth into the camera frame.
pub fn backproject(pixel: Pixel, k: &CameraIntrinsics) -> Result<Point3> {
    if !pixel.has_valid_depth() {
        return Err(Error::InvalidDepth {
            u: pixel.u,
            v: pixel.v,
            depth: pixel.depth,
        });
    }
    let d = pixel.depth;
    Ok(Point3::new(
        (pixel.u as f64 - k.cx) * d / k.fx,
        (pixel.v as f64 - k.cy) * d / k.fy,
        d,
    ))
}

/// Rotation followed by translation: `x -> R x + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    rotation: Matrix3,
    translation: Vector3,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl RigidTransform {
    /// Builds a transform, checking that `rotation` is a proper rotation.
    pub fn new(rotation: Matrix3, translation: Vector3) -> Result<Self> {
        if !rotation.iter().chain(translation.iter()).all(|x| x.is_finite()) {
            return Err(Error::param("rotation", "non-finite entries"));
        }
        let ortho = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        if ortho > ROTATION_TOLERANCE {
            return Err(Error::param(
                "rotation",
                format!("not orthonormal (max |RᵀR - I| = {ortho:e})"),
            ));
        }
        let det = rotation.determinant();
        if (det - 1.0).abs() > ROTATION_TOLERANCE {
            return Err(Error::param("rotation", format!("determinant {det} != 1")));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn from_translation(t: Vector3) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: t,
        }
    }

    pub fn from_rotation(rotation: Rotation3<f64>, translation: Vector3) -> Self {
        Self {
            rotation: *rotation.matrix(),
            translation,
        }
    }

    /// Rotation of `angle` radians about `axis`, then translation.
    pub fn from_axis_angle(axis: Vector3, angle: f64, translation: Vector3) -> Self {
        let rot = match Unit::try_new(axis, 1e-12) {
            Some(axis) => Rotation3::from_axis_angle(&axis, angle),
            None => Rotation3::identity(),
        };
        Self::from_rotation(rot, translation)
    }

    pub fn rotation(&self) -> &Matrix3 {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3 {
        &self.translation
    }

    pub fn apply(&self, p: &Point3) -> Point3 {
        Point3::from(self.rotation * p.coords + self.translation)
    }

    pub fn apply_vector(&self, v: &Vector3) -> Vector3 {
        self.rotation * v
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &RigidTransform) -> RigidTransform {
        RigidTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> RigidTransform {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Angle in radians of the relative rotation between two transforms.
    pub fn rotation_angle_to(&self, other: &RigidTransform) -> f64 {
        let rel = self.rotation.transpose() * other.rotation;
        let c = ((rel.trace() - 1.0) / 2.0).clamp(-1.0, 1.0);
        c.acos()
    }

    pub fn translation_distance_to(&self, other: &RigidTransform) -> f64 {
        (self.translation - other.translation).norm()
    }

    /// Row-major `[R | t]` as 12 numbers.
    pub fn to_row_major(&self) -> [f64; 12] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[(0, 0)],
            r[(0, 1)],
            r[(0, 2)],
            t.x,
            r[(1, 0)],
            r[(1, 1)],
            r[(1, 2)],
            t.y,
            r[(2, 0)],
            r[(2, 1)],
            r[(2, 2)],
            t.z,
        ]
    }

    pub fn from_row_major(v: &[f64; 12]) -> Result<Self> {
        let rotation = Matrix3::new(v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10]);
        Self::new(rotation, Vector3::new(v[3], v[7], v[11]))
    }
}

/// A non-empty set of finite 3D points with optional normals.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3>,
    normals: Option<Vec<Vector3>>,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>) -> Result<Self> {
        Self::with_normals(points, None)
    }

    pub fn with_normals(points: Vec<Point3>, normals: Option<Vec<Vector3>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::TooFewPoints { needed: 1, got: 0 });
        }
        if !points.iter().all(|p| p.coords.iter().all(|c| c.is_finite())) {
            return Err(Error::param("points", "non-finite coordinate"));
        }
        if let Some(n) = &normals {
            if n.len() != points.len() {
                return Err(Error::SizeMismatch {
                    what: "normals vs points",
                    left: n.len(),
                    right: points.len(),
                });
            }
        }
        Ok(Self { points, normals })
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn normals(&self) -> Option<&[Vector3]> {
        self.normals.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn centroid(&self) -> Point3 {
        centroid(&self.points)
    }

    /// Axis-aligned bounding box as `(min, max)`.
    pub fn bounds(&self) -> (Point3, Point3) {
        bounds(&self.points)
    }

    /// Largest distance from the centroid to any point.
    pub fn radius(&self) -> f64 {
        let c = self.centroid();
        self.points
            .iter()
            .map(|p| (p - c).norm())
            .fold(0.0, f64::max)
    }

    pub fn transformed(&self, t: &RigidTransform) -> PointCloud {
        PointCloud {
            points: self.points.iter().map(|p| t.apply(p)).collect(),
            normals: self
                .normals
                .as_ref()
                .map(|n| n.iter().map(|v| t.apply_vector(v)).collect()),
        }
    }
}

pub(crate) fn centroid(points: &[Point3]) -> Point3 {
    let sum = points
        .iter()
        .fold(Vector3::zeros(), |acc, p| acc + p.coords);
    Point3::from(sum / points.len() as f64)
}

pub(crate) fn bounds(points: &[Point3]) -> (Point3, Point3) {
    let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    (lo, hi)
}

/// Singular values (descending) of the centred point matrix.
pub(crate) fn centered_singular_values(points: &[Point3]) -> [f64; 3] {
    let c = centroid(points);
    let mut cov = Matrix3::zeros();
    for p in points {
        let d = p - c;
        cov += d * d.transpose();
    }
    // eigenvalues of the scatter matrix are the squared singular values
    let mut ev: Vec<f64> = cov
        .symmetric_eigenvalues()
        .iter()
        .map(|e| e.max(0.0).sqrt())
        .collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    [ev[0], ev[1], ev[2]]
}

/// True when the points span at least a plane, judged by the ratio of the
/// second singular value to the first.
pub(crate) fn is_non_collinear(points: &[Point3]) -> bool {
    if points.len() < 3 {
        return false;
    }
    let s = centered_singular_values(points);
    s[0] > 0.0 && s[1] > 1e-6 * s[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn principal_ray_backprojects_onto_axis() {
        let k2 = CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480).unwrap();
        let p = backproject(Pixel::new(320, 240, 1000.0), &k2).unwrap();
        assert_eq!(p, Point3::new(0.0, 0.0, 1000.0));
    }

    #[test]
    fn forty_five_degree_ray() {
        let k = CameraIntrinsics::new(100.0, 100.0, 200.0, 150.0, 640, 480).unwrap();
        let p = backproject(Pixel::new(300, 150, 500.0), &k).unwrap();
        assert_eq!(p, Point3::new(500.0, 0.0, 500.0));
    }

    #[test]
    fn invalid_depth_is_rejected() {
        let k = CameraIntrinsics::linemod();
        for d in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                backproject(Pixel::new(1, 2, d), &k),
                Err(Error::InvalidDepth { .. })
            ));
        }
    }

    #[test]
    fn backprojection_matches_forward_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let k = CameraIntrinsics::new(
                rng.random_range(100.0..1000.0),
                rng.random_range(100.0..1000.0),
                rng.random_range(1.0..639.0),
                rng.random_range(1.0..479.0),
                640,
                480,
            )
            .unwrap();
            let px = Pixel::new(rng.random_range(0..640), rng.random_range(0..480), rng.random_range(100.0..3000.0));
            let p = backproject(px, &k).unwrap();
            // the pinhole equations solved for (x, y) independently
            let x = px.depth * (px.u as f64 - k.cx) / k.fx;
            let y = px.depth * (px.v as f64 - k.cy) / k.fy;
            assert!((p.x - x).abs() < 1e-9 && (p.y - y).abs() < 1e-9);
            let (u, v) = k.project(&p).unwrap();
            assert!((u - px.u as f64).abs() < 1e-9);
            assert!((v - px.v as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn intrinsics_validation() {
        assert!(CameraIntrinsics::new(0.0, 1.0, 1.0, 1.0, 2, 2).is_err());
        assert!(CameraIntrinsics::new(1.0, 1.0, 3.0, 1.0, 2, 2).is_err());
        assert!(CameraIntrinsics::linemod().validate().is_ok());
    }

    #[test]
    fn transform_rejects_reflection() {
        let m = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(RigidTransform::new(m, Vector3::zeros()).is_err());
        let m = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 1.01));
        assert!(RigidTransform::new(m, Vector3::zeros()).is_err());
    }

    #[test]
    fn compose_and_inverse() {
        let a = RigidTransform::from_axis_angle(Vector3::new(1.0, 2.0, 3.0), 0.7, Vector3::new(4.0, 5.0, 6.0));
        let id = a.compose(&a.inverse());
        assert!((id.rotation() - Matrix3::identity()).abs().max() < 1e-12);
        assert!(id.translation().norm() < 1e-12);
        let back = RigidTransform::from_row_major(&a.to_row_major()).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn cloud_rejects_empty_and_nan() {
        assert!(PointCloud::new(vec![]).is_err());
        assert!(PointCloud::new(vec![Point3::new(f64::NAN, 0.0, 0.0)]).is_err());
    }

    #[test]
    fn collinearity_check() {
        let line: Vec<_> = (0..5).map(|i| Point3::new(i as f64, 2.0 * i as f64, 0.0)).collect();
        assert!(!is_non_collinear(&line));
        let tri = vec![Point3::origin(), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)];
        assert!(is_non_collinear(&tri));
    }
}
