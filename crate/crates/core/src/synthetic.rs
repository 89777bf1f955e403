//! Procedural test objects and random viewpoints.

use std::f64::consts::PI;

use nalgebra::{Rotation3, Unit, UnitQuaternion, Vector4};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, Point3, PointCloud, RigidTransform, Vector3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    SphereShell,
    BoxShell,
    LBracket,
}

impl Shape {
    pub fn name(self) -> &'static str {
        match self {
            Shape::SphereShell => "sphere_shell",
            Shape::BoxShell => "box_shell",
            Shape::LBracket => "l_bracket",
        }
    }
}

/// A procedural object: a shape scaled so that its farthest surface point
/// lies `radius` mm from the centroid.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SyntheticObject {
    pub shape: Shape,
    pub radius: f64,
}

impl SyntheticObject {
    /// Three objects spanning small, large and mid-sized parts.
    pub fn standard_set() -> [SyntheticObject; 3] {
        [
            SyntheticObject {
                shape: Shape::SphereShell,
                radius: 61.2,
            },
            SyntheticObject {
                shape: Shape::BoxShell,
                radius: 129.4,
            },
            SyntheticObject {
                shape: Shape::LBracket,
                radius: 82.5,
            },
        ]
    }

    pub fn name(&self) -> &'static str {
        self.shape.name()
    }

    /// Surface samples roughly `spacing` mm apart, centred on the origin.
    pub fn sample(&self, spacing: f64) -> Result<PointCloud> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::param("radius", "must be positive"));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::param("spacing", "must be positive"));
        }
        let build = |s: f64, step: f64| match self.shape {
            Shape::SphereShell => sphere_shell(s, step / s),
            Shape::BoxShell => box_surface(Point3::origin(), Vector3::new(1.0, 0.6, 0.4) * s, step),
            Shape::LBracket => l_bracket(s, step),
        };
        // probe at unit size for the scale, then sample at the final size
        let probe = PointCloud::new(build(1.0, 0.01))?;
        let cloud = PointCloud::new(build(self.radius / probe.radius(), spacing))?;
        let c = cloud.centroid();
        let pts = cloud.points().iter().map(|p| Point3::from(p - c)).collect();
        PointCloud::new(pts)
    }
}

fn sphere_shell(radius: f64, angular_step: f64) -> Vec<Point3> {
    let rings = ((PI / angular_step).ceil() as usize).max(2);
    let mut pts = Vec::new();
    for i in 0..=rings {
        let phi = PI * i as f64 / rings as f64;
        let n = ((2.0 * PI * phi.sin() / angular_step).ceil() as usize).max(1);
        for j in 0..n {
            let psi = 2.0 * PI * j as f64 / n as f64;
            pts.push(Point3::new(
                radius * phi.sin() * psi.cos(),
                radius * phi.sin() * psi.sin(),
                radius * phi.cos(),
            ));
        }
    }
    pts
}

/// Grid samples over the six faces of the box `[lo, lo + size]`.
fn box_surface(lo: Point3, size: Vector3, spacing: f64) -> Vec<Point3> {
    let mut pts = Vec::new();
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        let nu = ((size[u] / spacing).ceil() as usize).max(1);
        let nv = ((size[v] / spacing).ceil() as usize).max(1);
        for side in [0.0, 1.0] {
            for i in 0..=nu {
                for j in 0..=nv {
                    let mut p = lo;
                    p[axis] += side * size[axis];
                    p[u] += size[u] * i as f64 / nu as f64;
                    p[v] += size[v] * j as f64 / nv as f64;
                    pts.push(p);
                }
            }
        }
    }
    pts
}

/// Two plates joined along one edge; surface samples of their union.
fn l_bracket(s: f64, spacing: f64) -> Vec<Point3> {
    let (long, thick, depth) = (1.0 * s, 0.25 * s, 0.5 * s);
    let a_lo = Point3::origin();
    let a_size = Vector3::new(long, thick, depth);
    let b_lo = Point3::origin();
    let b_size = Vector3::new(thick, 0.8 * s, depth);
    let inside = |p: &Point3, lo: &Point3, size: &Vector3| (0..3).all(|k| p[k] > lo[k] && p[k] < lo[k] + size[k]);
    let mut pts: Vec<Point3> = box_surface(a_lo, a_size, spacing)
        .into_iter()
        .filter(|p| !inside(p, &b_lo, &b_size))
        .collect();
    pts.extend(
        box_surface(b_lo, b_size, spacing)
            .into_iter()
            .filter(|p| !inside(p, &a_lo, &a_size)),
    );
    pts
}

/// Rotation drawn uniformly from SO(3).
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation3<f64> {
    loop {
        let q = Vector4::from_fn(|_, _| StandardNormal.sample(rng));
        if q.norm() > 1e-6 {
            return UnitQuaternion::from_quaternion(nalgebra::Quaternion::from_vector(q)).to_rotation_matrix();
        }
    }
}

/// Uniformly distributed unit vector.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Vector3 {
    loop {
        let v = Vector3::from_fn(|_, _| StandardNormal.sample(rng));
        if v.norm() > 1e-9 {
            return Unit::new_normalize(v).into_inner();
        }
    }
}

/// An object pose in front of the camera: uniform rotation, depth in
/// `depth_range` and a centroid projecting into the central half of the
/// image.
pub fn random_view<R: Rng + ?Sized>(rng: &mut R, k: &CameraIntrinsics, depth_range: (f64, f64)) -> RigidTransform {
    let z = rng.random_range(depth_range.0..=depth_range.1);
    let w = k.width as f64;
    let h = k.height as f64;
    let u = rng.random_range(0.25 * w..0.75 * w);
    let v = rng.random_range(0.25 * h..0.75 * h);
    let t = Vector3::new((u - k.cx) * z / k.fx, (v - k.cy) * z / k.fy, z);
    RigidTransform::from_rotation(random_rotation(rng), t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn objects_have_requested_radius() {
        for obj in SyntheticObject::standard_set() {
            let cloud = obj.sample(2.0).unwrap();
            assert!((cloud.radius() - obj.radius).abs() < 0.5, "{} {}", obj.name(), cloud.radius());
            assert!(cloud.centroid().coords.norm() < 0.5);
            assert!(cloud.len() > 1000);
        }
    }

    #[test]
    fn bracket_has_no_interior_points() {
        let obj = SyntheticObject {
            shape: Shape::LBracket,
            radius: 80.0,
        };
        let cloud = obj.sample(2.0).unwrap();
        let (lo, hi) = cloud.bounds();
        // the notch corner region is empty
        let notch = Point3::new(hi.x - 5.0, hi.y - 5.0, 0.5 * (lo.z + hi.z));
        assert!(cloud.points().iter().all(|p| (p - notch).norm() > 4.0));
    }

    #[test]
    fn random_rotations_are_proper() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let r = random_rotation(&mut rng);
            assert!((r.matrix().determinant() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn views_project_inside_image() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let k = CameraIntrinsics::linemod();
        for _ in 0..100 {
            let pose = random_view(&mut rng, &k, (600.0, 1000.0));
            let c = Point3::from(*pose.translation());
            let (u, v) = k.project(&c).unwrap();
            assert!(u > 0.0 && u < 640.0 && v > 0.0 && v < 480.0);
        }
    }
}
