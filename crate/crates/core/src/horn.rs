//! Closed-form least-squares rigid registration of corresponded point sets.

use nalgebra::SVD;

use crate::error::{Error, Result};
use crate::geometry::{centroid, is_non_collinear, Matrix3, Point3, RigidTransform};

/// Rigid transform minimising `Σ ‖R·srcᵢ + t − dstᵢ‖²` with uniform weights.
///
/// Both sets are centred, the rotation comes from the SVD of their
/// cross-covariance with the sign of the last singular direction flipped
/// when needed to exclude reflections, and the translation maps the source
/// centroid onto the destination centroid.
pub fn horn_solve(src: &[Point3], dst: &[Point3]) -> Result<RigidTransform> {
    if src.len() != dst.len() {
        return Err(Error::SizeMismatch {
            what: "source vs destination points",
            left: src.len(),
            right: dst.len(),
        });
    }
    if src.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: src.len(),
        });
    }
    if !is_non_collinear(src) {
        return Err(Error::Degenerate("source points are collinear (rank < 2)"));
    }

    let src_c = centroid(src);
    let dst_c = centroid(dst);
    let mut h = Matrix3::zeros();
    for (s, d) in src.iter().zip(dst) {
        h += (s - src_c) * (d - dst_c).transpose();
    }

    let svd = SVD::new(h, true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::Degenerate("SVD failed to converge")),
    };
    let v = v_t.transpose();
    let mut correction = Matrix3::identity();
    if (v * u.transpose()).determinant() < 0.0 {
        correction[(2, 2)] = -1.0;
    }
    let rotation = v * correction * u.transpose();
    let translation = dst_c.coords - rotation * src_c.coords;
    RigidTransform::new(rotation, translation)
}

/// Root of the mean squared correspondence residual under `t`.
pub fn rms_residual(t: &RigidTransform, src: &[Point3], dst: &[Point3]) -> f64 {
    let ss: f64 = src
        .iter()
        .zip(dst)
        .map(|(s, d)| (t.apply(s) - d).norm_squared())
        .sum();
    (ss / src.len().max(1) as f64).sqrt()
}
