//! Pose error metrics.

use crate::error::{Error, Result};
use crate::geometry::{PointCloud, RigidTransform};
use crate::spatial::KdTree;

/// Models larger than this use a k-d tree for ADD-s nearest neighbours.
pub const ADDS_INDEX_THRESHOLD: usize = 5000;

/// Mean distance between corresponding model points under the two poses.
pub fn add_metric(model: &PointCloud, gt: &RigidTransform, est: &RigidTransform) -> f64 {
    let sum: f64 = model
        .points()
        .iter()
        .map(|x| (gt.apply(x) - est.apply(x)).norm())
        .sum();
    sum / model.len() as f64
}

/// Mean distance from each ground-truth-posed model point to the closest
/// estimate-posed model point.
pub fn adds_metric(model: &PointCloud, gt: &RigidTransform, est: &RigidTransform) -> f64 {
    let moved: Vec<_> = model.points().iter().map(|x| est.apply(x)).collect();
    let sum: f64 = if model.len() > ADDS_INDEX_THRESHOLD {
        let tree = KdTree::new(&moved);
        model
            .points()
            .iter()
            .map(|x| tree.nearest(&gt.apply(x)).map_or(0.0, |(_, d2)| d2.sqrt()))
            .sum()
    } else {
        model
            .points()
            .iter()
            .map(|x| {
                let p = gt.apply(x);
                moved
                    .iter()
                    .map(|q| (p - q).norm_squared())
                    .fold(f64::INFINITY, f64::min)
                    .sqrt()
            })
            .sum()
    };
    sum / model.len() as f64
}

/// Share of `values` strictly below `fraction × object_radius`.
pub fn accuracy_at_threshold(values: &[f64], object_radius: f64, fraction: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    if !(fraction.is_finite() && fraction > 0.0) {
        return Err(Error::param("fraction", "must be positive"));
    }
    let t = fraction * object_radius;
    Ok(values.iter().filter(|v| **v < t).count() as f64 / values.len() as f64)
}

/// Area under the accuracy-vs-threshold curve on `[0, max_threshold]`,
/// normalised to `[0, 1]`. The curve is a step function, so the integral
/// is exact: each value contributes `(max − min(value, max)) / max`.
pub fn auc_metric(values: &[f64], max_threshold: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::TooFewPoints { needed: 1, got: 0 });
    }
    if !(max_threshold.is_finite() && max_threshold > 0.0) {
        return Err(Error::param("max_threshold", "must be positive"));
    }
    let area: f64 = values
        .iter()
        .map(|v| (max_threshold - v.clamp(0.0, max_threshold)) / max_threshold)
        .sum();
    Ok(area / values.len() as f64)
}

/// Mean and sample standard deviation; zero spread for fewer than two values.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point3, Vector3};

    fn cloud() -> PointCloud {
        PointCloud::new((0..20).map(|i| Point3::new(i as f64, (i * i) as f64 * 0.1, 1.0)).collect()).unwrap()
    }

    #[test]
    fn identical_poses_score_zero() {
        let g = RigidTransform::from_axis_angle(Vector3::y(), 0.4, Vector3::new(1.0, 2.0, 3.0));
        assert_eq!(add_metric(&cloud(), &g, &g), 0.0);
        assert_eq!(adds_metric(&cloud(), &g, &g), 0.0);
    }

    #[test]
    fn pure_translation_shifts_add() {
        let g = RigidTransform::identity();
        let e = RigidTransform::from_translation(Vector3::new(2.5, 0.0, 0.0));
        assert!((add_metric(&cloud(), &g, &e) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn accuracy_boundary_is_strict() {
        assert_eq!(accuracy_at_threshold(&[0.0; 4], 50.0, 0.1).unwrap(), 1.0);
        assert_eq!(accuracy_at_threshold(&[5.0, 4.9], 50.0, 0.1).unwrap(), 0.5);
        assert!(accuracy_at_threshold(&[], 50.0, 0.1).is_err());
        assert!(accuracy_at_threshold(&[1.0], 50.0, 0.0).is_err());
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc_metric(&[0.0, 0.0], 100.0).unwrap(), 1.0);
        assert_eq!(auc_metric(&[50.0], 100.0).unwrap(), 0.5);
        assert_eq!(auc_metric(&[150.0], 100.0).unwrap(), 0.0);
        assert!(auc_metric(&[], 100.0).is_err());
    }

    #[test]
    fn mean_std_basics() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }
}
