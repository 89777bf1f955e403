//! Slow reference implementations used to cross-check the fast paths.
//!
//! Every function here scans exhaustively and shares no code with the
//! routine it checks.

use crate::accumulator::{GridGeometry, RAY_TIE};
use crate::geometry::{Point3, RigidTransform, Vector3};

/// Linear indices of all voxels whose box meets the sphere surface,
/// found by testing every voxel of the grid.
pub fn sphere_voxels(geometry: &GridGeometry, center: &Point3, radius: f64) -> Vec<usize> {
    let c = (center - geometry.origin) / geometry.resolution;
    let r = radius / geometry.resolution;
    let r2 = r * r;
    let mut out = Vec::new();
    let [nx, ny, nz] = geometry.dims;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let (xn, xf) = slab(i as f64 - c.x, i as f64 + 1.0 - c.x);
                let (yn, yf) = slab(j as f64 - c.y, j as f64 + 1.0 - c.y);
                let (zn, zf) = slab(k as f64 - c.z, k as f64 + 1.0 - c.z);
                if xn + yn + zn <= r2 && r2 <= xf + yf + zf {
                    out.push(i + nx * (j + ny * k));
                }
            }
        }
    }
    out
}

fn slab(lo: f64, hi: f64) -> (f64, f64) {
    let near = if lo > 0.0 {
        lo * lo
    } else if hi < 0.0 {
        hi * hi
    } else {
        0.0
    };
    (near, (lo * lo).max(hi * hi))
}

/// Linear indices of all voxels whose box the half-line `point + t·dir`,
/// `t ≥ 0`, passes through with positive length.
pub fn ray_voxels(geometry: &GridGeometry, point: &Point3, direction: &Vector3) -> Vec<usize> {
    let g = (point - geometry.origin) / geometry.resolution;
    let mut out = Vec::new();
    let [nx, ny, nz] = geometry.dims;
    for k in 0..nz {
        for j in 0..ny {
            'voxel: for i in 0..nx {
                let lo_corner = [i as f64, j as f64, k as f64];
                let (mut t0, mut t1) = (0.0f64, f64::INFINITY);
                for a in 0..3 {
                    let (lo, hi) = (lo_corner[a], lo_corner[a] + 1.0);
                    if direction[a] == 0.0 {
                        if g[a] < lo || g[a] > hi {
                            continue 'voxel;
                        }
                    } else {
                        let ta = (lo - g[a]) / direction[a];
                        let tb = (hi - g[a]) / direction[a];
                        t0 = t0.max(ta.min(tb));
                        t1 = t1.min(ta.max(tb));
                    }
                }
                if t1 - t0 > RAY_TIE {
                    out.push(i + nx * (j + ny * k));
                }
            }
        }
    }
    out
}

pub fn add(model: &[Point3], gt: &RigidTransform, est: &RigidTransform) -> f64 {
    let mut sum = 0.0;
    for x in model {
        sum += (gt.apply(x) - est.apply(x)).norm();
    }
    sum / model.len() as f64
}

pub fn adds(model: &[Point3], gt: &RigidTransform, est: &RigidTransform) -> f64 {
    let moved: Vec<Point3> = model.iter().map(|x| est.apply(x)).collect();
    let mut sum = 0.0;
    for x in model {
        let p = gt.apply(x);
        let mut best = f64::INFINITY;
        for q in &moved {
            best = best.min((p - q).norm());
        }
        sum += best;
    }
    sum / model.len() as f64
}

/// Accuracy-vs-threshold curve sampled at `samples` midpoints of
/// `[0, max]` and averaged.
pub fn auc_sampled(values: &[f64], max: f64, samples: usize) -> f64 {
    let mut area = 0.0;
    for s in 0..samples {
        let t = (s as f64 + 0.5) * max / samples as f64;
        area += values.iter().filter(|v| **v < t).count() as f64 / values.len() as f64;
    }
    area / samples as f64
}
