//! Quick cross-checks of the fast routines against the slow references in
//! [`crate::oracle`], for running on a fresh install.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::accumulator::{cast_ray_vote, cast_sphere_vote_with, AccumulatorGrid, GridGeometry, VOXEL_HALF_EXTENT};
use crate::geometry::{Point3, PointCloud, RigidTransform};
use crate::horn::{horn_solve, rms_residual};
use crate::metrics::{add_metric, adds_metric, auc_metric};
use crate::oracle;
use crate::synthetic::{random_rotation, random_unit};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelftestOptions {
    /// Random instances per suite.
    pub cases: usize,
    pub seed: u64,
    /// Voxel half-extent handed to the sphere rasteriser. Anything but the
    /// default breaks the surface cover; used to check the suite notices.
    pub sphere_half_extent: f64,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self {
            cases: 100,
            seed: 7,
            sphere_half_extent: VOXEL_HALF_EXTENT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// First failing case, if any.
    pub detail: Option<String>,
    pub seconds: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<6} {:<18} {:>4}/{:<4} ({:.2} s)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.cases - self.failures,
            self.cases,
            self.seconds
        )?;
        if let Some(d) = &self.detail {
            write!(f, "  first failure: {d}")?;
        }
        Ok(())
    }
}

/// Runs every suite and returns one result per suite.
pub fn run_selftest(opts: &SelftestOptions) -> Vec<SuiteResult> {
    vec![
        suite("sphere raster", opts, sphere_case),
        suite("ray raster", opts, ray_case),
        suite("horn round trip", opts, horn_case),
        suite("metrics", opts, metric_case),
    ]
}

fn suite(
    name: &'static str,
    opts: &SelftestOptions,
    case: fn(&mut ChaCha8Rng, &SelftestOptions) -> Result<(), String>,
) -> SuiteResult {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ name.len() as u64);
    let mut failures = 0;
    let mut detail = None;
    for _ in 0..opts.cases {
        if let Err(e) = case(&mut rng, opts) {
            failures += 1;
            detail.get_or_insert(e);
        }
    }
    SuiteResult {
        name,
        cases: opts.cases,
        failures,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn random_geometry(rng: &mut ChaCha8Rng) -> GridGeometry {
    let res = if rng.random_bool(0.5) { 1.0 } else { 5.0 };
    let dims = [rng.random_range(8..40), rng.random_range(8..40), rng.random_range(8..40)];
    let origin = Point3::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0), rng.random_range(0.0..100.0));
    GridGeometry::new(origin, res, dims).expect("positive resolution and dims")
}

fn random_point_near(rng: &mut ChaCha8Rng, g: &GridGeometry) -> Point3 {
    let hi = g.max_corner();
    let slack = 3.0 * g.resolution;
    Point3::new(
        rng.random_range(g.origin.x - slack..hi.x + slack),
        rng.random_range(g.origin.y - slack..hi.y + slack),
        rng.random_range(g.origin.z - slack..hi.z + slack),
    )
}

fn hits(grid: &AccumulatorGrid) -> Vec<usize> {
    grid.counts().iter().enumerate().filter(|(_, c)| **c > 0).map(|(i, _)| i).collect()
}

fn sphere_case(rng: &mut ChaCha8Rng, opts: &SelftestOptions) -> Result<(), String> {
    let g = random_geometry(rng);
    let center = random_point_near(rng, &g);
    let radius = rng.random_range(0.3..20.0) * g.resolution;
    let mut grid = AccumulatorGrid::new(g);
    cast_sphere_vote_with(&mut grid, &center, radius, opts.sphere_half_extent).map_err(|e| e.to_string())?;
    let expected = oracle::sphere_voxels(&g, &center, radius);
    let got = hits(&grid);
    if got != expected {
        return Err(format!(
            "sphere at {:?} r {radius:.3}: {} voxels, oracle {}",
            center.coords.as_slice(),
            got.len(),
            expected.len()
        ));
    }
    Ok(())
}

fn ray_case(rng: &mut ChaCha8Rng, _: &SelftestOptions) -> Result<(), String> {
    let g = random_geometry(rng);
    let start = random_point_near(rng, &g);
    let dir = random_unit(rng);
    let mut grid = AccumulatorGrid::new(g);
    cast_ray_vote(&mut grid, &start, &dir).map_err(|e| e.to_string())?;
    let expected = oracle::ray_voxels(&g, &start, &dir);
    let got = hits(&grid);
    if got != expected {
        return Err(format!("ray from {:?}: {} voxels, oracle {}", start.coords.as_slice(), got.len(), expected.len()));
    }
    Ok(())
}

fn random_pose(rng: &mut ChaCha8Rng) -> RigidTransform {
    let t = random_unit(rng) * rng.random_range(0.0..1000.0);
    RigidTransform::from_rotation(random_rotation(rng), t)
}

fn horn_case(rng: &mut ChaCha8Rng, _: &SelftestOptions) -> Result<(), String> {
    let n = rng.random_range(3..12);
    let src: Vec<Point3> = (0..n).map(|_| Point3::from(random_unit(rng) * rng.random_range(10.0..300.0))).collect();
    let pose = random_pose(rng);
    let dst: Vec<Point3> = src.iter().map(|p| pose.apply(p)).collect();
    let est = horn_solve(&src, &dst).map_err(|e| e.to_string())?;
    let r = rms_residual(&est, &src, &dst);
    if r >= 1e-9 {
        return Err(format!("{n} points: residual {r:e} mm"));
    }
    Ok(())
}

fn metric_case(rng: &mut ChaCha8Rng, _: &SelftestOptions) -> Result<(), String> {
    let pts: Vec<Point3> = (0..rng.random_range(1..200))
        .map(|_| Point3::from(random_unit(rng) * rng.random_range(0.0..100.0)))
        .collect();
    let model = PointCloud::new(pts.clone()).map_err(|e| e.to_string())?;
    let (gt, est) = (random_pose(rng), random_pose(rng));
    let d_add = (add_metric(&model, &gt, &est) - oracle::add(&pts, &gt, &est)).abs();
    let d_adds = (adds_metric(&model, &gt, &est) - oracle::adds(&pts, &gt, &est)).abs();
    let values: Vec<f64> = (0..rng.random_range(1..50)).map(|_| rng.random_range(0.0..150.0)).collect();
    let auc = auc_metric(&values, 100.0).map_err(|e| e.to_string())?;
    let d_auc = (auc - oracle::auc_sampled(&values, 100.0, 10_000)).abs();
    if d_add >= 1e-9 || d_adds >= 1e-9 || d_auc >= 1e-3 {
        return Err(format!("ADD off by {d_add:e}, ADD-s by {d_adds:e}, AUC by {d_auc:e}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passes_and_catches_mutation() {
        let opts = SelftestOptions {
            cases: 20,
            ..Default::default()
        };
        assert!(run_selftest(&opts).iter().all(|s| s.passed()));
        let mutated = SelftestOptions {
            sphere_half_extent: 0.3,
            ..opts
        };
        let r = run_selftest(&mutated);
        assert!(!r[0].passed());
        assert!(r[1..].iter().all(|s| s.passed()));
    }
}
