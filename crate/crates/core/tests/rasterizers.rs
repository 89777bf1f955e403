use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radvote::accumulator::{
    cast_ray_vote, cast_sphere_vote, cast_sphere_vote_with, find_peak, AccumulatorGrid, GridGeometry,
};
use radvote::oracle;
use radvote::{Point3, Vector3};

fn random_grid(rng: &mut ChaCha8Rng, res: f64) -> GridGeometry {
    let dims = [rng.random_range(8..48), rng.random_range(8..48), rng.random_range(8..48)];
    let origin = Point3::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0), rng.random_range(0.0..100.0));
    GridGeometry::new(origin, res, dims).unwrap()
}

fn random_inside(rng: &mut ChaCha8Rng, g: &GridGeometry, slack: f64) -> Point3 {
    let hi = g.max_corner();
    Point3::new(
        rng.random_range(g.origin.x - slack..hi.x + slack),
        rng.random_range(g.origin.y - slack..hi.y + slack),
        rng.random_range(g.origin.z - slack..hi.z + slack),
    )
}

fn nonzero(grid: &AccumulatorGrid) -> Vec<usize> {
    grid.counts().iter().enumerate().filter(|(_, c)| **c > 0).map(|(i, _)| i).collect()
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3 {
    loop {
        let v = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

#[test]
fn sphere_matches_exhaustive_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for res in [1.0, 5.0] {
        for _ in 0..100 {
            let geometry = random_grid(&mut rng, res);
            let center = random_inside(&mut rng, &geometry, 5.0 * res);
            let radius = rng.random_range(0.2..25.0) * res;
            let mut grid = AccumulatorGrid::new(geometry);
            let n = cast_sphere_vote(&mut grid, &center, radius).unwrap();
            let expected = oracle::sphere_voxels(&geometry, &center, radius);
            assert_eq!(nonzero(&grid), expected, "center {center:?} r {radius}");
            assert_eq!(n as usize, expected.len());
            assert!(grid.counts().iter().all(|c| *c <= 1));
        }
    }
}

#[test]
fn sphere_surface_has_no_holes() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for res in [1.0, 5.0] {
        for _ in 0..50 {
            let geometry = GridGeometry::new(Point3::origin(), res, [40, 40, 40]).unwrap();
            let center = Point3::from(Vector3::repeat(20.0 * res) + random_unit(&mut rng) * 3.0 * res);
            let radius = rng.random_range(0.3..15.0) * res;
            let mut grid = AccumulatorGrid::new(geometry);
            cast_sphere_vote(&mut grid, &center, radius).unwrap();
            for _ in 0..2000 {
                let q = center + random_unit(&mut rng) * radius;
                let v = geometry.voxel_of(&q).unwrap();
                assert_eq!(grid.count(v), 1, "hole at {q:?}");
            }
            // every voxel whose center lies within half a voxel of the surface
            for i in 0..geometry.voxel_count() {
                let d = (geometry.voxel_center(geometry.voxel_from_linear(i)) - center).norm();
                if (d - radius).abs() <= 0.5 * res {
                    assert_eq!(grid.counts()[i], 1);
                }
            }
        }
    }
}

#[test]
fn shrunken_voxel_boxes_leave_holes() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let geometry = GridGeometry::new(Point3::origin(), 1.0, [40, 40, 40]).unwrap();
    let center = Point3::new(20.3, 19.8, 20.1);
    let mut grid = AccumulatorGrid::new(geometry);
    cast_sphere_vote_with(&mut grid, &center, 12.0, 0.3).unwrap();
    let holes = (0..2000)
        .filter(|_| grid.count(geometry.voxel_of(&(center + random_unit(&mut rng) * 12.0)).unwrap()) == 0)
        .count();
    assert!(holes > 0);
}

#[test]
fn ray_matches_exhaustive_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for res in [1.0, 5.0] {
        for _ in 0..100 {
            let geometry = random_grid(&mut rng, res);
            let point = random_inside(&mut rng, &geometry, 10.0 * res);
            let dir = random_unit(&mut rng);
            let mut grid = AccumulatorGrid::new(geometry);
            let n = cast_ray_vote(&mut grid, &point, &dir).unwrap();
            let expected = oracle::ray_voxels(&geometry, &point, &dir);
            assert_eq!(nonzero(&grid), expected, "point {point:?} dir {dir:?}");
            assert_eq!(n as usize, expected.len());
        }
    }
}

#[test]
fn three_orthogonal_spheres_peak_at_their_common_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let geometry = GridGeometry::new(Point3::origin(), 1.0, [31, 31, 31]).unwrap();
        let q = geometry.voxel_center([15, 15, 15]);
        let mut grid = AccumulatorGrid::new(geometry);
        for axis in [Vector3::x(), Vector3::y(), Vector3::z()] {
            let r = rng.random_range(18.0..40.0);
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            cast_sphere_vote(&mut grid, &(q + axis * sign * r), r).unwrap();
        }
        assert_eq!(grid.count([15, 15, 15]), 3);
        assert_eq!(grid.counts().iter().filter(|c| **c == 3).count(), 1);
        assert_eq!(find_peak(&grid, false).unwrap().voxel, [15, 15, 15]);
    }
}

#[test]
fn refinement_moves_peak_towards_sphere_intersection() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let (mut raw, mut refined) = (0.0, 0.0);
    for _ in 0..100 {
        let geometry = GridGeometry::new(Point3::origin(), 1.0, [41, 41, 41]).unwrap();
        let q = Point3::new(rng.random_range(19.0..22.0), rng.random_range(19.0..22.0), rng.random_range(19.0..22.0));
        let mut grid = AccumulatorGrid::new(geometry);
        for _ in 0..3 {
            let r = rng.random_range(25.0..60.0);
            cast_sphere_vote(&mut grid, &(q + random_unit(&mut rng) * r), r).unwrap();
        }
        raw += (find_peak(&grid, false).unwrap().location - q).norm();
        refined += (find_peak(&grid, true).unwrap().location - q).norm();
    }
    assert!(refined < raw, "refined {refined} raw {raw}");
}

#[test]
fn ray_from_far_outside_matches_exhaustive_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..200 {
        let geometry = random_grid(&mut rng, 2.0);
        let centre = geometry.origin + (geometry.max_corner() - geometry.origin) * 0.5;
        let dir = random_unit(&mut rng);
        let point = centre - dir * rng.random_range(60.0..300.0) + random_unit(&mut rng) * rng.random_range(0.0..30.0);
        let mut grid = AccumulatorGrid::new(geometry);
        cast_ray_vote(&mut grid, &point, &dir).unwrap();
        assert_eq!(nonzero(&grid), oracle::ray_voxels(&geometry, &point, &dir), "point {point:?} dir {dir:?}");
    }
}

#[test]
fn ray_through_voxel_corners_skips_touched_voxels() {
    let geometry = GridGeometry::new(Point3::new(-12.0, -12.0, -12.0), 1.0, [24, 24, 24]).unwrap();
    let point = Point3::new(-20.0, -5.0, 6.0);
    let dir = Vector3::new(1.0, 0.4, -0.3).normalize();
    let mut grid = AccumulatorGrid::new(geometry);
    cast_ray_vote(&mut grid, &point, &dir).unwrap();
    assert_eq!(nonzero(&grid), oracle::ray_voxels(&geometry, &point, &dir));

    // main diagonal: only the diagonal voxels have positive length
    let geometry = GridGeometry::new(Point3::origin(), 1.0, [6, 6, 6]).unwrap();
    let mut grid = AccumulatorGrid::new(geometry);
    cast_ray_vote(&mut grid, &Point3::new(-1.0, -1.0, -1.0), &Vector3::repeat(1.0).normalize()).unwrap();
    let diag: Vec<usize> = (0..6).map(|i| i + 6 * i + 36 * i).collect();
    assert_eq!(nonzero(&grid), diag);
}
