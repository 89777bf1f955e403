use proptest::prelude::*;

use radvote::accumulator::{cast_sphere_vote, merge_grids, AccumulatorGrid, GridGeometry};
use radvote::geometry::backproject;
use radvote::horn::{horn_solve, rms_residual};
use radvote::keypoints::{disperse_keypoints, fps_indices, KeypointSet, SelectionMethod};
use radvote::metrics::{accuracy_at_threshold, add_metric, adds_metric, auc_metric};
use radvote::scheme::{compute_scheme_value, polar_to_unit, unit_to_polar};
use radvote::{CameraIntrinsics, Pixel, Point3, PointCloud, RigidTransform, SchemeKind, Vector3};

fn point(range: f64) -> impl Strategy<Value = Point3> {
    (-range..range, -range..range, -range..range).prop_map(|(x, y, z)| Point3::new(x, y, z))
}

fn pose() -> impl Strategy<Value = RigidTransform> {
    (point(1.0), 0.0..std::f64::consts::PI, point(500.0)).prop_filter_map("axis", |(a, angle, t)| {
        (a.coords.norm() > 1e-3).then(|| RigidTransform::from_axis_angle(a.coords, angle, t.coords))
    })
}

fn grids(n: usize) -> impl Strategy<Value = Vec<AccumulatorGrid>> {
    let g = GridGeometry::new(Point3::origin(), 1.0, [4, 3, 5]).unwrap();
    prop::collection::vec(prop::collection::vec(0u32..1000, 60), n)
        .prop_map(move |cs| cs.into_iter().map(|c| AccumulatorGrid::from_counts(g, c).unwrap()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn merge_is_commutative_and_associative(gs in grids(3)) {
        let ab = merge_grids(&[gs[0].clone(), gs[1].clone()]).unwrap();
        let ba = merge_grids(&[gs[1].clone(), gs[0].clone()]).unwrap();
        prop_assert_eq!(ab.counts(), ba.counts());
        let ab_c = merge_grids(&[ab, gs[2].clone()]).unwrap();
        let bc = merge_grids(&[gs[1].clone(), gs[2].clone()]).unwrap();
        let a_bc = merge_grids(&[gs[0].clone(), bc]).unwrap();
        prop_assert_eq!(ab_c.counts(), a_bc.counts());
        prop_assert_eq!(ab_c.total(), gs.iter().map(|g| g.total()).sum::<u64>());
    }

    #[test]
    fn sphere_votes_each_voxel_at_most_once(c in point(10.0), r in 0.1f64..12.0) {
        let g = GridGeometry::new(Point3::new(-16.0, -16.0, -16.0), 1.0, [32, 32, 32]).unwrap();
        let mut grid = AccumulatorGrid::new(g);
        let n = cast_sphere_vote(&mut grid, &c, r).unwrap();
        prop_assert!(grid.counts().iter().all(|c| *c <= 1));
        prop_assert_eq!(n, grid.total());
    }

    #[test]
    fn adds_never_exceeds_add(pts in prop::collection::vec(point(100.0), 1..60), gt in pose(), est in pose()) {
        let model = PointCloud::new(pts).unwrap();
        prop_assert!(adds_metric(&model, &gt, &est) <= add_metric(&model, &gt, &est) + 1e-9);
        prop_assert!(add_metric(&model, &gt, &gt) < 1e-9);
    }

    #[test]
    fn accuracy_and_auc_lie_in_unit_interval(values in prop::collection::vec(0.0f64..300.0, 1..50)) {
        let acc = accuracy_at_threshold(&values, 80.0, 0.1).unwrap();
        let auc = auc_metric(&values, 100.0).unwrap();
        prop_assert!((0.0..=1.0).contains(&acc));
        prop_assert!((0.0..=1.0).contains(&auc));
    }

    #[test]
    fn horn_recovers_noiseless_transforms(src in prop::collection::vec(point(200.0), 4..20), t in pose()) {
        let dst: Vec<Point3> = src.iter().map(|p| t.apply(p)).collect();
        if let Ok(est) = horn_solve(&src, &dst) {
            prop_assert!(rms_residual(&est, &src, &dst) < 1e-7);
        }
    }

    #[test]
    fn polar_round_trip(v in point(1.0)) {
        prop_assume!(v.coords.norm() > 1e-3);
        let u = v.coords.normalize();
        let (phi, psi) = unit_to_polar(&u);
        prop_assert!((0.0..=std::f64::consts::PI).contains(&phi));
        prop_assert!((polar_to_unit(phi, psi) - u).norm() < 1e-9);
    }

    #[test]
    fn scheme_values_reconstruct_keypoint(p in point(300.0), k in point(300.0)) {
        prop_assume!((p - k).norm() > 1e-6);
        let off = compute_scheme_value(SchemeKind::Offset, &p, &k).unwrap();
        let o = off.as_slice();
        prop_assert!((p - Vector3::new(o[0], o[1], o[2]) - k).norm() < 1e-9);
        let rad = compute_scheme_value(SchemeKind::Radial, &p, &k).unwrap();
        prop_assert!((rad.as_slice()[0] - (p - k).norm()).abs() < 1e-9);
        let vec = compute_scheme_value(SchemeKind::Vector, &p, &k).unwrap();
        let v = Vector3::from_column_slice(vec.as_slice());
        prop_assert!((v.norm() - 1.0).abs() < 1e-9);
        prop_assert!((v - (p - k).normalize()).norm() < 1e-9);
    }

    #[test]
    fn backprojection_inverts_projection(u in 0u32..640, v in 0u32..480, d in 300.0f64..2000.0) {
        let k = CameraIntrinsics::linemod();
        let p = backproject(Pixel::new(u, v, d), &k).unwrap();
        prop_assert!((p.z - d).abs() < 1e-9);
        prop_assert_eq!(k.project_to_pixel(&p), Some((u, v)));
    }

    #[test]
    fn fps_is_distinct_and_deterministic(pts in prop::collection::vec(point(100.0), 8..80), k in 1usize..8) {
        let a = fps_indices(&pts, k, 0).unwrap();
        prop_assert_eq!(&a, &fps_indices(&pts, k, 0).unwrap());
        let mut s = a.clone();
        s.sort();
        s.dedup();
        prop_assert_eq!(s.len(), a.len());
    }

    #[test]
    fn dispersion_commutes_with_translation(
        pts in prop::collection::vec(point(50.0), 3..8),
        shift in point(500.0),
        scale in 0.5f64..5.0,
    ) {
        prop_assume!(pts.iter().all(|p| p.coords.norm() > 1e-3));
        let kps = KeypointSet::new(pts.clone(), SelectionMethod::Fps, 1.0);
        prop_assume!(kps.is_ok());
        let kps = kps.unwrap();
        let moved = KeypointSet::new(pts.iter().map(|p| p + shift.coords).collect(), SelectionMethod::Fps, 1.0).unwrap();
        let a = disperse_keypoints(&kps, &Point3::origin(), scale, 40.0).unwrap();
        let b = disperse_keypoints(&moved, &shift, scale, 40.0).unwrap();
        for (p, q) in a.points().iter().zip(b.points()) {
            prop_assert!((p + shift.coords - q).norm() < 1e-9);
            prop_assert!((p.coords.norm() - scale * 40.0).abs() < 1e-9);
        }
    }
}
