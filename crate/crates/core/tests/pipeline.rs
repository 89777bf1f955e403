use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use radvote::experiment::{load_models, random_object_view, ExperimentSpec, KeypointLayout, ObjectModel};
use radvote::icp::{icp_refine, IcpParams};
use radvote::pipeline::{estimate_keypoints, recover_pose, GridBounds, VotingParams};
use radvote::synthetic::{random_rotation, SyntheticObject};
use radvote::vote_map::{generate_gt_maps, scheme_map};
use radvote::{CameraIntrinsics, Point3, PointCloud, RigidTransform, SchemeKind, Vector3};

fn models() -> Vec<ObjectModel> {
    load_models(&ExperimentSpec::default()).unwrap()
}

fn camera() -> CameraIntrinsics {
    CameraIntrinsics::linemod().downsampled(4)
}

fn params(resolution: f64, model: &ObjectModel, kp_radius: f64) -> VotingParams {
    let mut p = ExperimentSpec::default().voting_params(
        resolution,
        GridBounds::Envelope {
            object_radius: model.radius,
            keypoint_radius: kp_radius,
        },
        3,
    );
    p.max_votes = None;
    p
}

#[test]
fn noiseless_offset_votes_land_in_the_keypoint_voxel() {
    for model in models() {
        let kps = model.keypoints(KeypointLayout::Surface, 4, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let view = random_object_view(&model, &kps, &camera(), (600.0, 1000.0), &mut rng).unwrap();
        let maps: Vec<_> = view
            .keypoints
            .iter()
            .map(|k| scheme_map(&view.frame, &view.mask, k, SchemeKind::Offset).unwrap())
            .collect();
        let est = estimate_keypoints(&view.frame, &maps, &params(2.0, &model, model.radius)).unwrap();
        for (e, k) in est.iter().zip(&view.keypoints) {
            // the peak is the centre of the voxel holding the keypoint
            assert!((e.location - k).abs().max() <= 1.0 + 1e-9, "{}: {:?} vs {:?}", model.name, e.location, k);
        }
    }
}

#[test]
fn noiseless_peaks_within_one_voxel_on_average() {
    let res = 2.0;
    for model in models() {
        let kps = model.keypoints(KeypointLayout::Surface, 3, 2.0).unwrap();
        let kp_radius = kps.points().iter().map(|k| k.coords.norm()).fold(0.0, f64::max);
        for scheme in SchemeKind::ALL {
            let mut rng = ChaCha8Rng::seed_from_u64(21);
            let mut errors = Vec::new();
            for _ in 0..4 {
                let view = random_object_view(&model, &kps, &camera(), (600.0, 1000.0), &mut rng).unwrap();
                let maps: Vec<_> = view
                    .keypoints
                    .iter()
                    .map(|k| scheme_map(&view.frame, &view.mask, k, scheme).unwrap())
                    .collect();
                let est = estimate_keypoints(&view.frame, &maps, &params(res, &model, kp_radius)).unwrap();
                errors.extend(est.iter().zip(&view.keypoints).map(|(e, k)| (e.location - k).norm()));
            }
            let mean = errors.iter().sum::<f64>() / errors.len() as f64;
            assert!(mean <= res, "{} {}: mean error {mean}", model.name, scheme.name());
        }
    }
}

#[test]
fn keypoints_are_voted_independently() {
    let model = &models()[2];
    let all = model.keypoints(KeypointLayout::Surface, 8, 2.0).unwrap();
    let three = all.truncated(3).unwrap();
    let pose = RigidTransform::from_rotation(random_rotation(&mut ChaCha8Rng::seed_from_u64(4)), Vector3::new(10.0, -20.0, 800.0));
    let k = camera();
    let r8 = generate_gt_maps(&model.cloud, &pose, &all, &k, SchemeKind::Radial).unwrap();
    let r3 = generate_gt_maps(&model.cloud, &pose, &three, &k, SchemeKind::Radial).unwrap();
    let p = params(2.0, model, model.radius);
    let e8 = estimate_keypoints(&r8.frame, &r8.maps, &p).unwrap();
    let e3 = estimate_keypoints(&r3.frame, &r3.maps, &p).unwrap();
    for (a, b) in e3.iter().zip(&e8) {
        assert_eq!(a.location, b.location);
        assert_eq!(a.count, b.count);
    }
}

#[test]
fn pose_from_exact_keypoints_is_exact() {
    let model = &models()[1];
    let kps = model.keypoints(KeypointLayout::Disperse, 4, 2.0).unwrap();
    let pose = RigidTransform::from_rotation(random_rotation(&mut ChaCha8Rng::seed_from_u64(8)), Vector3::new(-5.0, 3.0, 700.0));
    let cam: Vec<Point3> = kps.points().iter().map(|p| pose.apply(p)).collect();
    let est = recover_pose(&kps, &cam).unwrap();
    let (add, _) = model.pose_error(&pose, &est);
    assert!(add < 1e-9);
}

#[test]
fn icp_pulls_a_perturbed_pose_back() {
    let obj = SyntheticObject::standard_set()[2];
    let model = obj.sample(3.0).unwrap();
    let gt = RigidTransform::from_rotation(random_rotation(&mut ChaCha8Rng::seed_from_u64(9)), Vector3::new(0.0, 0.0, 800.0));
    let scene = PointCloud::new(model.points().iter().step_by(3).map(|p| gt.apply(p)).collect()).unwrap();
    let nudge = RigidTransform::from_axis_angle(Vector3::new(0.3, 1.0, -0.2), 0.03, Vector3::new(2.0, -1.5, 1.0));
    let init = gt.compose(&nudge);
    let res = icp_refine(&model, &scene, &init, &IcpParams::for_resolution(5.0)).unwrap();
    assert!(res.residuals.windows(2).all(|w| w[1] <= w[0]));
    assert!(res.residuals.last().unwrap() < &res.residuals[0]);
    assert!(res.pose.translation_distance_to(&gt) < 0.5, "{}", res.pose.translation_distance_to(&gt));
    assert!(res.pose.rotation_angle_to(&gt) < 0.01);
}
