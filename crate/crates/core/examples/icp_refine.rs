//! Voted pose of the bracket on a coarse 8 mm grid, then ICP against the
//! observed points.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use radvote::experiment::{load_models, noisy_map, random_object_view, ExperimentSpec, KeypointLayout};
use radvote::icp::{icp_refine, IcpParams};
use radvote::noise::RegressorNoise;
use radvote::pipeline::{estimate_keypoint, recover_pose, GridBounds};
use radvote::{PointCloud, SchemeKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ExperimentSpec::default();
    let model = load_models(&spec)?.remove(2);
    let kps = model.keypoints(KeypointLayout::Surface, 4, spec.bbox_scale)?;
    let view = random_object_view(&model, &kps, &spec.camera(), (600.0, 1000.0), &mut ChaCha8Rng::seed_from_u64(12))?;
    let bounds = GridBounds::Envelope {
        object_radius: model.radius,
        keypoint_radius: model.radius,
    };
    let noise = RegressorNoise::calibrated();
    let mut estimates = Vec::new();
    for j in 0..kps.len() {
        let map = noisy_map(&view, j, SchemeKind::Radial, &noise, j as u64)?;
        estimates.push(estimate_keypoint(&view.frame, &map, &spec.voting_params(8.0, bounds, j as u64))?.location);
    }
    let voted = recover_pose(&kps, &estimates)?;
    let (add, _) = model.pose_error(&view.pose, &voted);
    println!("voted pose: ADD {add:.3} mm");

    let scene = PointCloud::new(view.frame.masked_points(&view.mask))?;
    let refined = icp_refine(&model.cloud, &scene, &voted, &IcpParams::for_resolution(8.0))?;
    let (add, _) = model.pose_error(&view.pose, &refined.pose);
    println!(
        "after {} ICP iterations: ADD {add:.3} mm, residual {:.3} -> {:.3} mm",
        refined.iterations,
        refined.residuals[0],
        refined.residuals.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}
