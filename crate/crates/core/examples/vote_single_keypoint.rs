//! Radial voting for one keypoint of a rendered bracket, noiseless and noisy.
//!
//! cargo run --release --example vote_single_keypoint

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use radvote::experiment::{load_models, noisy_map, random_object_view, ExperimentSpec, KeypointLayout};
use radvote::noise::RegressorNoise;
use radvote::pipeline::{estimate_keypoint, GridBounds};
use radvote::SchemeKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ExperimentSpec::default();
    let model = load_models(&spec)?.remove(2);
    let kps = model.keypoints(KeypointLayout::Surface, 3, spec.bbox_scale)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let view = random_object_view(&model, &kps, &spec.camera(), (600.0, 1000.0), &mut rng)?;
    println!("{} at {:.0} mm, {} pixels", model.name, view.pose.translation().z, view.mask.iter().filter(|m| **m).count());

    let bounds = GridBounds::Envelope {
        object_radius: model.radius,
        keypoint_radius: model.radius,
    };
    for (label, noise) in [("noiseless", RegressorNoise::default()), ("calibrated", RegressorNoise::calibrated())] {
        let map = noisy_map(&view, 0, SchemeKind::Radial, &noise, 1)?;
        let est = estimate_keypoint(&view.frame, &map, &spec.voting_params(1.0, bounds, 1))?;
        println!(
            "{label:>10}: peak {:?} with {} votes, error {:.2} mm",
            est.location.coords.as_slice().iter().map(|v| format!("{v:.1}")).collect::<Vec<_>>(),
            est.count,
            (est.location - view.keypoints[0]).norm()
        );
    }
    Ok(())
}
