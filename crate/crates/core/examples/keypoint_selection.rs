//! Surface keypoints by farthest point sampling, bounding-box keypoints and
//! radial dispersion, for each synthetic object.

use radvote::experiment::{load_models, ExperimentSpec, KeypointLayout};
use radvote::keypoints::disperse_keypoints;
use radvote::Point3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ExperimentSpec::default();
    for model in load_models(&spec)? {
        println!("{} (radius {:.1} mm, {} points)", model.name, model.radius, model.cloud.len());
        for layout in [KeypointLayout::Surface, KeypointLayout::Disperse] {
            let kps = model.keypoints(layout, 4, spec.bbox_scale)?;
            let d = kps.mean_distance_to(&Point3::origin()) / model.radius;
            println!("  {:<8} mean distance {d:.2} radii", layout.name());
        }
        let surface = model.keypoints(KeypointLayout::Surface, 4, spec.bbox_scale)?;
        let far = disperse_keypoints(&surface, &Point3::origin(), 3.0, model.radius)?;
        println!("  pushed   mean distance {:.2} radii", far.mean_distance_to(&Point3::origin()) / model.radius);
    }
    Ok(())
}
