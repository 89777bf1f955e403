//! ADD, ADD-s, accuracy and AUC for a handful of perturbed poses of the
//! sphere shell, where ADD-s forgives rotations about the centre.

use radvote::experiment::{load_models, ExperimentSpec};
use radvote::metrics::{accuracy_at_threshold, add_metric, adds_metric, auc_metric};
use radvote::{RigidTransform, Vector3};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = load_models(&ExperimentSpec::default())?.remove(0);
    let gt = RigidTransform::from_translation(Vector3::new(0.0, 0.0, 800.0));
    let mut adds = Vec::new();
    println!("{:>8} {:>8} {:>9} {:>9}", "angle", "shift", "ADD", "ADD-s");
    for (angle, shift) in [(0.0, 0.0), (0.1, 0.0), (0.5, 0.0), (0.0, 3.0), (0.2, 8.0)] {
        let delta = RigidTransform::from_axis_angle(Vector3::z(), angle, Vector3::new(shift, 0.0, 0.0));
        let est = gt.compose(&delta);
        let a = add_metric(&model.eval, &gt, &est);
        let s = adds_metric(&model.eval, &gt, &est);
        println!("{angle:>8} {shift:>8} {a:>9.3} {s:>9.3}");
        adds.push(s);
    }
    println!("ADD-s accuracy at 10% radius: {:.2}", accuracy_at_threshold(&adds, model.radius, 0.1)?);
    println!("ADD-s AUC over 0-100 mm: {:.4}", auc_metric(&adds, 100.0)?);
    Ok(())
}
