//! Pose error from fixed 1.5 mm keypoint perturbations as keypoints are
//! pushed out from 1 to 5 object radii.

use radvote::experiment::{run_experiment, ExperimentKind, ExperimentSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ExperimentSpec {
        kind: ExperimentKind::DispersionSweep,
        trials: 100,
        ..ExperimentSpec::default()
    };
    let out = run_experiment(&spec)?;
    println!("{:<14} {:>5} {:>9} {:>9}", "object", "scale", "ADD", "ADD-s");
    for r in &out.rows {
        println!("{:<14} {:>5} {:>9.3} {:>9.3}", r.object, r.scale, r.add, r.adds);
    }
    Ok(())
}
