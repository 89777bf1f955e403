//! Pose accuracy from the first 3, 4 and 8 radially voted keypoints.

use radvote::experiment::{run_experiment, ExperimentKind, ExperimentSpec};
use radvote::SchemeKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ExperimentSpec {
        kind: ExperimentKind::KeypointCount,
        schemes: vec![SchemeKind::Radial],
        resolutions: vec![2.0],
        keypoints: vec![3, 4, 8],
        trials: 20,
        record_timing: false,
        ..ExperimentSpec::default()
    };
    print!("{}", run_experiment(&spec)?.summary());
    Ok(())
}
