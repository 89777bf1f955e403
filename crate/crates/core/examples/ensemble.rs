//! Summed accumulators of several schemes against each scheme alone.

use radvote::experiment::{run_experiment, ExperimentKind, ExperimentSpec, KeypointLayout};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = ExperimentSpec {
        kind: ExperimentKind::Ensemble,
        resolutions: vec![2.0],
        layouts: vec![KeypointLayout::Surface],
        trials: 10,
        record_timing: false,
        ..ExperimentSpec::default()
    };
    print!("{}", run_experiment(&spec)?.summary());
    Ok(())
}
