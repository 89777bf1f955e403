//! Keypoint error, voting time and accumulator memory over voxel sizes,
//! radial voting on the sphere shell.
//!
//! cargo run --release --example resolution_sweep -- [trials]

use radvote::experiment::{run_experiment, ExperimentKind, ExperimentSpec, KeypointLayout};
use radvote::synthetic::SyntheticObject;
use radvote::SchemeKind;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trials = std::env::args().nth(1).map_or(Ok(3), |s| s.parse())?;
    let spec = ExperimentSpec {
        kind: ExperimentKind::ResolutionSweep,
        schemes: vec![SchemeKind::Radial],
        resolutions: vec![1.0, 2.0, 4.0, 5.0, 8.0, 16.0],
        objects: vec![SyntheticObject::standard_set()[0]],
        layouts: vec![KeypointLayout::Surface],
        trials,
        ..ExperimentSpec::default()
    };
    let out = run_experiment(&spec)?;
    println!("{:>5} {:>9} {:>10} {:>10}", "rho", "mu (mm)", "vote (ms)", "mem (MB)");
    for r in &out.rows {
        println!("{:>5} {:>9.3} {:>10.1} {:>10.2}", r.resolution, r.kp_error_mean, r.wall_ms, r.mem_bytes as f64 / 1e6);
    }
    Ok(())
}
