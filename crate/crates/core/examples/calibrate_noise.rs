//! Scheme comparison at 1 mm under one noise setting.
//!
//! cargo run --release --example calibrate_noise -- <sigma> [dimension_exponent] [trials] [max_votes]

use radvote::experiment::{run_experiment, ExperimentKind, ExperimentSpec, VotingConfig};
use radvote::noise::RegressorNoise;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let sigma: f64 = args.first().map_or(Ok(2.0), |s| s.parse())?;
    let exponent: f64 = args.get(1).map_or(Ok(0.0), |s| s.parse())?;
    let trials: usize = args.get(2).map_or(Ok(20), |s| s.parse())?;
    let max_votes: usize = args.get(3).map_or(Ok(300), |s| s.parse())?;
    let spec = ExperimentSpec {
        kind: ExperimentKind::SchemeComparison,
        resolutions: vec![1.0],
        trials,
        noise: RegressorNoise {
            sigma,
            dimension_exponent: exponent,
            ..RegressorNoise::default()
        },
        record_timing: false,
        voting: VotingConfig {
            max_votes,
            ..VotingConfig::default()
        },
        ..ExperimentSpec::default()
    };
    let t = std::time::Instant::now();
    let out = run_experiment(&spec)?;
    print!("{}", out.summary());
    eprintln!("{:.1} s", t.elapsed().as_secs_f64());
    Ok(())
}
