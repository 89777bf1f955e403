//! All four voting schemes on the same maps and noise, surface and
//! disperse keypoints, at 1 mm voxels. Writes the rows as CSV to stdout
//! with `--csv`.

use radvote::experiment::{run_experiment, ExperimentSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let csv = std::env::args().any(|a| a == "--csv");
    let spec = ExperimentSpec {
        trials: 20,
        record_timing: false,
        ..ExperimentSpec::default()
    };
    let out = run_experiment(&spec)?;
    if csv {
        radvote::io::write_rows(&mut std::io::stdout(), &out.rows)?;
    } else {
        print!("{}", out.summary());
    }
    Ok(())
}
