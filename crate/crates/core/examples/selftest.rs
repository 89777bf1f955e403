//! Runs the built-in oracle suites, then again with a broken sphere
//! rasteriser to show that the suite catches it.

use radvote::selftest::{run_selftest, SelftestOptions};

fn main() {
    for opts in [
        SelftestOptions::default(),
        SelftestOptions {
            sphere_half_extent: 0.3,
            ..SelftestOptions::default()
        },
    ] {
        println!("half extent {}", opts.sphere_half_extent);
        for r in run_selftest(&opts) {
            println!("  {r}");
        }
    }
}
