//! Closed-form pose from four corresponded keypoints, exact and perturbed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use radvote::horn::{horn_solve, rms_residual};
use radvote::synthetic::{random_rotation, random_unit};
use radvote::{Point3, RigidTransform, Vector3};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let object = [
        Point3::new(60.0, 0.0, 0.0),
        Point3::new(0.0, 45.0, 10.0),
        Point3::new(-30.0, -20.0, 40.0),
        Point3::new(5.0, 5.0, -50.0),
    ];
    let truth = RigidTransform::from_rotation(random_rotation(&mut rng), Vector3::new(20.0, -10.0, 750.0));
    let camera: Vec<Point3> = object.iter().map(|p| truth.apply(p)).collect();

    let est = horn_solve(&object, &camera)?;
    println!("exact: residual {:.2e} mm, rotation off {:.2e} rad", rms_residual(&est, &object, &camera), est.rotation_angle_to(&truth));

    // 1.5 mm errors on every keypoint
    let noisy: Vec<Point3> = camera.iter().map(|p| p + random_unit(&mut rng) * 1.5).collect();
    let est = horn_solve(&object, &noisy)?;
    println!(
        "1.5 mm noise: translation off {:.3} mm, rotation off {:.4} rad",
        est.translation_distance_to(&truth),
        est.rotation_angle_to(&truth)
    );
    Ok(())
}
