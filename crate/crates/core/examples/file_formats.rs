//! Writes and reads back every file format: PLY model, 16-bit depth PNG,
//! pose list and accumulator blob.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use radvote::accumulator::{cast_sphere_vote, AccumulatorGrid, GridGeometry};
use radvote::experiment::{load_models, random_object_view, ExperimentSpec, KeypointLayout};
use radvote::io::{self, DepthImage, PlyFormat, PoseRecord};
use radvote::Point3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("radvote_file_formats");
    std::fs::create_dir_all(&dir)?;
    let spec = ExperimentSpec::default();
    let model = load_models(&spec)?.remove(1);

    let ply = dir.join("box.ply");
    io::save_ply(&ply, &model.cloud, PlyFormat::BinaryLittleEndian)?;
    let back = io::load_ply(&ply, 1.0)?;
    println!("{}: {} points, radius {:.2} mm", ply.display(), back.len(), back.radius());

    let kps = model.keypoints(KeypointLayout::Surface, 3, 2.0)?;
    let view = random_object_view(&model, &kps, &spec.camera(), (600.0, 1000.0), &mut ChaCha8Rng::seed_from_u64(5))?;
    let image = DepthImage {
        width: view.frame.width(),
        height: view.frame.height(),
        depth: view.frame.depth().iter().map(|d| d.round()).collect(),
    };
    let png = dir.join("depth.png");
    io::save_depth_png16(&png, &image, 1.0)?;
    let depth = io::load_depth_png16(&png, 1.0)?;
    println!("{}: {}x{}, {} valid pixels", png.display(), depth.width, depth.height, depth.depth.iter().filter(|d| **d > 0.0).count());

    let poses = dir.join("poses.txt");
    io::save_poses(&poses, &[PoseRecord { object_id: "box".into(), pose: view.pose }])?;
    println!("{}: {:?}", poses.display(), io::load_poses(&poses)?[0].pose.translation().as_slice());

    let mut grid = AccumulatorGrid::new(GridGeometry::new(Point3::new(-8.0, -8.0, -8.0), 1.0, [16, 16, 16])?);
    cast_sphere_vote(&mut grid, &Point3::origin(), 6.0)?;
    let blob = dir.join("grid.rvag");
    let mut f = std::fs::File::create(&blob)?;
    io::write_grid_blob(&mut f, &grid)?;
    let read = io::read_grid_blob(&std::fs::read(&blob)?)?;
    println!("{}: {} votes, equal {}", blob.display(), read.total(), read.counts() == grid.counts());
    Ok(())
}
