//! Sphere and ray votes on a small grid, checked against brute force,
//! with the middle z slice of the sphere printed.

use radvote::accumulator::{cast_ray_vote, cast_sphere_vote, AccumulatorGrid, GridGeometry};
use radvote::oracle;
use radvote::{Point3, Vector3};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = GridGeometry::new(Point3::new(-12.0, -12.0, -12.0), 1.0, [24, 24, 24])?;
    let center = Point3::new(0.3, -0.2, 0.1);

    let mut grid = AccumulatorGrid::new(g);
    let n = cast_sphere_vote(&mut grid, &center, 9.4)?;
    let hits: Vec<usize> = (0..g.voxel_count()).filter(|&i| grid.counts()[i] > 0).collect();
    println!("sphere r 9.4: {n} voxels, oracle agrees: {}", hits == oracle::sphere_voxels(&g, &center, 9.4));
    for y in (0..24).rev() {
        let row: String = (0..24).map(|x| if grid.count([x, y, 12]) > 0 { '#' } else { '.' }).collect();
        println!("  {row}");
    }

    let mut grid = AccumulatorGrid::new(g);
    let dir = Vector3::new(1.0, 0.4, -0.3).normalize();
    let n = cast_ray_vote(&mut grid, &Point3::new(-20.0, -5.0, 6.0), &dir)?;
    let hits: Vec<usize> = (0..g.voxel_count()).filter(|&i| grid.counts()[i] > 0).collect();
    println!("ray: {n} voxels, oracle agrees: {}", hits == oracle::ray_voxels(&g, &Point3::new(-20.0, -5.0, 6.0), &dir));
    Ok(())
}
