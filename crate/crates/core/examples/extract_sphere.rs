//! Samples an analytic sphere into an SDF grid, extracts the zero level set
//! with marching tetrahedra and reports how close the vertices land.
//!
//! ```text
//! cargo run --release --example extract_sphere -- [resolution] [out.obj]
//! ```

use toonforge::geometry::obj::write_obj;
use toonforge::isosurface::{marching_tetrahedra, sample_grid, scene};
use toonforge::Vec3;

fn main() -> toonforge::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map(|s| s.parse().expect("resolution")).unwrap_or(64);
    let radius = 0.3;

    let grid = sample_grid(&scene::sphere_fixture(radius), [n; 3], Vec3::repeat(-0.5), 1.0 / (n - 1) as f64)?;
    let mesh = marching_tetrahedra(&grid);
    let worst = mesh.positions.iter().map(|p| (p.norm() - radius).abs()).fold(0.0, f64::max);

    println!("grid {n}^3, spacing {:.5}", grid.spacing);
    println!("{} vertices, {} triangles", mesh.positions.len(), mesh.triangles.len());
    println!("max |r - {radius}| = {worst:.6}");

    if let Some(path) = args.next() {
        write_obj(path.as_ref(), &mesh, None)?;
        println!("wrote {path}");
    }
    Ok(())
}
