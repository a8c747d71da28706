//! Geometry and image metrics on small examples: Chamfer distance between a
//! sphere and a capsule, and SSIM/PSNR of a blurred image.
//!
//! ```text
//! cargo run --release --example chamfer_and_ssim
//! ```

use toonforge::isosurface::{marching_tetrahedra, sample_grid, scene};
use toonforge::metrics::{chamfer_distance, psnr_mse, ssim};
use toonforge::raster::Image;
use toonforge::Vec3;

fn extract(scene: &scene::AnalyticScene) -> toonforge::Result<toonforge::geometry::Mesh> {
    let n = 48;
    let grid = sample_grid(scene, [n; 3], Vec3::repeat(-0.5), 1.0 / (n - 1) as f64)?;
    Ok(marching_tetrahedra(&grid))
}

fn main() -> toonforge::Result<()> {
    let a = extract(&scene::sphere_fixture(0.3))?;
    let b = extract(&scene::sphere_fixture(0.4))?;
    let c = extract(&scene::capsule_fixture())?;
    // Meshes are normalized to the unit box first, so only shape differences count.
    println!("CD(sphere, sphere)        = {:.3e}", chamfer_distance(&a, &a, 20_000, 1)?);
    println!("CD(sphere, larger sphere) = {:.3e}", chamfer_distance(&a, &b, 20_000, 1)?);
    println!("CD(sphere, capsule)       = {:.3e}", chamfer_distance(&a, &c, 20_000, 1)?);

    let n = 64;
    let mut img = Image::new(n, n, [0.0; 3], 1.0);
    for y in 0..n {
        for x in 0..n {
            let i = img.index(x, y);
            let v = if (x / 4 + y / 4) % 2 == 0 { 0.9 } else { 0.1 };
            img.rgb[i] = [v, v * 0.5, 1.0 - v];
        }
    }
    let mut blurred = img.clone();
    for y in 1..n - 1 {
        for x in 1..n - 1 {
            let i = img.index(x, y);
            for c in 0..3 {
                blurred.rgb[i][c] = (img.get(x - 1, y)[c] + img.get(x + 1, y)[c] + img.get(x, y - 1)[c] + img.get(x, y + 1)[c]
                    + 4.0 * img.rgb[i][c])
                    / 8.0;
            }
        }
    }
    let pm = psnr_mse(&img, &blurred, None)?;
    println!("SSIM(img, img)     = {:.4}", ssim(&img, &img)?);
    println!("SSIM(img, blurred) = {:.4}", ssim(&img, &blurred)?);
    println!("PSNR(img, blurred) = {:.2} dB (MSE {:.4})", pm.psnr, pm.mse);
    Ok(())
}
