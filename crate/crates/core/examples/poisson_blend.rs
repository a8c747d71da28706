//! Pastes a checkerboard patch into a flat texture two ways: copied verbatim
//! and Poisson blended, then compares the seam along the patch border.
//!
//! ```text
//! cargo run --release --example poisson_blend -- [out_dir]
//! ```

use std::path::PathBuf;

use toonforge::blend::{blend_texture, SolverParams};
use toonforge::raster::Image;
use toonforge::texproject::TexelMaps;

const RES: usize = 128;

fn seam(img: &Image, mask: &[bool]) -> f64 {
    // Largest jump across a mask edge.
    let mut worst: f64 = 0.0;
    for y in 0..RES {
        for x in 0..RES - 1 {
            let (a, b) = (img.index(x, y), img.index(x + 1, y));
            if mask[a] != mask[b] {
                let d = (0..3).map(|c| (img.rgb[a][c] - img.rgb[b][c]).abs()).fold(0.0, f64::max);
                worst = worst.max(d);
            }
        }
    }
    worst
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "poisson_blend_out".into()));
    std::fs::create_dir_all(&out)?;

    let coarse = Image::new(RES, RES, [0.2, 0.4, 0.8], 1.0);
    let mut projected = Image::new(RES, RES, [0.0; 3], 1.0);
    let mut mask = vec![false; RES * RES];
    for y in 32..96 {
        for x in 32..96 {
            let i = projected.index(x, y);
            let on = ((x / 8) + (y / 8)) % 2 == 0;
            projected.rgb[i] = if on { [0.9, 0.8, 0.3] } else { [0.7, 0.6, 0.1] };
            mask[i] = true;
        }
    }

    let mut texels = TexelMaps::empty(RES);
    texels.valid.iter_mut().for_each(|v| *v = true);
    texels.chart.iter_mut().for_each(|c| *c = 0);

    let mut pasted = coarse.clone();
    for (i, &m) in mask.iter().enumerate() {
        if m {
            pasted.rgb[i] = projected.rgb[i];
        }
    }
    let (blended, stats) = blend_texture(&projected, &mask, &coarse, &texels, SolverParams::default())?;

    println!("interior texels {}", stats.interior);
    println!("CG iterations   {:?}", stats.iterations);
    println!("seam, pasted    {:.4}", seam(&pasted, &mask));
    println!("seam, blended   {:.4}", seam(&blended, &mask));
    pasted.save_png(&out.join("pasted.png"))?;
    blended.save_png(&out.join("blended.png"))?;
    Ok(())
}
