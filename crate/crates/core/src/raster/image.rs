use std::path::Path;

use crate::{Error, Result, Rgb, Vec2};

/// RGB image with a separate alpha (coverage) channel. Row 0 is the top.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<Rgb>,
    pub alpha: Vec<f64>,
}

/// A texture in UV space; alpha doubles as the texel mask.
pub type TextureImage = Image;

impl Image {
    pub fn new(width: usize, height: usize, fill: Rgb, alpha: f64) -> Image {
        Image {
            width,
            height,
            rgb: vec![fill; width * height],
            alpha: vec![alpha; width * height],
        }
    }

    pub fn resolution(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.rgb[self.index(x, y)]
    }

    pub fn mask(&self) -> Vec<bool> {
        self.alpha.iter().map(|&a| a > 0.5).collect()
    }

    pub fn same_resolution(&self, other: &Image) -> Result<()> {
        if self.resolution() != other.resolution() {
            return Err(Error::ResolutionMismatch {
                expected: self.resolution(),
                actual: other.resolution(),
            });
        }
        Ok(())
    }

    /// Bilinear sample at continuous pixel coordinates (pixel centers at
    /// `i + 0.5`), clamping to the border.
    pub fn bilinear(&self, px: f64, py: f64) -> Rgb {
        let x = (px - 0.5).clamp(0.0, (self.width - 1) as f64);
        let y = (py - 0.5).clamp(0.0, (self.height - 1) as f64);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let (a, b, c, d) = (self.get(x0, y0), self.get(x1, y0), self.get(x0, y1), self.get(x1, y1));
        std::array::from_fn(|k| {
            let top = a[k] + (b[k] - a[k]) * fx;
            let bottom = c[k] + (d[k] - c[k]) * fx;
            top + (bottom - top) * fy
        })
    }

    /// Bilinear sample at a UV coordinate (`v` up, OBJ convention), clamped to `[0, 1]²`.
    pub fn sample_uv(&self, uv: Vec2) -> Rgb {
        let u = uv.x.clamp(0.0, 1.0);
        let v = uv.y.clamp(0.0, 1.0);
        self.bilinear(u * self.width as f64, (1.0 - v) * self.height as f64)
    }

    pub fn flip_horizontal(&self) -> Image {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                let src = self.index(self.width - 1 - x, y);
                let dst = self.index(x, y);
                out.rgb[dst] = self.rgb[src];
                out.alpha[dst] = self.alpha[src];
            }
        }
        out
    }

    /// Fills texels outside `valid` from their filled 4-neighbors, `passes`
    /// rings deep. Keeps bilinear lookups near chart borders from reading
    /// unrelated gutter colors.
    pub fn dilate(&self, valid: &[bool], passes: usize) -> Image {
        let mut out = self.clone();
        let mut filled = valid.to_vec();
        for _ in 0..passes {
            let prev_rgb = out.rgb.clone();
            let prev = filled.clone();
            for y in 0..self.height {
                for x in 0..self.width {
                    let i = self.index(x, y);
                    if prev[i] {
                        continue;
                    }
                    let mut sum = [0.0; 3];
                    let mut n = 0.0;
                    let nbrs = [
                        (x > 0).then(|| i - 1),
                        (x + 1 < self.width).then(|| i + 1),
                        (y > 0).then(|| i - self.width),
                        (y + 1 < self.height).then(|| i + self.width),
                    ];
                    for j in nbrs.into_iter().flatten() {
                        if prev[j] {
                            for k in 0..3 {
                                sum[k] += prev_rgb[j][k];
                            }
                            n += 1.0;
                        }
                    }
                    if n > 0.0 {
                        out.rgb[i] = sum.map(|s| s / n);
                        filled[i] = true;
                    }
                }
            }
        }
        out
    }

    fn to_rgba8(&self) -> ::image::RgbaImage {
        let q = |v: f64| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        ::image::RgbaImage::from_fn(self.width as u32, self.height as u32, |x, y| {
            let i = self.index(x as usize, y as usize);
            let [r, g, b] = self.rgb[i];
            ::image::Rgba([q(r), q(g), q(b), q(self.alpha[i])])
        })
    }

    /// Writes 8-bit RGBA PNG.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let encoder = ::image::codecs::png::PngEncoder::new(std::io::BufWriter::new(file));
        let rgba = self.to_rgba8();
        ::image::ImageEncoder::write_image(
            encoder,
            rgba.as_raw(),
            self.width as u32,
            self.height as u32,
            ::image::ExtendedColorType::Rgba8,
        )?;
        Ok(())
    }

    pub fn load_png(path: &Path) -> Result<Image> {
        let reader = ::image::ImageReader::open(path).map_err(|e| Error::io(path, e))?;
        let rgba = reader.decode()?.to_rgba8();
        let (w, h) = (rgba.width() as usize, rgba.height() as usize);
        let mut img = Image::new(w, h, [0.0; 3], 1.0);
        for (x, y, p) in rgba.enumerate_pixels() {
            let i = img.index(x as usize, y as usize);
            img.rgb[i] = [p[0], p[1], p[2]].map(|c| f64::from(c) / 255.0);
            img.alpha[i] = f64::from(p[3]) / 255.0;
        }
        Ok(img)
    }
}
