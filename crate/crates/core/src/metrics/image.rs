use serde::Serialize;

use crate::numeric::pairwise_sum;
use crate::raster::Image;
use crate::{Error, Result, Rgb};

pub const SSIM_C1: f64 = 1e-4; // (0.01 * 1)^2
pub const SSIM_C2: f64 = 9e-4; // (0.03 * 1)^2
const WINDOW: usize = 11;
const SIGMA: f64 = 1.5;

/// Rec. 601 luma.
pub fn luma(c: &Rgb) -> f64 {
    0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]
}

fn gaussian_window() -> [f64; WINDOW] {
    let mut w = [0.0; WINDOW];
    let half = (WINDOW / 2) as f64;
    for (i, v) in w.iter_mut().enumerate() {
        let d = i as f64 - half;
        *v = (-d * d / (2.0 * SIGMA * SIGMA)).exp();
    }
    let s: f64 = w.iter().sum();
    w.map(|v| v / s)
}

/// Separable "valid" Gaussian filter: output is `(w - 10) x (h - 10)`.
fn filter(src: &[f64], w: usize, h: usize, k: &[f64; WINDOW]) -> Vec<f64> {
    let ow = w - WINDOW + 1;
    let oh = h - WINDOW + 1;
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            rows[y * ow + x] = (0..WINDOW).map(|i| k[i] * src[y * w + x + i]).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = (0..WINDOW).map(|i| k[i] * rows[(y + i) * ow + x]).sum();
        }
    }
    out
}

/// Mean SSIM over all fully contained 11x11 Gaussian windows (sigma 1.5) of
/// the luma channel, dynamic range 1.
pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    a.same_resolution(b)?;
    let (w, h) = a.resolution();
    if w < WINDOW || h < WINDOW {
        return Err(Error::InvalidParameter(format!("SSIM needs at least {WINDOW}x{WINDOW} pixels, got {w}x{h}")));
    }
    if a.rgb == b.rgb {
        return Ok(1.0);
    }
    let k = gaussian_window();
    let ya: Vec<f64> = a.rgb.iter().map(luma).collect();
    let yb: Vec<f64> = b.rgb.iter().map(luma).collect();
    let prod = |p: &[f64], q: &[f64]| -> Vec<f64> { p.iter().zip(q).map(|(x, y)| x * y).collect() };
    let mu_a = filter(&ya, w, h, &k);
    let mu_b = filter(&yb, w, h, &k);
    let aa = filter(&prod(&ya, &ya), w, h, &k);
    let bb = filter(&prod(&yb, &yb), w, h, &k);
    let ab = filter(&prod(&ya, &yb), w, h, &k);
    let map: Vec<f64> = (0..mu_a.len())
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = aa[i] - ma * ma;
            let vb = bb[i] - mb * mb;
            let cov = ab[i] - ma * mb;
            ((2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2)) / ((ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2))
        })
        .collect();
    Ok(pairwise_sum(&map) / map.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsnrMse {
    /// `+inf` for identical inputs.
    pub psnr: f64,
    pub mse: f64,
}

/// MSE over all channels of the (masked) pixels, and PSNR for range-1 images.
pub fn psnr_mse(a: &Image, b: &Image, mask: Option<&[bool]>) -> Result<PsnrMse> {
    a.same_resolution(b)?;
    if let Some(m) = mask {
        if m.len() != a.rgb.len() {
            return Err(Error::InvalidParameter("mask size does not match image".into()));
        }
    }
    let sq: Vec<f64> = (0..a.rgb.len())
        .filter(|&i| mask.is_none_or(|m| m[i]))
        .flat_map(|i| (0..3).map(move |c| (a.rgb[i][c] - b.rgb[i][c]).powi(2)))
        .collect();
    if sq.is_empty() {
        return Err(Error::InvalidParameter("empty mask".into()));
    }
    let mse = pairwise_sum(&sq) / sq.len() as f64;
    let psnr = if mse == 0.0 { f64::INFINITY } else { -10.0 * mse.log10() };
    Ok(PsnrMse { psnr, mse })
}

/// Mean binary cross-entropy of predicted coverage against a binary mask.
pub fn mask_bce(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::ShapeMismatch(vec![pred.len()], vec![truth.len()]));
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    let terms: Vec<f64> = pred
        .iter()
        .zip(truth)
        .map(|(&p, &y)| {
            let p = p.clamp(1e-7, 1.0 - 1e-7);
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        })
        .collect();
    Ok(pairwise_sum(&terms) / terms.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReconLoss {
    pub total: f64,
    /// Set when no perceptual term was supplied and it counted as 0.
    pub lpips_omitted: bool,
}

/// `mse + 0.1 * bce + 0.5 * lpips`.
pub fn recon_loss(mse: f64, bce: f64, lpips: Option<f64>) -> ReconLoss {
    ReconLoss {
        total: mse + 0.1 * bce + 0.5 * lpips.unwrap_or(0.0),
        lpips_omitted: lpips.is_none(),
    }
}
