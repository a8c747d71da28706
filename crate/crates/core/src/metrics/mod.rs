//! Evaluation metrics: surface sampling and Chamfer distance, SSIM, PSNR/MSE,
//! mask binary cross-entropy and the weighted reconstruction loss.

mod chamfer;
mod image;

pub use chamfer::{
    brute_force_nearest_sq, chamfer_between_clouds, chamfer_distance, chamfer_distance_seeded, sample_surface,
    NearestGrid, PointCloudSample,
};
pub use image::{luma, mask_bce, psnr_mse, recon_loss, ssim, PsnrMse, ReconLoss, SSIM_C1, SSIM_C2};
