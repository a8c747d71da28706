//! Prints the default scaled-linear schedule next to its zero terminal-SNR
//! rescaling, then checks the v-prediction round trip at a few timesteps.
//!
//! ```text
//! cargo run --example zero_snr_schedule
//! ```

use toonforge::schedmath::{add_noise, default_schedule, rescale_zero_terminal_snr, v_target, v_to_x0, LatentSample};

fn main() -> toonforge::Result<()> {
    let base = default_schedule();
    let zsnr = rescale_zero_terminal_snr(&base)?;

    println!("{:>5} {:>14} {:>14}", "t", "sqrt_ab", "sqrt_ab zsnr");
    for t in [0, 1, 100, 500, 900, 998, 999] {
        println!("{t:>5} {:>14.8} {:>14.8}", base.sqrt_alpha_bars[t], zsnr.sqrt_alpha_bars[t]);
    }

    let x0 = LatentSample::new((0..16).map(|i| (i as f64 * 0.37).sin()).collect(), vec![4, 4])?;
    let eps = LatentSample::new((0..16).map(|i| (i as f64 * 1.3).cos()).collect(), vec![4, 4])?;
    for t in [0, 500, 999] {
        let xt = add_noise(&x0, &eps, t, &zsnr)?;
        let v = v_target(&x0, &eps, t, &zsnr)?;
        let back = v_to_x0(&v, &xt, t, &zsnr)?;
        let err = back.values.iter().zip(&x0.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        println!("t={t}: max |x0 - v_to_x0(v, x_t)| = {err:.2e}");
    }
    Ok(())
}
