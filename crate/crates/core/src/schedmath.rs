//! Diffusion noise-schedule arithmetic: the scaled-linear beta schedule, zero
//! terminal-SNR rescaling, forward noising and the v-parameterization.
//!
//! With `v = sqrt(ab) * eps - sqrt(1 - ab) * x0` and
//! `x_t = sqrt(ab) * x0 + sqrt(1 - ab) * eps`, the pair `(x_t, v)` is a
//! rotation of `(x0, eps)`, so both directions are closed-form.

use std::fmt::Write as _;

use crate::numeric::pairwise_sum;
use crate::{Error, Result};

pub const DEFAULT_STEPS: usize = 1000;
pub const DEFAULT_BETA_START: f64 = 0.00085;
pub const DEFAULT_BETA_END: f64 = 0.012;

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSchedule {
    pub betas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub alpha_bars: Vec<f64>,
    /// Stored directly rather than as `alpha_bars.sqrt()` so a zero terminal
    /// value stays exactly zero.
    pub sqrt_alpha_bars: Vec<f64>,
}

impl DiffusionSchedule {
    pub fn len(&self) -> usize {
        self.betas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.betas.is_empty()
    }

    fn from_betas(betas: Vec<f64>) -> DiffusionSchedule {
        let alphas: Vec<f64> = betas.iter().map(|b| 1.0 - b).collect();
        let mut alpha_bars = Vec::with_capacity(alphas.len());
        let mut acc = 1.0;
        for a in &alphas {
            acc *= a;
            alpha_bars.push(acc);
        }
        let sqrt_alpha_bars = alpha_bars.iter().map(|a| a.sqrt()).collect();
        DiffusionSchedule {
            betas,
            alphas,
            alpha_bars,
            sqrt_alpha_bars,
        }
    }

    /// Signal-to-noise ratio `ab / (1 - ab)` at step `t`.
    pub fn snr(&self, t: usize) -> f64 {
        let ab = self.alpha_bars[t];
        ab / (1.0 - ab)
    }

    fn coefficients(&self, t: usize) -> Result<(f64, f64)> {
        if t >= self.len() {
            return Err(Error::InvalidParameter(format!("timestep {t} outside 0..{}", self.len())));
        }
        let s = self.sqrt_alpha_bars[t];
        Ok((s, (1.0 - self.alpha_bars[t]).max(0.0).sqrt()))
    }

    /// `t,beta,alpha_bar,snr` table, one row per step.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,beta,alpha_bar,snr\n");
        for t in 0..self.len() {
            let _ = writeln!(out, "{t},{},{},{}", self.betas[t], self.alpha_bars[t], self.snr(t));
        }
        out
    }
}

/// Betas linear in `sqrt(beta)` between `beta_start` and `beta_end`; the
/// endpoints are taken verbatim.
pub fn linear_beta_schedule(steps: usize, beta_start: f64, beta_end: f64) -> Result<DiffusionSchedule> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!("schedule needs at least 2 steps, got {steps}")));
    }
    if !(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "betas must satisfy 0 < start <= end < 1, got {beta_start} and {beta_end}"
        )));
    }
    let (r0, r1) = (beta_start.sqrt(), beta_end.sqrt());
    let last = steps - 1;
    let betas = (0..steps)
        .map(|t| match t {
            0 => beta_start,
            t if t == last => beta_end,
            t => {
                let r = r0 + t as f64 / last as f64 * (r1 - r0);
                r * r
            }
        })
        .collect();
    Ok(DiffusionSchedule::from_betas(betas))
}

pub fn default_schedule() -> DiffusionSchedule {
    linear_beta_schedule(DEFAULT_STEPS, DEFAULT_BETA_START, DEFAULT_BETA_END).expect("defaults are valid")
}

/// Shifts and scales `sqrt(alpha_bar)` so the last step has zero SNR while the
/// first step keeps its value, then re-derives alphas and betas.
pub fn rescale_zero_terminal_snr(schedule: &DiffusionSchedule) -> Result<DiffusionSchedule> {
    let n = schedule.len();
    if n < 2 {
        return Err(Error::DegenerateSchedule);
    }
    let s0 = schedule.sqrt_alpha_bars[0];
    let s_last = schedule.sqrt_alpha_bars[n - 1];
    if !(s0 - s_last > 0.0) {
        return Err(Error::DegenerateSchedule);
    }
    let gain = s0 / (s0 - s_last);
    let mut sqrt_alpha_bars: Vec<f64> = schedule.sqrt_alpha_bars.iter().map(|s| (s - s_last) * gain).collect();
    sqrt_alpha_bars[0] = s0;
    sqrt_alpha_bars[n - 1] = 0.0;
    let alpha_bars: Vec<f64> = sqrt_alpha_bars.iter().map(|s| s * s).collect();
    let mut alphas = Vec::with_capacity(n);
    alphas.push(alpha_bars[0]);
    for t in 1..n - 1 {
        alphas.push(alpha_bars[t] / alpha_bars[t - 1]);
    }
    alphas.push(0.0);
    let betas = alphas.iter().map(|a| 1.0 - a).collect();
    Ok(DiffusionSchedule {
        betas,
        alphas,
        alpha_bars,
        sqrt_alpha_bars,
    })
}

/// Flat tensor with opaque shape metadata, e.g. `(B, 4, N, D)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentSample {
    pub values: Vec<f64>,
    pub shape: Vec<usize>,
}

impl LatentSample {
    pub fn new(values: Vec<f64>, shape: Vec<usize>) -> Result<LatentSample> {
        if shape.iter().product::<usize>() != values.len() {
            return Err(Error::ShapeMismatch(shape, vec![values.len()]));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("latent contains non-finite values".into()));
        }
        Ok(LatentSample { values, shape })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_shapes(a: &LatentSample, b: &LatentSample) -> Result<()> {
    if a.shape != b.shape || a.values.len() != b.values.len() {
        return Err(Error::ShapeMismatch(a.shape.clone(), b.shape.clone()));
    }
    Ok(())
}

/// `wa * a + wb * b` elementwise.
fn combine(a: &LatentSample, wa: f64, b: &LatentSample, wb: f64) -> Result<LatentSample> {
    check_shapes(a, b)?;
    let values = a.values.iter().zip(&b.values).map(|(x, y)| wa * x + wb * y).collect();
    Ok(LatentSample {
        values,
        shape: a.shape.clone(),
    })
}

/// Forward noising `x_t = sqrt(ab) x0 + sqrt(1 - ab) eps`.
pub fn add_noise(x0: &LatentSample, eps: &LatentSample, t: usize, schedule: &DiffusionSchedule) -> Result<LatentSample> {
    let (s, r) = schedule.coefficients(t)?;
    combine(x0, s, eps, r)
}

/// Velocity target `v = sqrt(ab) eps - sqrt(1 - ab) x0`.
pub fn v_target(x0: &LatentSample, eps: &LatentSample, t: usize, schedule: &DiffusionSchedule) -> Result<LatentSample> {
    let (s, r) = schedule.coefficients(t)?;
    combine(eps, s, x0, -r)
}

/// Noise from a velocity prediction: `eps = sqrt(ab) v + sqrt(1 - ab) x_t`.
pub fn v_to_epsilon(v: &LatentSample, x_t: &LatentSample, t: usize, schedule: &DiffusionSchedule) -> Result<LatentSample> {
    let (s, r) = schedule.coefficients(t)?;
    combine(v, s, x_t, r)
}

/// Clean sample from a velocity prediction: `x0 = sqrt(ab) x_t - sqrt(1 - ab) v`.
pub fn v_to_x0(v: &LatentSample, x_t: &LatentSample, t: usize, schedule: &DiffusionSchedule) -> Result<LatentSample> {
    let (s, r) = schedule.coefficients(t)?;
    combine(x_t, s, v, -r)
}

/// Mean squared error between true and predicted noise.
pub fn loss_4v(eps_true: &LatentSample, eps_pred: &LatentSample) -> Result<f64> {
    check_shapes(eps_true, eps_pred)?;
    if eps_true.is_empty() {
        return Ok(0.0);
    }
    let sq: Vec<f64> = eps_true.values.iter().zip(&eps_pred.values).map(|(a, b)| (a - b) * (a - b)).collect();
    Ok(pairwise_sum(&sq) / sq.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn random_latent(rng: &mut impl Rng, shape: &[usize]) -> LatentSample {
        let n = shape.iter().product();
        LatentSample::new((0..n).map(|_| rng.random_range(-2.0..2.0)).collect(), shape.to_vec()).unwrap()
    }

    /// Zero-SNR rescale coded from the published recipe, step by step.
    fn reference_rescale(betas: &[f64]) -> Vec<f64> {
        let mut ab = Vec::new();
        let mut p = 1.0;
        for b in betas {
            p *= 1.0 - b;
            ab.push(p);
        }
        let mut s: Vec<f64> = ab.iter().map(|a| a.sqrt()).collect();
        let s0 = s[0];
        let st = *s.last().unwrap();
        for v in &mut s {
            *v -= st;
            *v *= s0 / (s0 - st);
        }
        s
    }

    #[test]
    fn two_step_endpoints() {
        let s = linear_beta_schedule(2, 0.00085, 0.012).unwrap();
        assert_eq!(s.betas, vec![0.00085, 0.012]);
    }

    #[test]
    fn interior_betas_follow_sqrt_spacing() {
        let s = default_schedule();
        let t = 500;
        let r = 0.00085f64.sqrt() + t as f64 / 999.0 * (0.012f64.sqrt() - 0.00085f64.sqrt());
        assert!((s.betas[t] - r * r).abs() < 1e-15);
    }

    #[test]
    fn default_terminal_alpha_bar_matches_product_loop() {
        let s = default_schedule();
        let mut p = 1.0;
        for t in 0..1000 {
            let beta = if t == 0 {
                0.00085
            } else if t == 999 {
                0.012
            } else {
                let r = 0.00085f64.sqrt() + t as f64 / 999.0 * (0.012f64.sqrt() - 0.00085f64.sqrt());
                r * r
            };
            p *= 1.0 - beta;
        }
        assert!((s.alpha_bars[999] - p).abs() < 1e-12);
        assert!(s.alpha_bars.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn invalid_schedules() {
        assert!(linear_beta_schedule(1, 0.1, 0.2).is_err());
        assert!(linear_beta_schedule(10, 0.0, 0.2).is_err());
        assert!(linear_beta_schedule(10, 0.3, 0.2).is_err());
        assert!(linear_beta_schedule(10, 0.1, 1.0).is_err());
    }

    #[test]
    fn rescale_hits_zero_and_keeps_first() {
        let base = default_schedule();
        let z = rescale_zero_terminal_snr(&base).unwrap();
        assert_eq!(z.sqrt_alpha_bars[999], 0.0);
        assert_eq!(z.alpha_bars[999], 0.0);
        assert_eq!(z.snr(999), 0.0);
        assert_eq!(z.betas[999], 1.0);
        assert!((z.sqrt_alpha_bars[0] - base.sqrt_alpha_bars[0]).abs() < 1e-12);
        assert!(z.alpha_bars.windows(2).all(|w| w[1] < w[0]));
        let snr: Vec<f64> = (0..1000).map(|t| z.snr(t)).collect();
        assert!(snr.windows(2).all(|w| w[1] < w[0]));
        let reference = reference_rescale(&base.betas);
        for (a, b) in z.sqrt_alpha_bars.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-12);
        }
        // Cumulative product of the re-derived alphas reproduces alpha_bar.
        let mut p = 1.0;
        for t in 0..999 {
            p *= z.alphas[t];
            assert!((p - z.alpha_bars[t]).abs() < 1e-12);
        }
    }

    #[test]
    fn rescale_rejects_flat_schedule() {
        let flat = DiffusionSchedule {
            betas: vec![0.0; 3],
            alphas: vec![1.0; 3],
            alpha_bars: vec![1.0; 3],
            sqrt_alpha_bars: vec![1.0; 3],
        };
        assert!(matches!(rescale_zero_terminal_snr(&flat), Err(Error::DegenerateSchedule)));
    }

    #[test]
    fn terminal_step_is_pure_noise() {
        let z = rescale_zero_terminal_snr(&default_schedule()).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let x0 = random_latent(&mut rng, &[2, 4, 3, 5]);
        let eps = random_latent(&mut rng, &[2, 4, 3, 5]);
        let xt = add_noise(&x0, &eps, 999, &z).unwrap();
        assert_eq!(xt.values, eps.values);
        assert_eq!(v_to_epsilon(&eps, &xt, 999, &z).unwrap().values, xt.values);
    }

    #[test]
    fn unit_alpha_bar_identities() {
        let s = DiffusionSchedule {
            betas: vec![0.0, 0.5],
            alphas: vec![1.0, 0.5],
            alpha_bars: vec![1.0, 0.5],
            sqrt_alpha_bars: vec![1.0, 0.5f64.sqrt()],
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let x0 = random_latent(&mut rng, &[7]);
        let eps = random_latent(&mut rng, &[7]);
        assert_eq!(add_noise(&x0, &eps, 0, &s).unwrap().values, x0.values);
        assert_eq!(v_to_epsilon(&eps, &x0, 0, &s).unwrap().values, eps.values);
    }

    #[test]
    fn add_noise_matches_elementwise_formula() {
        let z = default_schedule();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x0 = random_latent(&mut rng, &[1, 4, 8, 8]);
        let eps = random_latent(&mut rng, &[1, 4, 8, 8]);
        let t = 437;
        let xt = add_noise(&x0, &eps, t, &z).unwrap();
        let ab = z.alpha_bars[t];
        for i in 0..xt.len() {
            let e = ab.sqrt() * x0.values[i] + (1.0 - ab).sqrt() * eps.values[i];
            assert!((xt.values[i] - e).abs() < 1e-12);
        }
    }

    #[test]
    fn loss_cases() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let a = random_latent(&mut rng, &[3, 4, 5]);
        assert_eq!(loss_4v(&a, &a).unwrap(), 0.0);
        let shifted = LatentSample::new(a.values.iter().map(|v| v + 0.25).collect(), a.shape.clone()).unwrap();
        assert!((loss_4v(&a, &shifted).unwrap() - 0.0625).abs() < 1e-12);
        let b = random_latent(&mut rng, &[3, 4, 5]);
        let mut brute = 0.0;
        for i in 0..a.len() {
            brute += (a.values[i] - b.values[i]).powi(2);
        }
        brute /= a.len() as f64;
        assert!((loss_4v(&a, &b).unwrap() - brute).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let z = default_schedule();
        let a = LatentSample::new(vec![0.0; 6], vec![2, 3]).unwrap();
        let b = LatentSample::new(vec![0.0; 6], vec![3, 2]).unwrap();
        assert!(matches!(add_noise(&a, &b, 0, &z), Err(Error::ShapeMismatch(..))));
        assert!(matches!(loss_4v(&a, &b), Err(Error::ShapeMismatch(..))));
        assert!(LatentSample::new(vec![0.0; 5], vec![2, 3]).is_err());
        assert!(add_noise(&a, &a, 1000, &z).is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let csv = rescale_zero_terminal_snr(&default_schedule()).unwrap().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "t,beta,alpha_bar,snr");
        assert_eq!(lines.len(), 1001);
        assert_eq!(lines[1000], "999,1,0,0");
    }

    proptest! {
        #[test]
        fn conversion_triangle(seed in any::<u64>(), t in 0usize..1000) {
            let z = rescale_zero_terminal_snr(&default_schedule()).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let x0 = random_latent(&mut rng, &[2, 4, 2, 3]);
            let eps = random_latent(&mut rng, &[2, 4, 2, 3]);
            let xt = add_noise(&x0, &eps, t, &z).unwrap();
            let v = v_target(&x0, &eps, t, &z).unwrap();
            let eps2 = v_to_epsilon(&v, &xt, t, &z).unwrap();
            let x02 = v_to_x0(&v, &xt, t, &z).unwrap();
            for i in 0..x0.len() {
                prop_assert!((eps2.values[i] - eps.values[i]).abs() < 1e-9);
                prop_assert!((x02.values[i] - x0.values[i]).abs() < 1e-9);
            }
        }

        #[test]
        fn rescale_properties(steps in 2usize..300, b0 in 1e-5f64..0.01, db in 0.0f64..0.05) {
            let s = linear_beta_schedule(steps, b0, b0 + db).unwrap();
            let z = rescale_zero_terminal_snr(&s).unwrap();
            prop_assert_eq!(z.sqrt_alpha_bars[steps - 1], 0.0);
            prop_assert!((z.sqrt_alpha_bars[0] - s.sqrt_alpha_bars[0]).abs() < 1e-12);
            prop_assert!(z.alpha_bars.windows(2).all(|w| w[1] < w[0]));
        }
    }
}
