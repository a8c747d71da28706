use std::path::Path;

use super::{prepare_out_dir, PipelineConfig, RunManifest};
use crate::schedmath::{linear_beta_schedule, rescale_zero_terminal_snr, DEFAULT_BETA_END, DEFAULT_BETA_START, DEFAULT_STEPS};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleParams {
    pub steps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
    pub zero_terminal_snr: bool,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        ScheduleParams {
            steps: DEFAULT_STEPS,
            beta_start: DEFAULT_BETA_START,
            beta_end: DEFAULT_BETA_END,
            zero_terminal_snr: true,
        }
    }
}

/// Writes the `t,beta,alpha_bar,snr` table to `schedule.csv`.
pub fn schedule(params: &ScheduleParams, config: &PipelineConfig, out: &Path) -> Result<RunManifest> {
    let mut manifest = RunManifest::new("schedule", config);
    let base = linear_beta_schedule(params.steps, params.beta_start, params.beta_end)?;
    let sched = if params.zero_terminal_snr { rescale_zero_terminal_snr(&base)? } else { base };
    prepare_out_dir(out)?;
    manifest.write_output(out, "schedule.csv", sched.to_csv().as_bytes())?;
    manifest.stat("steps", params.steps);
    manifest.stat("zero_terminal_snr", params.zero_terminal_snr);
    manifest.finish(out)
}
