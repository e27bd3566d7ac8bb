//! Ratio-of-ratios oxygen saturation.
//!
//! Camera sensors have no infrared channel; blue stands in for it. DC is the
//! channel mean over the analysis window, AC the population standard
//! deviation of the channel after detrending and smoothing.

use crate::domain::{PipelineConfig, RoiTrace};
use crate::error::{Error, Result};
use crate::pipeline::normalize::{mean, pop_std};
use crate::pipeline::{denoise_samples, detrend_samples, moving_average_samples};

pub const MIN_DURATION_S: f64 = 4.0;

/// `(A - B * ror) * 100`, clamped to `[0, 100]`.
pub fn spo2_from_ror(ror: f64, a: f64, b: f64) -> f64 {
    ((a - b * ror) * 100.0).clamp(0.0, 100.0)
}

fn ac_component(x: &[f64], cfg: &PipelineConfig) -> Result<f64> {
    let detrended = detrend_samples(x, cfg.detrend_lambda)?;
    Ok(pop_std(&moving_average_samples(
        &detrended,
        cfg.moving_avg_len,
    )?))
}

/// `(AC_red / DC_red) / (AC_blue / DC_blue)` over already-cleaned channels.
pub fn ratio_of_ratios(red: &[f64], blue: &[f64], cfg: &PipelineConfig) -> Result<f64> {
    if red.len() != blue.len() {
        return Err(Error::LengthMismatch(
            "red and blue differ in length".into(),
        ));
    }
    let dc_r = mean(red);
    let dc_b = mean(blue);
    if !(dc_r.abs() > 0.0) || !(dc_b.abs() > 0.0) {
        return Err(Error::UnmeasurableSpo2("zero DC component".into()));
    }
    let ac_r = ac_component(red, cfg)?;
    let ac_b = ac_component(blue, cfg)?;
    // Detrending a constant leaves rounding residue, so "zero" is relative to DC.
    if !(ac_b > 1e-9 * dc_b.abs()) {
        return Err(Error::UnmeasurableSpo2(
            "zero AC on the blue channel".into(),
        ));
    }
    Ok((ac_r / dc_r) / (ac_b / dc_b))
}

/// SpO₂ in percent from the frames of `trace` listed in `kept`.
///
/// Red and blue are step-filtered before measurement, matching the channels
/// the pulse signal was built from.
pub fn spo2(trace: &RoiTrace, kept: &[usize], cfg: &PipelineConfig) -> Result<f64> {
    let duration = kept.len() as f64 / trace.fps();
    if duration < MIN_DURATION_S {
        return Err(Error::UnmeasurableSpo2(format!(
            "{duration:.2} s of signal, need {MIN_DURATION_S} s"
        )));
    }
    if let Some(&bad) = kept.iter().find(|&&i| i >= trace.len()) {
        return Err(Error::Invalid(format!("frame index {bad} out of range")));
    }
    let pick = |c: &[f64]| kept.iter().map(|&i| c[i]).collect::<Vec<f64>>();
    let red = denoise_samples(&pick(trace.red()), cfg.denoise_threshold)?;
    let blue = denoise_samples(&pick(trace.blue()), cfg.denoise_threshold)?;
    let ror = ratio_of_ratios(&red, &blue, cfg)?;
    Ok(spo2_from_ror(ror, cfg.spo2_a, cfg.spo2_b))
}
