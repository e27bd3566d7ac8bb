//! Raw ROI trace to clean pulse signal.
//!
//! Stage order: SNR check and motion elimination on the raw green channel
//! (the kept sample set is applied to all three channels), then per-channel
//! step removal and z-scoring, ICA, smoothness-priors detrending, and a
//! moving average.

pub mod denoise;
pub mod detrend;
pub mod ica;
pub mod motion;
pub mod normalize;
pub mod smooth;
pub mod snr;

pub use denoise::{denoise, denoise_samples};
pub use detrend::{detrend, detrend_samples};
pub use ica::{ica_extract, pearson, IcaOutcome};
pub use motion::{eliminate_motion, motion_keep, MotionOutcome};
pub use normalize::{normalize, normalize_samples};
pub use smooth::{moving_average, moving_average_samples};
pub use snr::{snr, snr_db};

use crate::domain::{Bvp, PipelineConfig, RoiId, RoiTrace};
use crate::error::{Error, Result};

/// Every intermediate signal of one ROI, all aligned on `kept`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiStages {
    pub roi: RoiId,
    pub fps: f64,
    pub motion: MotionOutcome,
    /// Raw R, G, B at the kept frames.
    pub raw: [Vec<f64>; 3],
    pub denoised: [Vec<f64>; 3],
    pub normalized: [Vec<f64>; 3],
    pub ica: Vec<f64>,
    pub ica_fallback: bool,
    pub detrended: Vec<f64>,
    pub bvp: Bvp,
}

impl RoiStages {
    pub fn kept(&self) -> &[usize] {
        &self.motion.kept
    }

    pub fn snr_db(&self) -> f64 {
        self.motion.snr_db
    }
}

fn stages(trace: &RoiTrace, cfg: &PipelineConfig) -> Result<RoiStages> {
    cfg.validate()?;
    let motion = motion_keep(&trace.green_bvp(), cfg)?;
    let raw = trace
        .channels()
        .map(|c| motion.kept.iter().map(|&i| c[i]).collect::<Vec<f64>>());
    let denoised = [
        denoise_samples(&raw[0], cfg.denoise_threshold)?,
        denoise_samples(&raw[1], cfg.denoise_threshold)?,
        denoise_samples(&raw[2], cfg.denoise_threshold)?,
    ];
    let green = normalize_samples(&denoised[1])?;
    // A flat red or blue channel leaves nothing to unmix; ICA then falls back to green.
    let other = |c: &[f64]| normalize_samples(c).unwrap_or_else(|_| vec![0.0; c.len()]);
    let normalized = [other(&denoised[0]), green, other(&denoised[2])];
    // Illumination drift is shared by all channels and usually dominates the
    // raw green variance; matching against drift-free green keeps ICA from
    // choosing the drift component.
    let reference = detrend_samples(&normalized[1], cfg.detrend_lambda)?;
    let ica = match ica_extract(
        [&normalized[0], &normalized[1], &normalized[2]],
        &reference,
        trace.fps(),
        cfg.ica_seed,
    ) {
        Ok(out) => out,
        Err(Error::IcaNonConvergence(_)) => IcaOutcome {
            bvp: Bvp::new(normalized[1].clone(), trace.fps())?,
            fallback: true,
            iterations: ica::MAX_ITER,
        },
        Err(e) => return Err(e),
    };
    let detrended = detrend_samples(ica.bvp.samples(), cfg.detrend_lambda)?;
    let smoothed = moving_average_samples(&detrended, cfg.moving_avg_len)?;
    Ok(RoiStages {
        roi: trace.roi(),
        fps: trace.fps(),
        motion,
        raw,
        denoised,
        normalized,
        ica_fallback: ica.fallback,
        ica: ica.bvp.into_samples(),
        detrended,
        bvp: Bvp::new(smoothed, trace.fps())?,
    })
}

/// Runs every stage and keeps the intermediates.
///
/// Any failure marks the ROI unusable ([`Error::UnusableRoi`]) rather than
/// failing the whole recording.
pub fn process_roi_stages(trace: &RoiTrace, cfg: &PipelineConfig) -> Result<RoiStages> {
    stages(trace, cfg).map_err(|e| match e {
        Error::InvalidConfig(_) => e,
        other => Error::UnusableRoi {
            roi: trace.roi(),
            source: Box::new(other),
        },
    })
}

pub fn process_roi(trace: &RoiTrace, cfg: &PipelineConfig) -> Result<Bvp> {
    process_roi_stages(trace, cfg).map(|s| s.bvp)
}
