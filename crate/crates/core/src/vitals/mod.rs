//! ROI selection and vital-sign computation.

pub mod hrv;
pub mod spo2;
pub mod welch;

pub use hrv::{detect_peaks, ibis_from_peaks, reject_outliers, rmssd};
pub use spo2::{ratio_of_ratios, spo2, spo2_from_ror};
pub use welch::{welch, welch_psd};

use std::collections::BTreeMap;

use crate::domain::{Flag, PipelineConfig, Psd, QualityVerdict, RoiId, RoiTrace, VitalsReport};
use crate::error::{Error, Result};
use crate::pipeline::{process_roi_stages, RoiStages};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoiSelection {
    pub roi: RoiId,
    pub freq_hz: f64,
    pub power: f64,
}

/// Picks the ROI whose in-band PSD peak is highest.
///
/// PSDs with no positive power in the band are not candidates. Ties go to
/// the earlier ROI (forehead, cheek+nose, face without mouth).
pub fn select_roi(psds: &BTreeMap<RoiId, Psd>, band: [f64; 2]) -> Result<RoiSelection> {
    let mut best: Option<RoiSelection> = None;
    for (&roi, psd) in psds {
        let Some((freq_hz, power)) = psd.peak_in_band(band[0], band[1]) else {
            continue;
        };
        if !(power > 0.0) {
            continue;
        }
        if best.is_none_or(|b| power > b.power) {
            best = Some(RoiSelection {
                roi,
                freq_hz,
                power,
            });
        }
    }
    best.ok_or(Error::NoUsableRoi)
}

/// Per-ROI maxima straight from reported peak powers.
pub fn select_by_peak_power(peaks: &BTreeMap<RoiId, f64>) -> Result<RoiId> {
    let mut best: Option<(RoiId, f64)> = None;
    for (&roi, &p) in peaks {
        if p > 0.0 && best.is_none_or(|(_, bp)| p > bp) {
            best = Some((roi, p));
        }
    }
    best.map(|(roi, _)| roi).ok_or(Error::NoUsableRoi)
}

/// Heart rate in bpm from the PSD peak frequency.
pub fn hr_from_peak(freq_hz: f64, band: [f64; 2]) -> Result<f64> {
    let slack = 1e-12 * band[1];
    if !(freq_hz >= band[0] - slack && freq_hz <= band[1] + slack) {
        return Err(Error::OutOfBand {
            freq_hz,
            lo_hz: band[0],
            hi_hz: band[1],
        });
    }
    Ok(60.0 * freq_hz)
}

/// Everything computed while analyzing one recording.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: VitalsReport,
    pub stages: BTreeMap<RoiId, RoiStages>,
    pub psds: BTreeMap<RoiId, Psd>,
    /// Peak times (s) on the selected ROI's pulse signal.
    pub peaks: Vec<f64>,
}

/// Runs the full pipeline over the traces of one recording.
pub fn analyze_detailed(
    traces: &BTreeMap<RoiId, RoiTrace>,
    quality: QualityVerdict,
    cfg: &PipelineConfig,
) -> Result<Analysis> {
    cfg.validate()?;
    if !quality.is_analyzable() {
        return Err(Error::QualityRejected(quality));
    }
    if traces.is_empty() {
        return Err(Error::NoUsableRoi);
    }
    let mut flags = Vec::new();
    let mut stages = BTreeMap::new();
    let mut psds = BTreeMap::new();
    for (&roi, trace) in traces {
        let processed = process_roi_stages(trace, cfg).and_then(|s| {
            let psd = welch_psd(&s.bvp, cfg)?;
            Ok((s, psd))
        });
        match processed {
            Ok((s, psd)) => {
                if s.ica_fallback {
                    flags.push(Flag::IcaFallback(roi));
                }
                if s.motion.eliminated() {
                    flags.push(Flag::MotionEliminated(roi));
                }
                stages.insert(roi, s);
                psds.insert(roi, psd);
            }
            Err(Error::InvalidConfig(msg)) => return Err(Error::InvalidConfig(msg)),
            Err(_) => flags.push(Flag::RoiUnusable(roi)),
        }
    }

    let selection = select_roi(&psds, cfg.hr_band)?;
    let per_roi_peak_power: BTreeMap<RoiId, f64> = psds
        .iter()
        .filter_map(|(&roi, psd)| {
            psd.peak_in_band(cfg.hr_band[0], cfg.hr_band[1])
                .map(|(_, p)| (roi, p))
        })
        .collect();
    for roi in psds.keys() {
        if !per_roi_peak_power.get(roi).is_some_and(|p| *p > 0.0) {
            flags.push(Flag::RoiUnusable(*roi));
        }
    }
    let hr_bpm = hr_from_peak(selection.freq_hz, cfg.hr_band)?;
    let chosen = &stages[&selection.roi];

    let peaks = detect_peaks(&chosen.bvp, cfg.peak_min_distance_s);
    let rmssd_ms = match ibis_from_peaks(&peaks) {
        Ok(ibis) => {
            let (clean, fell_back) = reject_outliers(&ibis);
            if fell_back {
                flags.push(Flag::IbiOutlierFallback);
            }
            rmssd(&clean).ok()
        }
        Err(_) => None,
    };
    if rmssd_ms.is_none() {
        flags.push(Flag::RmssdUnavailable);
    }

    let spo2_pct = spo2(&traces[&selection.roi], chosen.kept(), cfg).ok();
    if spo2_pct.is_none() {
        flags.push(Flag::Spo2Unavailable);
    }
    flags.sort();
    flags.dedup();

    let report = VitalsReport {
        hr_bpm,
        rmssd_ms,
        spo2_pct,
        selected_roi: selection.roi,
        peak_power: selection.power,
        per_roi_peak_power,
        quality,
        snr_db: chosen.snr_db(),
        flags,
        config_hash: cfg.hash(),
    };
    Ok(Analysis {
        report,
        stages,
        psds,
        peaks,
    })
}

pub fn analyze(
    traces: &BTreeMap<RoiId, RoiTrace>,
    quality: QualityVerdict,
    cfg: &PipelineConfig,
) -> Result<VitalsReport> {
    analyze_detailed(traces, quality, cfg).map(|a| a.report)
}
