//! Data types shared by every stage of the pipeline.
//!
//! Every type validates its invariants at construction and is immutable
//! afterwards, so a value that exists is a value that is usable.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::format::{sig6, sig6_opt};

/// One of the three face regions a trace is measured over.
///
/// The derived ordering (forehead, cheek+nose, face without mouth) is the
/// tie-break order used by ROI selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoiId {
    Forehead,
    CheekNose,
    FaceNoMouth,
}

impl RoiId {
    pub const ALL: [RoiId; 3] = [RoiId::Forehead, RoiId::CheekNose, RoiId::FaceNoMouth];

    pub fn as_str(self) -> &'static str {
        match self {
            RoiId::Forehead => "forehead",
            RoiId::CheekNose => "cheeknose",
            RoiId::FaceNoMouth => "facenomouth",
        }
    }
}

impl fmt::Display for RoiId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RoiId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "forehead" => Ok(RoiId::Forehead),
            "cheeknose" => Ok(RoiId::CheekNose),
            "facenomouth" => Ok(RoiId::FaceNoMouth),
            other => Err(Error::Invalid(format!("unknown roi '{other}'"))),
        }
    }
}

fn check_fps(fps: f64) -> Result<()> {
    if fps.is_finite() && fps > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidFps(fps))
    }
}

/// Per-frame mean R, G, B of one face region, sampled at a fixed frame rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RoiTrace {
    roi: RoiId,
    fps: f64,
    r: Vec<f64>,
    g: Vec<f64>,
    b: Vec<f64>,
    timestamps: Option<Vec<f64>>,
}

impl RoiTrace {
    pub fn new(roi: RoiId, fps: f64, r: Vec<f64>, g: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        Self::with_timestamps(roi, fps, r, g, b, None)
    }

    pub fn with_timestamps(
        roi: RoiId,
        fps: f64,
        r: Vec<f64>,
        g: Vec<f64>,
        b: Vec<f64>,
        timestamps: Option<Vec<f64>>,
    ) -> Result<Self> {
        check_fps(fps)?;
        if r.len() != g.len() || g.len() != b.len() {
            return Err(Error::LengthMismatch(format!(
                "{roi}: channel lengths r={}, g={}, b={}",
                r.len(),
                g.len(),
                b.len()
            )));
        }
        if r.len() < 2 {
            return Err(Error::TraceTooShort(r.len()));
        }
        for (channel, values) in [('r', &r), ('g', &g), ('b', &b)] {
            if let Some(&value) = values
                .iter()
                .find(|v| !v.is_finite() || !(0.0..=255.0).contains(*v))
            {
                return Err(Error::ChannelOutOfRange { channel, value });
            }
        }
        if let Some(ts) = &timestamps {
            if ts.len() != r.len() {
                return Err(Error::LengthMismatch(format!(
                    "{roi}: {} timestamps for {} frames",
                    ts.len(),
                    r.len()
                )));
            }
            if ts.iter().any(|t| !t.is_finite()) || ts.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Invalid(format!(
                    "{roi}: timestamps must be finite and strictly increasing"
                )));
            }
        }
        Ok(RoiTrace {
            roi,
            fps,
            r,
            g,
            b,
            timestamps,
        })
    }

    pub fn roi(&self) -> RoiId {
        self.roi
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn red(&self) -> &[f64] {
        &self.r
    }

    pub fn green(&self) -> &[f64] {
        &self.g
    }

    pub fn blue(&self) -> &[f64] {
        &self.b
    }

    pub fn timestamps(&self) -> Option<&[f64]> {
        self.timestamps.as_deref()
    }

    /// Channels in R, G, B order.
    pub fn channels(&self) -> [&[f64]; 3] {
        [&self.r, &self.g, &self.b]
    }

    /// Green channel as an unprocessed pulse signal.
    pub fn green_bvp(&self) -> Bvp {
        Bvp {
            samples: self.g.clone(),
            fps: self.fps,
        }
    }
}

/// A one-dimensional blood-volume-pulse signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Bvp {
    samples: Vec<f64>,
    fps: f64,
}

impl Bvp {
    pub fn new(samples: Vec<f64>, fps: f64) -> Result<Self> {
        check_fps(fps)?;
        if samples.len() < 2 {
            return Err(Error::SignalTooShort {
                got: samples.len(),
                need: 2,
            });
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("signal contains non-finite samples".into()));
        }
        Ok(Bvp { samples, fps })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.fps
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    /// Same sample rate, new samples. Used by stages that preserve timing.
    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Bvp::new(samples, self.fps)
    }
}

/// One-sided power spectral density.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    freqs: Vec<f64>,
    power: Vec<f64>,
}

impl Psd {
    pub fn new(freqs: Vec<f64>, power: Vec<f64>) -> Result<Self> {
        if freqs.len() != power.len() {
            return Err(Error::LengthMismatch(format!(
                "psd: {} frequencies, {} power values",
                freqs.len(),
                power.len()
            )));
        }
        if freqs.iter().any(|f| !f.is_finite()) || freqs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid(
                "psd frequencies must be finite and strictly increasing".into(),
            ));
        }
        if power.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::Invalid(
                "psd power must be finite and non-negative".into(),
            ));
        }
        Ok(Psd { freqs, power })
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Largest power inside `[lo, hi]` Hz as `(freq, power)`; earliest bin on ties.
    pub fn peak_in_band(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64)> = None;
        for (&f, &p) in self.freqs.iter().zip(&self.power) {
            if f < lo || f > hi {
                continue;
            }
            match best {
                Some((_, bp)) if p <= bp => {}
                _ => best = Some((f, p)),
            }
        }
        best
    }
}

/// Inter-beat intervals in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct IbiSeries {
    intervals: Vec<f64>,
}

impl IbiSeries {
    pub fn new(intervals: Vec<f64>) -> Result<Self> {
        if let Some(bad) = intervals.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(Error::Invalid(format!(
                "inter-beat interval must be finite and > 0, got {bad}"
            )));
        }
        Ok(IbiSeries { intervals })
    }

    pub fn intervals(&self) -> &[f64] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Every tunable of the pipeline. Serializes to a flat JSON object whose keys
/// match the field names; absent keys take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Step threshold of the denoise filter, in raw pixel-mean units.
    pub denoise_threshold: f64,
    /// Smoothness-priors regularization parameter.
    pub detrend_lambda: f64,
    /// Moving-average window length in samples.
    pub moving_avg_len: usize,
    /// Heart-rate search band in Hz.
    pub hr_band: [f64; 2],
    /// Band retained by the SNR metric, in beats per minute.
    pub snr_band_bpm: [f64; 2],
    /// Width of the SNR signal window above the spectral peak, in bpm.
    pub snr_window_bpm: f64,
    pub motion_segments: usize,
    pub motion_drop_fraction: f64,
    pub welch_segment_len: usize,
    pub welch_overlap: f64,
    pub welch_fft_len: usize,
    pub peak_min_distance_s: f64,
    #[serde(rename = "spo2_A")]
    pub spo2_a: f64,
    #[serde(rename = "spo2_B")]
    pub spo2_b: f64,
    pub ica_seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            denoise_threshold: 1.0,
            detrend_lambda: 10.0,
            moving_avg_len: 5,
            hr_band: [0.5, 4.0],
            snr_band_bpm: [30.0, 240.0],
            snr_window_bpm: 3.0,
            motion_segments: 10,
            motion_drop_fraction: 0.05,
            welch_segment_len: 256,
            welch_overlap: 0.5,
            welch_fft_len: 4096,
            peak_min_distance_s: 0.25,
            spo2_a: 1.0,
            spo2_b: 0.04,
            ica_seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        if !finite_pos(self.denoise_threshold) {
            return bad("denoise_threshold must be > 0");
        }
        if !finite_pos(self.detrend_lambda) {
            return bad("detrend_lambda must be > 0");
        }
        if self.moving_avg_len < 1 {
            return bad("moving_avg_len must be >= 1");
        }
        let [lo, hi] = self.hr_band;
        if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
            return bad("hr_band must satisfy 0 < lo < hi");
        }
        let [slo, shi] = self.snr_band_bpm;
        if !(slo.is_finite() && shi.is_finite() && 0.0 < slo && slo < shi) {
            return bad("snr_band_bpm must satisfy 0 < lo < hi");
        }
        if !(self.snr_window_bpm.is_finite() && self.snr_window_bpm >= 0.0) {
            return bad("snr_window_bpm must be >= 0");
        }
        if self.motion_segments < 2 {
            return bad("motion_segments must be >= 2");
        }
        if !(self.motion_drop_fraction.is_finite()
            && self.motion_drop_fraction > 0.0
            && self.motion_drop_fraction < 1.0)
        {
            return bad("motion_drop_fraction must be in (0, 1)");
        }
        if self.welch_segment_len < 2 {
            return bad("welch_segment_len must be >= 2");
        }
        if !(self.welch_overlap > 0.0 && self.welch_overlap < 1.0) {
            return bad("welch_overlap must be in (0, 1)");
        }
        if self.welch_fft_len < 2 {
            return bad("welch_fft_len must be >= 2");
        }
        if !(self.peak_min_distance_s.is_finite() && self.peak_min_distance_s >= 0.0) {
            return bad("peak_min_distance_s must be >= 0");
        }
        if !self.spo2_a.is_finite() {
            return bad("spo2_A must be finite");
        }
        if !(self.spo2_b.is_finite() && self.spo2_b >= 0.0) {
            return bad("spo2_B must be >= 0");
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: PipelineConfig =
            serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::InvalidConfig(msg) => Error::format(path, msg),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the compact JSON form.
    pub fn hash(&self) -> String {
        let compact = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(compact.as_bytes());
        hex::encode(&digest[..8])
    }
}

/// Outcome of the luminance gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityVerdict {
    Good,
    /// Dark recording; histogram equalization was applied before extraction.
    Enhanced,
    TooDark,
    LowContrast,
    VaryingLight,
}

impl QualityVerdict {
    /// Whether analysis may proceed.
    pub fn is_analyzable(self) -> bool {
        matches!(self, QualityVerdict::Good | QualityVerdict::Enhanced)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            QualityVerdict::Good => "good",
            QualityVerdict::Enhanced => "enhanced",
            QualityVerdict::TooDark => "too_dark",
            QualityVerdict::LowContrast => "low_contrast",
            QualityVerdict::VaryingLight => "varying_light",
        }
    }
}

impl fmt::Display for QualityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Non-fatal conditions met while producing a report.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Flag {
    /// ICA could not separate the channels; the normalized green channel was used.
    IcaFallback(RoiId),
    /// A high-variance segment was cut out and the signal compacted.
    MotionEliminated(RoiId),
    /// The ROI produced no usable signal.
    RoiUnusable(RoiId),
    /// Outlier rejection would have left fewer than two intervals.
    IbiOutlierFallback,
    RmssdUnavailable,
    Spo2Unavailable,
    /// The trace came without frame statistics, so the gate was not run.
    LuminanceNotAssessed,
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flag::IcaFallback(roi) => write!(f, "ica_fallback:{roi}"),
            Flag::MotionEliminated(roi) => write!(f, "motion_eliminated:{roi}"),
            Flag::RoiUnusable(roi) => write!(f, "roi_unusable:{roi}"),
            Flag::IbiOutlierFallback => f.write_str("ibi_outlier_fallback"),
            Flag::RmssdUnavailable => f.write_str("rmssd_unavailable"),
            Flag::Spo2Unavailable => f.write_str("spo2_unavailable"),
            Flag::LuminanceNotAssessed => f.write_str("luminance_not_assessed"),
        }
    }
}

impl Serialize for Flag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn sig6_map<S: Serializer>(
    map: &BTreeMap<RoiId, f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut m = s.serialize_map(Some(map.len()))?;
    for (roi, v) in map {
        m.serialize_entry(roi.as_str(), &crate::format::round_sig(*v, 6))?;
    }
    m.end()
}

/// The measurement record produced for one recording.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VitalsReport {
    #[serde(serialize_with = "sig6")]
    pub hr_bpm: f64,
    #[serde(serialize_with = "sig6_opt")]
    pub rmssd_ms: Option<f64>,
    #[serde(serialize_with = "sig6_opt")]
    pub spo2_pct: Option<f64>,
    pub selected_roi: RoiId,
    #[serde(serialize_with = "sig6")]
    pub peak_power: f64,
    #[serde(serialize_with = "sig6_map")]
    pub per_roi_peak_power: BTreeMap<RoiId, f64>,
    pub quality: QualityVerdict,
    #[serde(serialize_with = "sig6")]
    pub snr_db: f64,
    pub flags: Vec<Flag>,
    pub config_hash: String,
}

impl VitalsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
