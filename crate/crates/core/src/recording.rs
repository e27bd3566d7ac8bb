//! A recording as analyzed: its ROI traces plus the luminance verdict.
//!
//! Traces extracted from frames carry a quality sidecar, `<trace>.quality.json`,
//! next to the trace file so later analysis can apply the gate without the
//! frames.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Flag, PipelineConfig, QualityVerdict, RoiId, RoiTrace};
use crate::error::{Error, Result};
use crate::format::{sig6, sig6_opt};
use crate::ingest::{
    extract_traces_from_dir, list_frames, load_frame, LandmarkFrame, RoiDefinition,
};
use crate::luminance::{assess, frame_stats, hist_equalize, FrameStats, LuminanceThresholds};
use crate::vitals::{analyze_detailed, Analysis};

/// Summary of the luminance gate over a recording's frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub verdict: QualityVerdict,
    pub frames: usize,
    #[serde(serialize_with = "sig6")]
    pub mean_gray: f64,
    #[serde(serialize_with = "sig6")]
    pub y_range: f64,
    #[serde(serialize_with = "sig6")]
    pub median_contrast: f64,
    #[serde(serialize_with = "sig6_opt")]
    pub equalized_median_contrast: Option<f64>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Runs the luminance gate over per-frame statistics of the raw and the
/// equalized frames.
pub fn quality_report(
    raw: &[FrameStats],
    equalized: &[FrameStats],
    thresholds: &LuminanceThresholds,
) -> Result<QualityReport> {
    let verdict = assess(raw, Some(equalized), thresholds)?;
    let mean_gray = raw.iter().map(|s| s.mean_gray).sum::<f64>() / raw.len() as f64;
    let ys = raw.iter().map(|s| s.mean_y);
    let y_range = ys.clone().fold(f64::NEG_INFINITY, f64::max) - ys.fold(f64::INFINITY, f64::min);
    let contrast = |s: &[FrameStats]| median(s.iter().map(FrameStats::contrast_ratio).collect());
    Ok(QualityReport {
        verdict,
        frames: raw.len(),
        mean_gray,
        y_range,
        median_contrast: contrast(raw),
        equalized_median_contrast: (mean_gray < thresholds.dark_mean).then(|| contrast(equalized)),
    })
}

/// Luminance gate over the frame files of `dir`.
pub fn assess_frames(
    dir: impl AsRef<Path>,
    thresholds: &LuminanceThresholds,
) -> Result<QualityReport> {
    let paths = list_frames(dir)?;
    let stats: Vec<(FrameStats, FrameStats)> = paths
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let wrap = |e| Error::Frame {
                frame: i,
                source: Box::new(e),
            };
            let frame = load_frame(p).map_err(wrap)?;
            let raw = frame_stats(&frame).map_err(wrap)?;
            let eq = frame_stats(&hist_equalize(&frame)).map_err(wrap)?;
            Ok((raw, eq))
        })
        .collect::<Result<_>>()?;
    let (raw, eq): (Vec<_>, Vec<_>) = stats.into_iter().unzip();
    quality_report(&raw, &eq, thresholds)
}

/// `<dir>/<stem>.quality.json` for a trace at `<dir>/<stem>.csv`.
pub fn sidecar_path(trace_path: impl AsRef<Path>) -> PathBuf {
    let p = trace_path.as_ref();
    let stem = p
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    p.with_file_name(format!("{stem}.quality.json"))
}

pub fn write_quality(report: &QualityReport, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(report).expect("quality report serializes") + "\n";
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_quality(path: impl AsRef<Path>) -> Result<QualityReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub traces: BTreeMap<RoiId, RoiTrace>,
    /// `None` when no frame statistics were available.
    pub quality: Option<QualityReport>,
}

impl Recording {
    /// Loads a trace file and, if present, its quality sidecar.
    pub fn from_trace(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let traces = crate::ingest::load_trace(path)?;
        let sidecar = sidecar_path(path);
        let quality = if sidecar.exists() {
            Some(load_quality(&sidecar)?)
        } else {
            None
        };
        Ok(Recording { traces, quality })
    }

    fn read_frames(
        dir: &Path,
        landmarks: &[LandmarkFrame],
        defs: &BTreeMap<RoiId, RoiDefinition>,
        fps: f64,
        thresholds: &LuminanceThresholds,
        gate: bool,
    ) -> Result<Self> {
        let quality = assess_frames(dir, thresholds)?;
        if gate && !quality.verdict.is_analyzable() {
            return Err(Error::QualityRejected(quality.verdict));
        }
        let equalize = quality.verdict == QualityVerdict::Enhanced;
        let traces = extract_traces_from_dir(dir, landmarks, defs, fps, equalize)?;
        Ok(Recording {
            traces,
            quality: Some(quality),
        })
    }

    /// Assesses the frames of `dir` and extracts ROI traces, equalizing the
    /// frames first when the recording is dark. The verdict is recorded but
    /// not enforced.
    pub fn extract(
        dir: impl AsRef<Path>,
        landmarks: &[LandmarkFrame],
        defs: &BTreeMap<RoiId, RoiDefinition>,
        fps: f64,
        thresholds: &LuminanceThresholds,
    ) -> Result<Self> {
        Self::read_frames(dir.as_ref(), landmarks, defs, fps, thresholds, false)
    }

    /// Like [`Recording::extract`], but a rejected recording is returned as
    /// an error before any trace is extracted.
    pub fn from_frames(
        dir: impl AsRef<Path>,
        landmarks: &[LandmarkFrame],
        defs: &BTreeMap<RoiId, RoiDefinition>,
        fps: f64,
        thresholds: &LuminanceThresholds,
    ) -> Result<Self> {
        Self::read_frames(dir.as_ref(), landmarks, defs, fps, thresholds, true)
    }

    /// Writes the traces to `path` and the quality report, if any, to its sidecar.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        crate::ingest::write_trace(&self.traces, path)?;
        if let Some(q) = &self.quality {
            write_quality(q, sidecar_path(path))?;
        }
        Ok(())
    }

    pub fn verdict(&self) -> QualityVerdict {
        self.quality
            .as_ref()
            .map_or(QualityVerdict::Good, |q| q.verdict)
    }

    pub fn analyze(&self, cfg: &PipelineConfig) -> Result<Analysis> {
        let mut analysis = analyze_detailed(&self.traces, self.verdict(), cfg)?;
        if self.quality.is_none() {
            let flags = &mut analysis.report.flags;
            flags.push(Flag::LuminanceNotAssessed);
            flags.sort();
            flags.dedup();
        }
        Ok(analysis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{synth_recording, SynthSpec};

    fn stats(mean: f64, p1: f64, p99: f64) -> FrameStats {
        FrameStats::new(mean, p1, p99, mean).unwrap()
    }

    #[test]
    fn sidecar_names() {
        assert_eq!(
            sidecar_path("/d/rec.csv"),
            PathBuf::from("/d/rec.quality.json")
        );
        assert_eq!(sidecar_path("rec"), PathBuf::from("rec.quality.json"));
    }

    #[test]
    fn report_round_trips() {
        let r = quality_report(
            &[stats(60.0, 5.0, 240.0)],
            &[stats(128.0, 0.0, 255.0)],
            &Default::default(),
        )
        .unwrap();
        assert_eq!(r.verdict, QualityVerdict::Enhanced);
        assert_eq!(r.equalized_median_contrast, Some(1.0));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("q.json");
        write_quality(&r, &p).unwrap();
        let loaded = load_quality(&p).unwrap();
        assert_eq!(loaded.verdict, r.verdict);
        assert!((loaded.median_contrast - r.median_contrast).abs() < 1e-5);
        let again = dir.path().join("again.json");
        write_quality(&loaded, &again).unwrap();
        assert_eq!(
            fs::read_to_string(&p).unwrap(),
            fs::read_to_string(&again).unwrap()
        );
    }

    #[test]
    fn unassessed_recordings_are_flagged() {
        let traces = synth_recording(&SynthSpec::default(), [1.0, 1.0, 1.0]);
        let rec = Recording {
            traces,
            quality: None,
        };
        let report = rec.analyze(&PipelineConfig::default()).unwrap().report;
        assert!(report.flags.contains(&Flag::LuminanceNotAssessed));
        assert_eq!(report.quality, QualityVerdict::Good);
    }

    #[test]
    fn sidecar_verdict_gates_analysis() {
        let traces = synth_recording(&SynthSpec::default(), [1.0, 1.0, 1.0]);
        let quality = quality_report(
            &[stats(130.0, 120.0, 140.0)],
            &[stats(130.0, 0.0, 255.0)],
            &Default::default(),
        )
        .unwrap();
        let rec = Recording {
            traces,
            quality: Some(quality),
        };
        assert!(matches!(
            rec.analyze(&PipelineConfig::default()),
            Err(Error::QualityRejected(QualityVerdict::LowContrast))
        ));
    }
}
