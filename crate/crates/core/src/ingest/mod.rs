//! Loading recordings: trace files, or frames plus landmarks reduced to ROI
//! channel means.

pub mod frames;
pub mod landmarks;
pub mod mask;
pub mod trace;

pub use frames::{list_frames, load_frame};
pub use landmarks::{load_landmarks, parse_landmarks, LandmarkFrame, LANDMARK_COUNT};
pub use mask::{default_roi_defs, extract_roi_means, load_roi_defs, roi_mask, Mask, RoiDefinition};
pub use trace::{load_trace, parse_trace, render_trace, write_trace};

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::path::Path;

use image::RgbImage;
use rayon::prelude::*;

use crate::domain::{RoiId, RoiTrace};
use crate::error::{Error, Result};
use crate::luminance::hist_equalize;

fn frame_means(
    frame: &RgbImage,
    landmarks: &LandmarkFrame,
    defs: &BTreeMap<RoiId, RoiDefinition>,
) -> Result<Vec<[f64; 3]>> {
    defs.values()
        .map(|def| {
            let m = roi_mask(landmarks, def, frame.width(), frame.height())?;
            extract_roi_means(frame, &m)
        })
        .collect()
}

fn extract_with<'a, F>(
    count: usize,
    load: F,
    landmarks: &[LandmarkFrame],
    defs: &BTreeMap<RoiId, RoiDefinition>,
    fps: f64,
) -> Result<BTreeMap<RoiId, RoiTrace>>
where
    F: Fn(usize) -> Result<Cow<'a, RgbImage>> + Sync,
{
    if count != landmarks.len() {
        return Err(Error::LengthMismatch(format!(
            "{count} frames but {} landmark frames",
            landmarks.len()
        )));
    }
    if count < 2 {
        return Err(Error::TraceTooShort(count));
    }
    if defs.is_empty() {
        return Err(Error::Invalid("no ROI definitions".into()));
    }
    let per_frame: Vec<Vec<[f64; 3]>> = (0..count)
        .into_par_iter()
        .map(|i| {
            load(i)
                .and_then(|frame| frame_means(&frame, &landmarks[i], defs))
                .map_err(|e| Error::Frame {
                    frame: i,
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;

    defs.keys()
        .enumerate()
        .map(|(k, &roi)| {
            let channel = |c: usize| per_frame.iter().map(|f| f[k][c]).collect();
            RoiTrace::new(roi, fps, channel(0), channel(1), channel(2)).map(|t| (roi, t))
        })
        .collect()
}

/// Per-frame ROI channel means over in-memory frames.
pub fn extract_traces(
    frames: &[RgbImage],
    landmarks: &[LandmarkFrame],
    defs: &BTreeMap<RoiId, RoiDefinition>,
    fps: f64,
) -> Result<BTreeMap<RoiId, RoiTrace>> {
    extract_with(
        frames.len(),
        |i| Ok(Cow::Borrowed(&frames[i])),
        landmarks,
        defs,
        fps,
    )
}

/// Like [`extract_traces`], decoding each frame file of `dir` on demand and
/// optionally histogram-equalizing it first.
pub fn extract_traces_from_dir(
    dir: impl AsRef<Path>,
    landmarks: &[LandmarkFrame],
    defs: &BTreeMap<RoiId, RoiDefinition>,
    fps: f64,
    equalize: bool,
) -> Result<BTreeMap<RoiId, RoiTrace>> {
    let paths = list_frames(dir)?;
    let load = |i: usize| {
        let frame = load_frame(&paths[i])?;
        Ok(Cow::Owned(if equalize {
            hist_equalize(&frame)
        } else {
            frame
        }))
    };
    extract_with(paths.len(), load, landmarks, defs, fps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgb;

    fn box_landmarks(n: usize) -> Vec<LandmarkFrame> {
        (0..n)
            .map(|i| {
                let mut pts = vec![[0.5, 0.5]; LANDMARK_COUNT];
                pts[0] = [0.1, 0.1];
                pts[1] = [0.9, 0.1];
                pts[2] = [0.9, 0.9];
                pts[3] = [0.1, 0.9];
                LandmarkFrame::new(i, pts).unwrap()
            })
            .collect()
    }

    fn box_defs() -> BTreeMap<RoiId, RoiDefinition> {
        RoiId::ALL
            .iter()
            .map(|&roi| {
                let def = RoiDefinition {
                    roi,
                    polygon: vec![0, 1, 2, 3],
                    subtract: None,
                };
                (roi, def)
            })
            .collect()
    }

    #[test]
    fn constant_frames_give_constant_traces() {
        let frames = vec![RgbImage::from_pixel(20, 20, Rgb([10, 20, 30])); 3];
        let traces = extract_traces(&frames, &box_landmarks(3), &box_defs(), 30.0).unwrap();
        assert_eq!(traces.len(), 3);
        for t in traces.values() {
            assert_eq!(t.len(), 3);
            assert!(t.red().iter().all(|&v| v == 10.0));
            assert!(t.green().iter().all(|&v| v == 20.0));
            assert!(t.blue().iter().all(|&v| v == 30.0));
        }
    }

    #[test]
    fn count_mismatch_and_frame_errors() {
        let frames = vec![RgbImage::new(20, 20); 3];
        assert!(matches!(
            extract_traces(&frames, &box_landmarks(2), &box_defs(), 30.0),
            Err(Error::LengthMismatch(_))
        ));
        let mut lm = box_landmarks(3);
        lm[2] = LandmarkFrame::new(2, vec![[0.5, 0.5]; LANDMARK_COUNT]).unwrap();
        let err = extract_traces(&frames, &lm, &box_defs(), 30.0).unwrap_err();
        assert!(matches!(err, Error::Frame { frame: 2, .. }), "{err}");
    }
}
