//! Face-mesh landmark files.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

pub const LANDMARK_COUNT: usize = 478;

/// The 478 normalized `(x, y)` face landmarks of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LandmarkFrame {
    frame_index: usize,
    points: Vec<[f64; 2]>,
}

impl LandmarkFrame {
    pub fn new(frame_index: usize, points: Vec<[f64; 2]>) -> Result<Self> {
        if points.len() != LANDMARK_COUNT {
            return Err(Error::LandmarkCount {
                frame: frame_index,
                count: points.len(),
            });
        }
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if let Some((index, p)) = points
            .iter()
            .enumerate()
            .find(|(_, p)| !unit(p[0]) || !unit(p[1]))
        {
            return Err(Error::LandmarkOutOfRange {
                frame: frame_index,
                index,
                x: p[0],
                y: p[1],
            });
        }
        Ok(LandmarkFrame {
            frame_index,
            points,
        })
    }

    pub fn frame_index(&self) -> usize {
        self.frame_index
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Option<[f64; 2]> {
        self.points.get(index).copied()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrame {
    frame: usize,
    points: Vec<[f64; 2]>,
}

/// Parses landmark JSON; `path` only labels errors.
pub fn parse_landmarks(path: &Path, text: &str) -> Result<Vec<LandmarkFrame>> {
    let mut raw: Vec<RawFrame> =
        serde_json::from_str(text).map_err(|e| Error::format(path, e.to_string()))?;
    raw.sort_by_key(|f| f.frame);
    raw.into_iter()
        .enumerate()
        .map(|(expected, f)| {
            if f.frame != expected {
                return Err(Error::NonContiguousFrames {
                    expected,
                    found: f.frame,
                });
            }
            LandmarkFrame::new(f.frame, f.points)
        })
        .collect()
}

pub fn load_landmarks(path: impl AsRef<Path>) -> Result<Vec<LandmarkFrame>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_landmarks(path, &text)
}
