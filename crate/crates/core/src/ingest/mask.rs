//! ROI polygons, rasterization and masked channel means.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::landmarks::{LandmarkFrame, LANDMARK_COUNT};
use crate::domain::RoiId;
use crate::error::{Error, Result};

const DEFAULT_DEFS: &str = include_str!("../../data/roi_defs.json");

/// A face region as landmark-index polygons. `subtract`, when present, is cut
/// out of the region (the mouth, for the whole-face region).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoiDefinition {
    pub roi: RoiId,
    pub polygon: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subtract: Option<Vec<usize>>,
}

impl RoiDefinition {
    pub fn validate(&self) -> Result<()> {
        let check = |what: &str, idx: &[usize]| {
            if idx.len() < 3 {
                return Err(Error::Invalid(format!(
                    "{} {what} needs at least 3 landmark indices, got {}",
                    self.roi,
                    idx.len()
                )));
            }
            if let Some(bad) = idx.iter().find(|&&i| i >= LANDMARK_COUNT) {
                return Err(Error::Invalid(format!(
                    "{} {what}: landmark index {bad} outside [0, {}]",
                    self.roi,
                    LANDMARK_COUNT - 1
                )));
            }
            Ok(())
        };
        check("polygon", &self.polygon)?;
        if let Some(sub) = &self.subtract {
            check("subtract polygon", sub)?;
        }
        Ok(())
    }

    /// True when neither polygon self-intersects on the given landmarks.
    pub fn is_simple_on(&self, landmarks: &LandmarkFrame) -> bool {
        let simple = |idx: &[usize]| is_simple(&vertices(landmarks, idx, 1.0, 1.0));
        simple(&self.polygon) && self.subtract.as_deref().is_none_or(simple)
    }
}

fn parse_defs(path: &Path, text: &str) -> Result<BTreeMap<RoiId, RoiDefinition>> {
    let defs: Vec<RoiDefinition> =
        serde_json::from_str(text).map_err(|e| Error::format(path, e.to_string()))?;
    if defs.is_empty() {
        return Err(Error::format(path, "no ROI definitions"));
    }
    let mut out = BTreeMap::new();
    for def in defs {
        def.validate()?;
        let roi = def.roi;
        if out.insert(roi, def).is_some() {
            return Err(Error::format(path, format!("{roi} defined more than once")));
        }
    }
    Ok(out)
}

pub fn load_roi_defs(path: impl AsRef<Path>) -> Result<BTreeMap<RoiId, RoiDefinition>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_defs(path, &text)
}

/// The built-in definitions of the three regions.
pub fn default_roi_defs() -> BTreeMap<RoiId, RoiDefinition> {
    parse_defs(Path::new("roi_defs.json"), DEFAULT_DEFS).expect("bundled ROI definitions are valid")
}

/// Row-major binary mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl Mask {
    pub fn new(width: u32, height: u32) -> Self {
        Mask {
            width,
            height,
            bits: vec![false; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, f: impl Fn(u32, u32) -> bool) -> Self {
        let mut m = Mask::new(width, height);
        for y in 0..height {
            for x in 0..width {
                m.set(x, y, f(x, y));
            }
        }
        m
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[y as usize * self.width as usize + x as usize]
    }

    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        self.bits[y as usize * self.width as usize + x as usize] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

fn vertices(landmarks: &LandmarkFrame, idx: &[usize], width: f64, height: f64) -> Vec<[f64; 2]> {
    idx.iter()
        .map(|&i| {
            let [x, y] = landmarks.points()[i];
            [x * width, y * height]
        })
        .collect()
}

fn shoelace_area(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            a[0] * b[1] - b[0] * a[1]
        })
        .sum();
    0.5 * twice.abs()
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// No two non-adjacent edges properly intersect.
pub(crate) fn is_simple(poly: &[[f64; 2]]) -> bool {
    let n = poly.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_cross(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

/// Fills pixels whose centers lie inside `poly` (even-odd rule).
fn rasterize(poly: &[[f64; 2]], mask: &mut Mask, value: bool) {
    let n = poly.len();
    let mut crossings = Vec::with_capacity(n);
    for row in 0..mask.height {
        let yc = row as f64 + 0.5;
        crossings.clear();
        for i in 0..n {
            let (a, b) = (poly[i], poly[(i + 1) % n]);
            if (a[1] > yc) != (b[1] > yc) {
                crossings.push(a[0] + (yc - a[1]) * (b[0] - a[0]) / (b[1] - a[1]));
            }
        }
        crossings.sort_by(f64::total_cmp);
        for span in crossings.chunks_exact(2) {
            // Pixel x is inside when span[0] <= x + 0.5 < span[1].
            let first = (span[0] - 0.5).ceil().max(0.0);
            let last = (span[1] - 0.5).ceil().min(mask.width as f64);
            if first >= last {
                continue;
            }
            for col in first as u32..last as u32 {
                mask.set(col, row, value);
            }
        }
    }
}

/// Rasterizes `def` over the landmarks scaled to a `width` x `height` frame.
pub fn roi_mask(
    landmarks: &LandmarkFrame,
    def: &RoiDefinition,
    width: u32,
    height: u32,
) -> Result<Mask> {
    if width == 0 || height == 0 {
        return Err(Error::Invalid(format!(
            "mask size must be positive, got {width}x{height}"
        )));
    }
    def.validate()?;
    let (w, h) = (width as f64, height as f64);
    let outer = vertices(landmarks, &def.polygon, w, h);
    if shoelace_area(&outer) <= 1e-9 {
        return Err(Error::DegeneratePolygon(def.roi));
    }
    let mut mask = Mask::new(width, height);
    rasterize(&outer, &mut mask, true);
    if let Some(sub) = &def.subtract {
        // A closed mouth has no interior to remove.
        let inner = vertices(landmarks, sub, w, h);
        if shoelace_area(&inner) > 1e-9 {
            rasterize(&inner, &mut mask, false);
        }
    }
    Ok(mask)
}

/// Mean R, G, B over the pixels selected by `mask`.
pub fn extract_roi_means(frame: &RgbImage, mask: &Mask) -> Result<[f64; 3]> {
    if frame.width() != mask.width || frame.height() != mask.height {
        return Err(Error::DimensionMismatch {
            image_w: frame.width(),
            image_h: frame.height(),
            mask_w: mask.width,
            mask_h: mask.height,
        });
    }
    let mut sums = [0u64; 3];
    let mut count = 0u64;
    for (p, &inside) in frame.pixels().zip(&mask.bits) {
        if inside {
            for c in 0..3 {
                sums[c] += p[c] as u64;
            }
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(sums.map(|s| s as f64 / count as f64))
}
