//! Luminance quality gate.
//!
//! Per-frame luma statistics decide whether a recording is analyzable as is,
//! needs histogram equalization first, or must be rejected.

use image::{Rgb, RgbImage};
use serde::{Deserialize, Serialize};

use crate::domain::QualityVerdict;
use crate::error::{Error, Result};

/// Recordings darker than this mean luma are equalized before analysis.
pub const DARK_MEAN: f64 = 75.0;
pub const LOW_CONTRAST_FRACTION: f64 = 0.65;
/// Largest allowed spread of per-frame mean luma across a recording.
pub const Y_VARIATION: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LuminanceThresholds {
    pub dark_mean: f64,
    pub low_contrast: f64,
    pub y_variation: f64,
}

impl Default for LuminanceThresholds {
    fn default() -> Self {
        LuminanceThresholds {
            dark_mean: DARK_MEAN,
            low_contrast: LOW_CONTRAST_FRACTION,
            y_variation: Y_VARIATION,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameStats {
    pub mean_gray: f64,
    pub p1_gray: f64,
    pub p99_gray: f64,
    pub mean_y: f64,
}

impl FrameStats {
    pub fn new(mean_gray: f64, p1_gray: f64, p99_gray: f64, mean_y: f64) -> Result<Self> {
        let in_range = |v: f64| v.is_finite() && (0.0..=255.0).contains(&v);
        if ![mean_gray, p1_gray, p99_gray, mean_y]
            .into_iter()
            .all(in_range)
            || p1_gray > p99_gray
        {
            return Err(Error::Invalid(format!(
                "frame stats out of range: mean {mean_gray}, p1 {p1_gray}, p99 {p99_gray}, y {mean_y}"
            )));
        }
        Ok(FrameStats {
            mean_gray,
            p1_gray,
            p99_gray,
            mean_y,
        })
    }

    pub fn contrast_ratio(&self) -> f64 {
        (self.p99_gray - self.p1_gray) / 255.0
    }
}

/// ITU-R BT.601 luma, shared by the grayscale conversion and the Y of YCrCb.
pub fn luma(p: &Rgb<u8>) -> f64 {
    0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64
}

/// Linear-interpolated percentile of sorted data (`q` in `[0, 100]`).
pub(crate) fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn frame_stats(frame: &RgbImage) -> Result<FrameStats> {
    if frame.width() == 0 || frame.height() == 0 {
        return Err(Error::Invalid("empty image".into()));
    }
    let mut gray: Vec<f64> = frame.pixels().map(luma).collect();
    let mean = gray.iter().sum::<f64>() / gray.len() as f64;
    gray.sort_by(f64::total_cmp);
    let clamp = |v: f64| v.clamp(0.0, 255.0);
    FrameStats::new(
        clamp(mean),
        clamp(percentile_sorted(&gray, 1.0)),
        clamp(percentile_sorted(&gray, 99.0)),
        clamp(mean),
    )
}

/// True when the 1st-99th percentile luma range covers less than
/// `threshold` of the full 0-255 scale.
pub fn is_low_contrast(stats: &FrameStats, threshold: f64) -> bool {
    stats.contrast_ratio() < threshold
}

fn median_contrast(stats: &[FrameStats]) -> f64 {
    let mut ratios: Vec<f64> = stats.iter().map(FrameStats::contrast_ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let n = ratios.len();
    if n % 2 == 1 {
        ratios[n / 2]
    } else {
        0.5 * (ratios[n / 2 - 1] + ratios[n / 2])
    }
}

/// Classifies a recording from its per-frame statistics.
///
/// `equalized` holds statistics of the histogram-equalized frames; it is only
/// consulted for dark recordings, whose contrast is judged after enhancement.
/// Without it a dark low-contrast recording is rejected as too dark.
pub fn assess(
    stats: &[FrameStats],
    equalized: Option<&[FrameStats]>,
    thresholds: &LuminanceThresholds,
) -> Result<QualityVerdict> {
    if stats.is_empty() {
        return Err(Error::Invalid("no frames to assess".into()));
    }
    let mean = stats.iter().map(|s| s.mean_gray).sum::<f64>() / stats.len() as f64;
    let dark = mean < thresholds.dark_mean;
    let contrast_basis = match (dark, equalized) {
        (true, Some(eq)) if !eq.is_empty() => eq,
        _ => stats,
    };
    if median_contrast(contrast_basis) < thresholds.low_contrast {
        return Ok(if dark {
            QualityVerdict::TooDark
        } else {
            QualityVerdict::LowContrast
        });
    }
    let (lo, hi) = stats
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.mean_y), hi.max(s.mean_y))
        });
    if hi - lo > thresholds.y_variation {
        return Ok(QualityVerdict::VaryingLight);
    }
    Ok(if dark {
        QualityVerdict::Enhanced
    } else {
        QualityVerdict::Good
    })
}

/// Level map of luma histogram equalization: `level -> round(255 * cdf(level) / N)`.
pub fn equalization_map(levels: &[u8]) -> [u8; 256] {
    let mut hist = [0u64; 256];
    for &l in levels {
        hist[l as usize] += 1;
    }
    let total = levels.len().max(1) as f64;
    let mut map = [0u8; 256];
    let mut cdf = 0u64;
    for (level, count) in hist.iter().enumerate() {
        cdf += count;
        map[level] = (255.0 * cdf as f64 / total).round().clamp(0.0, 255.0) as u8;
    }
    map
}

/// Equalizes the luma histogram and rescales each pixel's RGB by the luma
/// ratio, which leaves chromaticity unchanged. Black pixels stay black.
pub fn hist_equalize(frame: &RgbImage) -> RgbImage {
    let lumas: Vec<f64> = frame.pixels().map(luma).collect();
    let levels: Vec<u8> = lumas
        .iter()
        .map(|y| y.round().clamp(0.0, 255.0) as u8)
        .collect();
    let map = equalization_map(&levels);
    let mut out = frame.clone();
    for ((p, &y), &level) in out.pixels_mut().zip(&lumas).zip(&levels) {
        if y <= 0.0 {
            continue;
        }
        let gain = map[level as usize] as f64 / y;
        for c in 0..3 {
            p[c] = (p[c] as f64 * gain).round().clamp(0.0, 255.0) as u8;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gray_image(w: u32, h: u32, f: impl Fn(u32, u32) -> u8) -> RgbImage {
        RgbImage::from_fn(w, h, |x, y| {
            let v = f(x, y);
            Rgb([v, v, v])
        })
    }

    fn stats(mean: f64, p1: f64, p99: f64) -> FrameStats {
        FrameStats::new(mean, p1, p99, mean).unwrap()
    }

    fn mean_luma(img: &RgbImage) -> f64 {
        img.pixels().map(luma).sum::<f64>() / (img.width() * img.height()) as f64
    }

    #[test]
    fn stats_examples() {
        let black = frame_stats(&gray_image(10, 10, |_, _| 0)).unwrap();
        assert_eq!(
            (black.mean_gray, black.p1_gray, black.p99_gray),
            (0.0, 0.0, 0.0)
        );
        let white = frame_stats(&gray_image(10, 10, |_, _| 255)).unwrap();
        assert!((white.mean_gray - 255.0).abs() < 1e-9);
        let half = frame_stats(&gray_image(10, 10, |x, _| if x < 5 { 0 } else { 255 })).unwrap();
        assert!((half.mean_gray - 127.5).abs() < 1e-9);
        assert_eq!(half.p1_gray, 0.0);
        assert!((half.p99_gray - 255.0).abs() < 1e-9);
        assert_eq!(half.mean_y, half.mean_gray);
        assert!(frame_stats(&RgbImage::new(0, 0)).is_err());
    }

    #[test]
    fn percentile_interpolates() {
        let sorted: Vec<f64> = (0..=100).map(f64::from).collect();
        assert!((percentile_sorted(&sorted, 1.0) - 1.0).abs() < 1e-12);
        assert!((percentile_sorted(&[0.0, 10.0], 25.0) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn contrast_examples() {
        assert!(!is_low_contrast(&stats(127.0, 0.0, 255.0), 0.65));
        assert!(is_low_contrast(&stats(127.0, 100.0, 150.0), 0.65));
        assert!(!is_low_contrast(&stats(127.0, 100.0, 100.0), 0.0));
    }

    #[test]
    fn assess_examples() {
        let t = LuminanceThresholds::default();
        let good = vec![stats(200.0, 10.0, 250.0); 20];
        assert_eq!(assess(&good, None, &t).unwrap(), QualityVerdict::Good);

        let varying: Vec<FrameStats> = (0..20)
            .map(|i| stats(if i % 2 == 0 { 100.0 } else { 120.0 }, 0.0, 255.0))
            .collect();
        assert_eq!(
            assess(&varying, None, &t).unwrap(),
            QualityVerdict::VaryingLight
        );

        let dark = vec![stats(60.0, 5.0, 240.0); 20];
        assert_eq!(assess(&dark, None, &t).unwrap(), QualityVerdict::Enhanced);

        let flat = vec![stats(130.0, 120.0, 140.0); 20];
        assert_eq!(
            assess(&flat, None, &t).unwrap(),
            QualityVerdict::LowContrast
        );

        let dark_flat = vec![stats(40.0, 35.0, 45.0); 5];
        assert_eq!(
            assess(&dark_flat, None, &t).unwrap(),
            QualityVerdict::TooDark
        );
        let rescued = vec![stats(128.0, 2.0, 250.0); 5];
        assert_eq!(
            assess(&dark_flat, Some(&rescued), &t).unwrap(),
            QualityVerdict::Enhanced
        );
        let still_flat = vec![stats(200.0, 190.0, 210.0); 5];
        assert_eq!(
            assess(&dark_flat, Some(&still_flat), &t).unwrap(),
            QualityVerdict::TooDark
        );
        assert!(assess(&[], None, &t).is_err());
    }

    #[test]
    fn equalize_ramp_is_near_fixed_point() {
        let ramp = gray_image(256, 4, |x, _| x as u8);
        let out = hist_equalize(&ramp);
        for (a, b) in ramp.pixels().zip(out.pixels()) {
            assert!((a[0] as i32 - b[0] as i32).abs() <= 1);
        }
    }

    #[test]
    fn equalize_constant_maps_to_white() {
        let out = hist_equalize(&gray_image(8, 8, |_, _| 128));
        assert!(out
            .pixels()
            .all(|p| p[0] == 255 && p[1] == 255 && p[2] == 255));
    }

    #[test]
    fn equalize_brightens_dark_image() {
        let dark = RgbImage::from_fn(32, 32, |x, y| {
            let v = ((x + 2 * y) % 60) as u8 + 5;
            Rgb([v, v.saturating_add(4), v / 2 + 1])
        });
        let out = hist_equalize(&dark);
        assert!(mean_luma(&out) > mean_luma(&dark));
    }

    #[test]
    fn equalize_keeps_black() {
        let img = RgbImage::from_fn(4, 4, |x, _| {
            if x == 0 {
                Rgb([0, 0, 0])
            } else {
                Rgb([50, 60, 70])
            }
        });
        assert_eq!(hist_equalize(&img).get_pixel(0, 0), &Rgb([0, 0, 0]));
    }

    fn max_bin(img: &RgbImage) -> u32 {
        let mut hist = [0u32; 256];
        for p in img.pixels() {
            hist[luma(p).round() as usize] += 1;
        }
        *hist.iter().max().unwrap()
    }

    proptest! {
        // Up to 255 pixels every occupied level moves the CDF by at least one
        // output step, so no two levels merge.
        #[test]
        fn equalized_histogram_is_flatter(pixels in prop::collection::vec(any::<u8>(), 2..=225)) {
            let distinct = pixels.iter().collect::<std::collections::BTreeSet<_>>().len();
            prop_assume!(distinct >= 2);
            let w = pixels.len() as u32;
            let img = gray_image(w, 1, |x, _| pixels[x as usize]);
            prop_assert!(max_bin(&hist_equalize(&img)) <= max_bin(&img));
        }

        #[test]
        fn varying_light_ignores_order(mut ys in prop::collection::vec(80.0f64..200.0, 1..40), seed in any::<u64>()) {
            let t = LuminanceThresholds::default();
            let frames: Vec<FrameStats> = ys.iter().map(|&y| stats(y, 0.0, 255.0)).collect();
            let before = assess(&frames, None, &t).unwrap();
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            ys.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let shuffled: Vec<FrameStats> = ys.iter().map(|&y| stats(y, 0.0, 255.0)).collect();
            prop_assert_eq!(before, assess(&shuffled, None, &t).unwrap());
        }

        #[test]
        fn low_contrast_monotone_in_threshold(p1 in 0.0f64..255.0, span in 0.0f64..255.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let s = stats(p1, p1, (p1 + span).min(255.0));
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(!is_low_contrast(&s, lo) || is_low_contrast(&s, hi));
        }
    }
}
