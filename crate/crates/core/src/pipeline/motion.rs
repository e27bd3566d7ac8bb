//! Segment-based motion artifact elimination.

use crate::domain::{Bvp, PipelineConfig};
use crate::error::{Error, Result};
use crate::pipeline::normalize::pop_std;
use crate::pipeline::snr::snr;

/// What motion elimination decided for one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionOutcome {
    pub snr_db: f64,
    /// Indices of the samples kept, in time order.
    pub kept: Vec<usize>,
    /// Indices of the segments that were dropped, ascending.
    pub dropped_segments: Vec<usize>,
}

impl MotionOutcome {
    pub fn eliminated(&self) -> bool {
        !self.dropped_segments.is_empty()
    }
}

/// Sample ranges of `segments` equal-length segments; the remainder joins the last.
pub(crate) fn segment_bounds(n: usize, segments: usize) -> Vec<(usize, usize)> {
    let len = n / segments;
    (0..segments)
        .map(|s| {
            let start = s * len;
            let end = if s + 1 == segments { n } else { start + len };
            (start, end)
        })
        .collect()
}

/// Number of segments to drop: `ceil(fraction * segments)`, at least one and
/// never all of them.
pub(crate) fn drop_count(segments: usize, fraction: f64) -> usize {
    let raw = (fraction * segments as f64 - 1e-9).ceil();
    (raw.max(1.0) as usize).min(segments - 1)
}

/// Decides which samples survive. Signals with non-negative SNR are kept whole;
/// otherwise the highest-variance segments are dropped (earliest index wins ties).
pub fn motion_keep(signal: &Bvp, cfg: &PipelineConfig) -> Result<MotionOutcome> {
    let n = signal.len();
    let segments = cfg.motion_segments;
    if segments < 2 || n < segments {
        return Err(Error::SignalTooShort {
            got: n,
            need: segments.max(2),
        });
    }
    let snr_db = snr(signal, cfg)?;
    if snr_db >= 0.0 {
        return Ok(MotionOutcome {
            snr_db,
            kept: (0..n).collect(),
            dropped_segments: Vec::new(),
        });
    }
    let bounds = segment_bounds(n, segments);
    let x = signal.samples();
    let mut ranked: Vec<(usize, f64)> = bounds
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| (i, pop_std(&x[a..b])))
        .collect();
    // Stable sort: equal deviations keep ascending segment order.
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut dropped: Vec<usize> = ranked
        .iter()
        .take(drop_count(segments, cfg.motion_drop_fraction))
        .map(|&(i, _)| i)
        .collect();
    dropped.sort_unstable();
    let kept = bounds
        .iter()
        .enumerate()
        .filter(|(i, _)| !dropped.contains(i))
        .flat_map(|(_, &(a, b))| a..b)
        .collect();
    Ok(MotionOutcome {
        snr_db,
        kept,
        dropped_segments: dropped,
    })
}

pub fn eliminate_motion(signal: &Bvp, cfg: &PipelineConfig) -> Result<Bvp> {
    let outcome = motion_keep(signal, cfg)?;
    if !outcome.eliminated() {
        return Ok(signal.clone());
    }
    let x = signal.samples();
    signal.with_samples(outcome.kept.iter().map(|&i| x[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::PI;

    fn noise(seed: u64, n: usize) -> Vec<f64> {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| normal.sample(&mut rng)).collect()
    }

    #[test]
    fn drop_count_rounds_up() {
        assert_eq!(drop_count(10, 0.05), 1);
        assert_eq!(drop_count(10, 0.1), 1);
        assert_eq!(drop_count(10, 0.15), 2);
        assert_eq!(drop_count(2, 0.99), 1);
    }

    #[test]
    fn clean_tone_is_untouched() {
        let x: Vec<f64> = (0..600)
            .map(|i| (2.0 * PI * 1.2 * i as f64 / 30.0).sin())
            .collect();
        let s = Bvp::new(x, 30.0).unwrap();
        assert_eq!(eliminate_motion(&s, &PipelineConfig::default()).unwrap(), s);
    }

    #[test]
    fn loud_segment_is_removed() {
        let mut x = noise(3, 600);
        // Brute-force oracle: the segment with the largest deviation is the scaled one.
        for v in &mut x[240..300] {
            *v *= 10.0;
        }
        let s = Bvp::new(x.clone(), 30.0).unwrap();
        let cfg = PipelineConfig::default();
        let outcome = motion_keep(&s, &cfg).unwrap();
        assert!(outcome.snr_db < 0.0);
        assert_eq!(outcome.dropped_segments, vec![4]);
        let out = eliminate_motion(&s, &cfg).unwrap();
        assert_eq!(out.len(), 540);
        let want: Vec<f64> = x[..240].iter().chain(&x[300..]).copied().collect();
        assert_eq!(out.samples(), &want[..]);
    }

    #[test]
    fn equal_std_ties_drop_earliest() {
        // Same noise block repeated ten times: equal deviations, negative SNR.
        let block = noise(11, 60);
        let x: Vec<f64> = (0..10).flat_map(|_| block.iter().copied()).collect();
        let s = Bvp::new(x, 30.0).unwrap();
        let outcome = motion_keep(&s, &PipelineConfig::default()).unwrap();
        assert!(outcome.snr_db < 0.0);
        assert_eq!(outcome.dropped_segments, vec![0]);
        assert_eq!(outcome.kept, (60..600).collect::<Vec<_>>());
    }

    #[test]
    fn remainder_joins_last_segment() {
        assert_eq!(segment_bounds(23, 10).last(), Some(&(18, 23)));
        assert_eq!(segment_bounds(23, 10)[0], (0, 2));
    }

    #[test]
    fn too_short() {
        let s = Bvp::new(vec![1.0, 2.0, 3.0], 30.0).unwrap();
        assert!(motion_keep(&s, &PipelineConfig::default()).is_err());
    }

    #[test]
    fn output_length_and_order() {
        for seed in 0..20 {
            let x = noise(100 + seed, 600);
            let s = Bvp::new(x.clone(), 30.0).unwrap();
            let out = eliminate_motion(&s, &PipelineConfig::default()).unwrap();
            assert!(out.len() == 600 || out.len() == 540);
            let kept = motion_keep(&s, &PipelineConfig::default()).unwrap().kept;
            assert!(kept.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
