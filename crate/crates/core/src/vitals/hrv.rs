//! Peak detection, inter-beat intervals and RMSSD.

use crate::domain::{Bvp, IbiSeries};
use crate::error::{Error, Result};

/// Times (s) of positive local maxima at least `min_distance_s` apart.
///
/// A candidate is `g[n] > g[n-1]`, `g[n] >= g[n+1]`, `g[n] > 0`. Candidates are
/// accepted highest first; one closer than `min_distance_s` to an accepted peak
/// is discarded.
pub fn detect_peaks(signal: &Bvp, min_distance_s: f64) -> Vec<f64> {
    let g = signal.samples();
    if g.len() < 3 {
        return Vec::new();
    }
    let candidates: Vec<usize> = (1..g.len() - 1)
        .filter(|&n| g[n] > g[n - 1] && g[n] >= g[n + 1] && g[n] > 0.0)
        .collect();
    let mut by_height = candidates.clone();
    // Stable: equal heights keep time order, so the earlier one wins.
    by_height.sort_by(|&a, &b| g[b].total_cmp(&g[a]));
    let fps = signal.fps();
    let mut accepted: Vec<usize> = Vec::new();
    for n in by_height {
        let t = n as f64 / fps;
        if accepted
            .iter()
            .all(|&m| (t - m as f64 / fps).abs() >= min_distance_s)
        {
            accepted.push(n);
        }
    }
    accepted.sort_unstable();
    accepted.into_iter().map(|n| n as f64 / fps).collect()
}

pub fn ibis_from_peaks(times: &[f64]) -> Result<IbiSeries> {
    if times.len() < 2 {
        return Err(Error::InsufficientPeaks(times.len()));
    }
    IbiSeries::new(times.windows(2).map(|w| w[1] - w[0]).collect())
}

/// Drops intervals more than one population standard deviation from the mean.
///
/// Returns the survivors and whether the original series was kept because
/// fewer than two intervals would have survived.
pub fn reject_outliers(ibis: &IbiSeries) -> (IbiSeries, bool) {
    let x = ibis.intervals();
    if x.len() < 2 {
        return (ibis.clone(), false);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let kept: Vec<f64> = x
        .iter()
        .copied()
        .filter(|v| (v - mean).abs() <= sd)
        .collect();
    if kept.len() < 2 {
        return (ibis.clone(), true);
    }
    (
        IbiSeries::new(kept).expect("subset of a valid series"),
        false,
    )
}

/// Root mean square of successive interval differences, in milliseconds.
pub fn rmssd(ibis: &IbiSeries) -> Result<f64> {
    let x = ibis.intervals();
    if x.len() < 2 {
        return Err(Error::InsufficientIntervals(x.len()));
    }
    let sum: f64 = x.windows(2).map(|w| (w[0] - w[1]).powi(2)).sum();
    Ok((sum / (x.len() - 1) as f64).sqrt() * 1000.0)
}
