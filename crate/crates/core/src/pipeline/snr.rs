//! Spectral signal-to-noise ratio of a raw pulse signal.
//!
//! The magnitude spectrum of the mean-removed signal is restricted to the
//! heart-rate band (in bpm) and scaled to unit maximum. A binary window runs
//! from the dominant bin up to `window_bpm` above it; energy inside the
//! window is signal, the rest of the band is noise.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::domain::{Bvp, PipelineConfig};
use crate::error::{Error, Result};

/// Magnitude spectrum of the mean-removed signal, bins `0..=N/2`.
pub(crate) fn magnitude_spectrum(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let m = x.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = x.iter().map(|v| Complex::new(v - m, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    buf[..=n / 2].iter().map(|c| c.norm()).collect()
}

/// SNR in dB of `signal` over `band_bpm` with a window `window_bpm` wide.
pub fn snr_db(signal: &Bvp, band_bpm: [f64; 2], window_bpm: f64) -> Result<f64> {
    let x = signal.samples();
    let n = x.len();
    if n < 8 {
        return Err(Error::SignalTooShort { got: n, need: 8 });
    }
    let spectrum = magnitude_spectrum(x);
    let bin_bpm = 60.0 * signal.fps() / n as f64;
    let band: Vec<(f64, f64)> = spectrum
        .iter()
        .enumerate()
        .map(|(k, &mag)| (k as f64 * bin_bpm, mag))
        .filter(|&(f, _)| f >= band_bpm[0] && f <= band_bpm[1])
        .collect();
    if band.is_empty() {
        return Err(Error::EmptyBand {
            lo_hz: band_bpm[0] / 60.0,
            hi_hz: band_bpm[1] / 60.0,
        });
    }
    let (peak_f, peak_mag) = band
        .iter()
        .copied()
        .fold((0.0, f64::NEG_INFINITY), |best, b| {
            if b.1 > best.1 {
                b
            } else {
                best
            }
        });
    if !(peak_mag > 0.0) {
        return Err(Error::FlatSignal);
    }
    // Bin frequencies are multiples of bin_bpm; tolerate rounding at the window edge.
    let window_hi = peak_f + window_bpm + 1e-9 * bin_bpm;
    let (mut inside, mut outside) = (0.0, 0.0);
    for &(f, mag) in &band {
        let s = mag / peak_mag;
        if f >= peak_f && f <= window_hi {
            inside += s * s;
        } else {
            outside += s * s;
        }
    }
    // Floor keeps a noiseless tone finite (caps the ratio at 150 dB).
    let outside = outside.max(inside * 1e-15);
    Ok(10.0 * (inside / outside).log10())
}

pub fn snr(signal: &Bvp, cfg: &PipelineConfig) -> Result<f64> {
    snr_db(signal, cfg.snr_band_bpm, cfg.snr_window_bpm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};
    use std::f64::consts::PI;

    /// Naive O(N²) DFT; independent of the FFT path.
    fn oracle_snr(x: &[f64], fps: f64, band: [f64; 2], window: f64) -> f64 {
        let n = x.len();
        let m = x.iter().sum::<f64>() / n as f64;
        let mut bins = Vec::new();
        for k in 0..=n / 2 {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, v) in x.iter().enumerate() {
                let ang = -2.0 * PI * (k * t % n) as f64 / n as f64;
                re += (v - m) * ang.cos();
                im += (v - m) * ang.sin();
            }
            let bpm = 60.0 * k as f64 * fps / n as f64;
            if bpm >= band[0] && bpm <= band[1] {
                bins.push((k, (re * re + im * im).sqrt()));
            }
        }
        let (pk, pm) = bins
            .iter()
            .copied()
            .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        let width_bins = window / (60.0 * fps / n as f64);
        let mut num = 0.0;
        let mut den = 0.0;
        for (k, mag) in bins {
            let s2 = (mag / pm).powi(2);
            if k >= pk && (k - pk) as f64 <= width_bins + 1e-9 {
                num += s2;
            } else {
                den += s2;
            }
        }
        10.0 * (num / den).log10()
    }

    fn bvp(x: Vec<f64>) -> Bvp {
        Bvp::new(x, 30.0).unwrap()
    }

    #[test]
    fn clean_tone_is_positive() {
        let x: Vec<f64> = (0..600)
            .map(|i| 120.0 + (2.0 * PI * 1.2 * i as f64 / 30.0).sin())
            .collect();
        assert!(snr_db(&bvp(x), [30.0, 240.0], 3.0).unwrap() > 0.0);
    }

    #[test]
    fn white_noise_is_negative() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x: Vec<f64> = (0..600).map(|_| normal.sample(&mut rng)).collect();
            let got = snr_db(&bvp(x.clone()), [30.0, 240.0], 3.0).unwrap();
            assert!(got < 0.0, "seed {seed}: {got}");
            let want = oracle_snr(&x, 30.0, [30.0, 240.0], 3.0);
            assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0));
        }
    }

    #[test]
    fn two_tones_match_oracle() {
        // 72 and 112 bpm, slightly off-bin to get leakage.
        let x: Vec<f64> = (0..600)
            .map(|i| {
                let t = i as f64 / 30.0;
                (2.0 * PI * 1.2 * t).sin() + (2.0 * PI * (1.2 + 40.0 / 60.0) * t + 0.4).sin()
            })
            .collect();
        let got = snr_db(&bvp(x.clone()), [30.0, 240.0], 3.0).unwrap();
        let want = oracle_snr(&x, 30.0, [30.0, 240.0], 3.0);
        assert!(
            (got - want).abs() <= 1e-9 * want.abs().max(1e-3),
            "{got} vs {want}"
        );
        let y: Vec<f64> = (0..523)
            .map(|i| {
                let t = i as f64 / 30.0;
                (2.0 * PI * 1.13 * t).sin() + (2.0 * PI * (1.13 + 40.0 / 60.0) * t).sin()
            })
            .collect();
        let got = snr_db(&bvp(y.clone()), [30.0, 240.0], 3.0).unwrap();
        let want = oracle_snr(&y, 30.0, [30.0, 240.0], 3.0);
        assert!(
            (got - want).abs() <= 1e-9 * want.abs().max(1e-3),
            "{got} vs {want}"
        );
    }

    #[test]
    fn errors() {
        assert!(matches!(
            snr_db(&bvp(vec![1.0; 600]), [30.0, 240.0], 3.0),
            Err(Error::FlatSignal)
        ));
        assert!(snr_db(&bvp(vec![1.0, 2.0, 3.0]), [30.0, 240.0], 3.0).is_err());
        // 8 samples at 2 fps: bins at 0, 15, 30, 45, 60 bpm; band 200-240 empty.
        let short = Bvp::new((0..8).map(|i| i as f64).collect(), 2.0).unwrap();
        assert!(matches!(
            snr_db(&short, [200.0, 240.0], 3.0),
            Err(Error::EmptyBand { .. })
        ));
    }
}
