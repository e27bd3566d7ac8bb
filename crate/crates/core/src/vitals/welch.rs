//! Welch power spectral density.
//!
//! Hann-windowed segments (periodic window), each mean-removed, zero-padded to
//! the FFT length, and averaged. One-sided density scaling: power per Hz with
//! every bin except DC and Nyquist doubled.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::domain::{Bvp, PipelineConfig, Psd};
use crate::error::{Error, Result};

pub const MIN_LEN: usize = 16;

pub fn welch(signal: &Bvp, segment_len: usize, overlap: f64, fft_len: usize) -> Result<Psd> {
    let x = signal.samples();
    let n = x.len();
    if n < MIN_LEN {
        return Err(Error::SignalTooShort {
            got: n,
            need: MIN_LEN,
        });
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::Invalid(format!(
            "welch overlap must be in [0, 1), got {overlap}"
        )));
    }
    let seg = segment_len.clamp(2, n);
    let nfft = fft_len.max(seg);
    let noverlap = ((seg as f64) * overlap).floor() as usize;
    let hop = (seg - noverlap).max(1);
    let window: Vec<f64> = (0..seg)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / seg as f64).cos())
        .collect();
    let win_power: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::new().plan_fft_forward(nfft);

    let bins = nfft / 2 + 1;
    let mut acc = vec![0.0; bins];
    let mut count = 0usize;
    let mut buf = vec![Complex::new(0.0, 0.0); nfft];
    let mut start = 0;
    while start + seg <= n {
        let chunk = &x[start..start + seg];
        let m = chunk.iter().sum::<f64>() / seg as f64;
        buf.iter_mut().for_each(|c| *c = Complex::new(0.0, 0.0));
        for (i, (&v, &w)) in chunk.iter().zip(&window).enumerate() {
            buf[i] = Complex::new((v - m) * w, 0.0);
        }
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf) {
            *a += c.norm_sqr();
        }
        count += 1;
        start += hop;
    }

    let fs = signal.fps();
    let scale = 1.0 / (fs * win_power * count as f64);
    let power: Vec<f64> = acc
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let one_sided = if k == 0 || (nfft.is_multiple_of(2) && k == nfft / 2) {
                1.0
            } else {
                2.0
            };
            p * scale * one_sided
        })
        .collect();
    let freqs = (0..bins).map(|k| k as f64 * fs / nfft as f64).collect();
    Psd::new(freqs, power)
}

pub fn welch_psd(signal: &Bvp, cfg: &PipelineConfig) -> Result<Psd> {
    welch(
        signal,
        cfg.welch_segment_len,
        cfg.welch_overlap,
        cfg.welch_fft_len,
    )
}
