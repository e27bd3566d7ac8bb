//! Synthetic ROI traces with a known cardiac frequency.
//!
//! Each channel is `dc + pulse_weight * amplitude * sin(2π f t) + slope * t`
//! plus an optional step and white Gaussian noise, clamped to `[0, 255]`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::domain::{RoiId, RoiTrace};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub fps: f64,
    pub duration_s: f64,
    pub pulse_hz: f64,
    pub pulse_amplitude: f64,
    /// Fraction of the pulse amplitude present in R, G, B.
    pub pulse_weights: [f64; 3],
    pub dc: [f64; 3],
    /// Linear illumination drift per second, shared by all channels.
    pub trend_per_s: f64,
    /// `(time_s, height)` of a step shared by all channels.
    pub step: Option<(f64, f64)>,
    pub noise_sd: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            fps: 30.0,
            duration_s: 20.0,
            pulse_hz: 1.2,
            pulse_amplitude: 1.0,
            pulse_weights: [0.0, 1.0, 0.0],
            dc: [150.0, 120.0, 100.0],
            trend_per_s: 0.25,
            step: Some((7.0, 10.0)),
            noise_sd: 0.2,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn frames(&self) -> usize {
        (self.duration_s * self.fps).round() as usize
    }

    pub fn channels(&self, roi: RoiId) -> [Vec<f64>; 3] {
        let mut rng =
            ChaCha8Rng::seed_from_u64(self.seed.wrapping_mul(31).wrapping_add(roi as u64));
        let normal = Normal::new(0.0, self.noise_sd.max(0.0)).expect("finite noise level");
        let n = self.frames();
        let mut out: [Vec<f64>; 3] = Default::default();
        for i in 0..n {
            let t = i as f64 / self.fps;
            let pulse = self.pulse_amplitude * (2.0 * PI * self.pulse_hz * t).sin();
            let step = match self.step {
                Some((at, height)) if t >= at => height,
                _ => 0.0,
            };
            for c in 0..3 {
                let noise = if self.noise_sd > 0.0 {
                    normal.sample(&mut rng)
                } else {
                    0.0
                };
                let v = self.dc[c]
                    + self.pulse_weights[c] * pulse
                    + self.trend_per_s * t
                    + step
                    + noise;
                out[c].push(v.clamp(0.0, 255.0));
            }
        }
        out
    }
}

pub fn synth_trace(roi: RoiId, spec: &SynthSpec) -> RoiTrace {
    let [r, g, b] = spec.channels(roi);
    RoiTrace::new(roi, spec.fps, r, g, b).expect("synthetic trace is valid")
}

/// Three ROIs from one base spec; `amplitudes` scales the pulse per ROI.
pub fn synth_recording(spec: &SynthSpec, amplitudes: [f64; 3]) -> BTreeMap<RoiId, RoiTrace> {
    RoiId::ALL
        .iter()
        .zip(amplitudes)
        .map(|(&roi, amp)| {
            let s = SynthSpec {
                pulse_amplitude: spec.pulse_amplitude * amp,
                ..spec.clone()
            };
            (roi, synth_trace(roi, &s))
        })
        .collect()
}
