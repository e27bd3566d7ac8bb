#![allow(dead_code)]

use std::path::{Path, PathBuf};

use rppg_core::ingest::write_trace;
use rppg_core::synth::{synth_recording, SynthSpec};

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

/// Noise-free tone with no drift or step. Tones whose period is a whole
/// number of frames and whose frequency sits on a spectral bin give exact
/// HR and zero RMSSD.
pub fn clean_tone(pulse_hz: f64) -> SynthSpec {
    SynthSpec {
        pulse_hz,
        trend_per_s: 0.0,
        step: None,
        noise_sd: 0.0,
        ..SynthSpec::default()
    }
}

/// Writes the four trace recordings named in `eval/ground_truth.csv`:
/// 56.25 bpm for `steady_a` and `steady_c`, 112.5 bpm for the others.
pub fn write_eval_dataset(dir: &Path) {
    for (id, hz) in [
        ("steady_a", 0.9375),
        ("steady_b", 1.875),
        ("steady_c", 0.9375),
        ("motion_a", 1.875),
    ] {
        let traces = synth_recording(&clean_tone(hz), [1.0, 1.0, 1.0]);
        write_trace(&traces, dir.join(format!("{id}.csv"))).unwrap();
    }
}
