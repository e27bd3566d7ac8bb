//! Contactless heart rate, HRV and SpO₂ from face-region color traces.
//!
//! A recording enters either as per-frame ROI channel means ([`ingest::load_trace`])
//! or as frames plus face landmarks ([`recording::Recording::from_frames`]). Each
//! ROI trace is cleaned into a pulse signal ([`pipeline::process_roi`]), the ROI
//! with the strongest in-band spectral peak is selected, and vitals are read
//! off it ([`vitals::analyze`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod error;
pub mod eval;
pub mod format;
pub mod ingest;
pub mod luminance;
pub mod pipeline;
pub mod recording;
pub mod synth;
pub mod vitals;

pub use domain::{
    Bvp, Flag, IbiSeries, PipelineConfig, Psd, QualityVerdict, RoiId, RoiTrace, VitalsReport,
};
pub use error::{Error, ErrorClass, Result};
pub use recording::Recording;
pub use vitals::{analyze, analyze_detailed, Analysis};
