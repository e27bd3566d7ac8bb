use std::path::PathBuf;

use crate::domain::{QualityVerdict, RoiId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by front-ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad or missing input files, malformed records, invalid configuration.
    Input,
    /// The recording was rejected by the luminance gate.
    Quality,
    /// The signal could not be turned into a measurement.
    Analysis,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: line {line}: malformed row: {msg}", path.display())]
    MalformedRow {
        path: PathBuf,
        line: u64,
        msg: String,
    },

    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },

    #[error("channel value out of range: {channel} = {value} (expected finite value in [0, 255])")]
    ChannelOutOfRange { channel: char, value: f64 },

    #[error("fps must be finite and > 0, got {0}")]
    InvalidFps(f64),

    #[error("trace too short: {0} frame(s), need at least 2")]
    TraceTooShort(usize),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("invalid value: {0}")]
    Invalid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("frame {frame}: expected 478 landmark points, found {count}")]
    LandmarkCount { frame: usize, count: usize },

    #[error("frame {frame}: landmark {index} coordinate ({x}, {y}) outside [0, 1]")]
    LandmarkOutOfRange {
        frame: usize,
        index: usize,
        x: f64,
        y: f64,
    },

    #[error("non-contiguous frames: expected frame index {expected}, found {found}")]
    NonContiguousFrames { expected: usize, found: usize },

    #[error("degenerate polygon for {0} (zero area in pixel space)")]
    DegeneratePolygon(RoiId),

    #[error("empty mask")]
    EmptyMask,

    #[error("dimension mismatch: image {image_w}x{image_h}, mask {mask_w}x{mask_h}")]
    DimensionMismatch {
        image_w: u32,
        image_h: u32,
        mask_w: u32,
        mask_h: u32,
    },

    #[error("frame {frame}: {source}")]
    Frame {
        frame: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("image decode error: {0}")]
    Image(String),

    #[error("flat signal (zero standard deviation)")]
    FlatSignal,

    #[error("{roi} unusable: {source}")]
    UnusableRoi {
        roi: RoiId,
        #[source]
        source: Box<Error>,
    },

    #[error("signal too short: {got} sample(s), need at least {need}")]
    SignalTooShort { got: usize, need: usize },

    #[error("frequency band {lo_hz:.3}-{hi_hz:.3} Hz holds no spectral bins")]
    EmptyBand { lo_hz: f64, hi_hz: f64 },

    #[error("ica non-convergence after {0} iterations")]
    IcaNonConvergence(usize),

    #[error("peak frequency {freq_hz} Hz outside band {lo_hz}-{hi_hz} Hz")]
    OutOfBand {
        freq_hz: f64,
        lo_hz: f64,
        hi_hz: f64,
    },

    #[error("insufficient peaks for HRV: {0} peak(s)")]
    InsufficientPeaks(usize),

    #[error("insufficient intervals for RMSSD: {0}")]
    InsufficientIntervals(usize),

    #[error("unmeasurable SpO2: {0}")]
    UnmeasurableSpo2(String),

    #[error("no usable ROI")]
    NoUsableRoi,

    #[error("recording rejected by luminance gate: {0}")]
    QualityRejected(QualityVerdict),

    #[error("duplicate recording id: {0}")]
    DuplicateRecording(String),

    #[error("recording {0}: no vital sign present")]
    MissingVitals(String),

    #[error("no recording could be analyzed ({} skipped)", skipped.len())]
    NoAnalyzedRecordings { skipped: Vec<(String, String)> },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            QualityRejected(_) => ErrorClass::Quality,
            FlatSignal
            | UnusableRoi { .. }
            | SignalTooShort { .. }
            | EmptyBand { .. }
            | IcaNonConvergence(_)
            | OutOfBand { .. }
            | InsufficientPeaks(_)
            | InsufficientIntervals(_)
            | UnmeasurableSpo2(_)
            | NoUsableRoi
            | NoAnalyzedRecordings { .. } => ErrorClass::Analysis,
            Frame { source, .. } => source.class(),
            _ => ErrorClass::Input,
        }
    }
}
