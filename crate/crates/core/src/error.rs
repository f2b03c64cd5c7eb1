use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the detection, feature, training and
/// evaluation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read audio file {path}: {reason}")]
    UnreadableAudio { path: PathBuf, reason: String },

    #[error("unsupported audio encoding in {path}: {detail}")]
    UnsupportedEncoding { path: PathBuf, detail: String },

    #[error("empty audio")]
    EmptyAudio,

    #[error("clip of {samples} samples is shorter than one analysis window of {window}")]
    ClipTooShort { samples: usize, window: usize },

    #[error("band [{lo_hz}, {hi_hz}] Hz does not intersect any spectrogram bin")]
    EmptyBand { lo_hz: f64, hi_hz: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible pulse packing: {0}")]
    InfeasiblePacking(String),

    #[error("event {0} has no pulses")]
    EmptyEvent(String),

    #[error("empty time span [{t0}, {t1}] s")]
    EmptySpan { t0: f64, t1: f64 },

    #[error("expected {expected} values, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty input set")]
    EmptySet,

    #[error("malformed layer sizes {0:?}: expected [18, h1, h2, h3, 5]")]
    MalformedLayers(Vec<usize>),

    #[error("training diverged: non-finite loss at epoch {epoch}")]
    Diverged { epoch: usize },

    #[error("corrupt model file: {0}")]
    CorruptModel(String),

    #[error("unsupported model format version {found} (expected {expected})")]
    UnsupportedVersion { found: u64, expected: u64 },

    #[error("degenerate truth set: need at least one positive and one negative")]
    DegenerateTruth,

    #[error("bins_per_day {0} does not divide 1440")]
    BadBinsPerDay(u32),

    #[error("polar latitude {0} not supported (|lat| must be < 66)")]
    PolarLatitude(f64),

    #[error("config line {line}: {detail}")]
    Config { line: usize, detail: String },

    #[error("format error in {path}: {detail}")]
    Format { path: PathBuf, detail: String },

    #[error("labels reference unknown event ids: {0:?}")]
    UnknownEventIds(Vec<String>),

    #[error("need at least 2 distinct score classes, found {0}")]
    InsufficientClasses(usize),

    #[error("all {0} inputs failed")]
    AllInputsFailed(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
