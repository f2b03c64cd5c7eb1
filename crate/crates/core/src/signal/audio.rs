//! Waveform ingestion.
//!
//! Clips are mono `f64` sequences scaled to full scale `[-1, 1]`. The start
//! time of a recording is taken from a `YYYYMMDD_HHMMSS` stamp in the file
//! name, which is how long deployment archives are usually organised.

use std::path::Path;
use std::sync::OnceLock;

use chrono::{DateTime, NaiveDateTime, TimeDelta, Utc};
use regex::Regex;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
    pub start_utc: DateTime<Utc>,
    pub source_id: String,
    /// Set when no timestamp could be recovered and `start_utc` is the epoch.
    pub timestamp_missing: bool,
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32, source_id: impl Into<String>) -> Self {
        Self {
            samples,
            sample_rate_hz,
            start_utc: DateTime::UNIX_EPOCH,
            source_id: source_id.into(),
            timestamp_missing: true,
        }
    }

    pub fn with_start(mut self, start_utc: DateTime<Utc>) -> Self {
        self.start_utc = start_utc;
        self.timestamp_missing = false;
        self
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// Checks the downstream invariants: non-empty, and a sample rate that can
    /// represent `band_hi_hz`.
    pub fn validate(&self, band_hi_hz: f64) -> Result<()> {
        if self.samples.is_empty() {
            return Err(Error::EmptyAudio);
        }
        if (self.sample_rate_hz as f64) < 2.0 * band_hi_hz {
            return Err(Error::InvalidParameter(format!(
                "sample rate {} Hz cannot represent band edge {band_hi_hz} Hz",
                self.sample_rate_hz
            )));
        }
        Ok(())
    }

    /// Absolute time of a clip-relative offset.
    pub fn utc_at(&self, offset_s: f64) -> DateTime<Utc> {
        self.start_utc + TimeDelta::microseconds((offset_s * 1e6).round() as i64)
    }

    /// Sample index range covering `[t0, t1]` seconds, clipped to the clip.
    pub fn sample_range(&self, t0: f64, t1: f64) -> std::ops::Range<usize> {
        let fs = self.sample_rate_hz as f64;
        let n = self.samples.len();
        let a = ((t0 * fs).round().max(0.0) as usize).min(n);
        let b = ((t1 * fs).round().max(0.0) as usize).min(n);
        a..b.max(a)
    }
}

fn stamp_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(\d{8}_\d{6})").expect("static regex"))
}

/// Extracts the first `YYYYMMDD_HHMMSS` stamp from a file name.
pub fn parse_filename_timestamp(name: &str) -> Option<DateTime<Utc>> {
    stamp_regex()
        .captures_iter(name)
        .filter_map(|c| NaiveDateTime::parse_from_str(&c[1], "%Y%m%d_%H%M%S").ok())
        .map(|t| t.and_utc())
        .next()
}

/// Reads a linear-PCM WAV file (16-bit integer or 32-bit float). Only the
/// first channel is kept.
pub fn load_audio(path: impl AsRef<Path>) -> Result<AudioClip> {
    let path = path.as_ref();
    let unreadable = |reason: String| Error::UnreadableAudio { path: path.to_path_buf(), reason };

    let mut reader = hound::WavReader::open(path).map_err(|e| match e {
        hound::Error::Unsupported => Error::UnsupportedEncoding {
            path: path.to_path_buf(),
            detail: "unsupported WAV variant".into(),
        },
        other => unreadable(other.to_string()),
    })?;
    let spec = reader.spec();
    let channels = spec.channels.max(1) as usize;

    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .samples::<i16>()
            .map(|s| s.map(|v| v as f64 / i16::MAX as f64))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| unreadable(e.to_string()))?,
        (hound::SampleFormat::Float, 32) => reader
            .samples::<f32>()
            .map(|s| s.map(|v| v as f64))
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| unreadable(e.to_string()))?,
        (fmt, bits) => {
            return Err(Error::UnsupportedEncoding {
                path: path.to_path_buf(),
                detail: format!("{bits}-bit {fmt:?}"),
            })
        }
    };

    let samples: Vec<f64> = interleaved
        .into_iter()
        .step_by(channels)
        .map(|v| v.clamp(-1.0, 1.0))
        .collect();
    if samples.is_empty() {
        return Err(Error::EmptyAudio);
    }

    let file_name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    let source_id = path
        .file_stem()
        .and_then(|n| n.to_str())
        .unwrap_or_default()
        .to_string();
    let clip = AudioClip::new(samples, spec.sample_rate, source_id);
    Ok(match parse_filename_timestamp(file_name) {
        Some(t) => clip.with_start(t),
        None => {
            log::warn!("{}: no YYYYMMDD_HHMMSS stamp in file name, using epoch", path.display());
            clip
        }
    })
}

/// Encodes samples as a 16-bit mono WAV byte stream.
pub fn encode_wav_i16(samples: &[f64], sample_rate_hz: u32) -> Result<Vec<u8>> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: sample_rate_hz,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut buf = std::io::Cursor::new(Vec::new());
    {
        let mut w = hound::WavWriter::new(&mut buf, spec).map_err(wav_write_err)?;
        for &s in samples {
            let v = (s.clamp(-1.0, 1.0) * i16::MAX as f64).round() as i16;
            w.write_sample(v).map_err(wav_write_err)?;
        }
        w.finalize().map_err(wav_write_err)?;
    }
    Ok(buf.into_inner())
}

/// Writes a clip as a 16-bit mono WAV file.
pub fn write_wav_i16(path: impl AsRef<Path>, clip: &AudioClip) -> Result<()> {
    let bytes = encode_wav_i16(&clip.samples, clip.sample_rate_hz)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

fn wav_write_err(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io) => Error::Io(io),
        other => Error::InvalidParameter(other.to_string()),
    }
}
