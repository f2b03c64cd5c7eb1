//! Energy-based pulse-train detection on the spectrogram.
//!
//! The pipeline is `compute_spectrogram → binarize → extract_pulses →
//! group_pulse_trains`. Binarization compresses the dB image to one bit with a
//! noise-relative threshold; connected regions of set cells become pulses, and
//! runs of closely spaced pulses become candidate events.

mod components;
mod grouping;
mod mask;

use std::io::{BufRead, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{compute_spectrogram, AudioClip, StftParams};

pub use components::extract_pulses;
pub use grouping::{event_id_for, group_pulse_trains};
pub use mask::{binarize, BinaryMask};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
    /// Percentile of in-band cells used as the noise reference.
    pub binarize_pct: f64,
    /// Margin above the reference percentile, dB.
    pub binarize_offset_db: f64,
    pub pulse_dur_min_s: f64,
    pub pulse_dur_max_s: f64,
    /// Largest onset-to-onset gap allowed inside one train.
    pub max_gap_s: f64,
    pub min_pulses: usize,
    pub train_dur_min_s: f64,
    pub train_dur_max_s: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            band_lo_hz: 100.0,
            band_hi_hz: 1400.0,
            binarize_pct: 85.0,
            binarize_offset_db: 6.0,
            pulse_dur_min_s: 0.02,
            pulse_dur_max_s: 0.10,
            max_gap_s: 1.5,
            min_pulses: 5,
            train_dur_min_s: 5.0,
            train_dur_max_s: 90.0,
        }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<()> {
        let gate = |name: &str, lo: f64, hi: f64| {
            if lo < hi && lo.is_finite() && hi.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name}: need min < max, got [{lo}, {hi}]")))
            }
        };
        gate("band", self.band_lo_hz, self.band_hi_hz)?;
        gate("pulse duration", self.pulse_dur_min_s, self.pulse_dur_max_s)?;
        gate("train duration", self.train_dur_min_s, self.train_dur_max_s)?;
        if self.min_pulses < 2 {
            return Err(Error::InvalidParameter("min_pulses must be >= 2".into()));
        }
        if !(0.0..=100.0).contains(&self.binarize_pct) {
            return Err(Error::InvalidParameter("binarize_pct must be in [0, 100]".into()));
        }
        if !(self.max_gap_s > 0.0) || !self.binarize_offset_db.is_finite() {
            return Err(Error::InvalidParameter("max_gap_s must be positive".into()));
        }
        Ok(())
    }

    pub fn band(&self) -> (f64, f64) {
        (self.band_lo_hz, self.band_hi_hz)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub t_start_s: f64,
    pub t_end_s: f64,
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
    pub peak_db: f64,
    pub cell_count: usize,
}

impl Pulse {
    pub fn duration_s(&self) -> f64 {
        self.t_end_s - self.t_start_s
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.f_hi_hz - self.f_lo_hz
    }
}

/// A candidate pulse train. Times are relative to the clip start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseTrainEvent {
    pub event_id: String,
    pub source_id: String,
    pub start_utc: DateTime<Utc>,
    pub t_start_s: f64,
    pub t_end_s: f64,
    pub pulses: Vec<Pulse>,
}

impl PulseTrainEvent {
    pub fn duration_s(&self) -> f64 {
        self.t_end_s - self.t_start_s
    }
}

/// Runs the full detection chain on one clip.
pub fn detect_events(clip: &AudioClip, stft: &StftParams, cfg: &DetectorConfig) -> Result<Vec<PulseTrainEvent>> {
    cfg.validate()?;
    clip.validate(cfg.band_hi_hz)?;
    let spec = compute_spectrogram(clip, stft)?;
    let mask = binarize(&spec, cfg)?;
    let pulses = extract_pulses(&mask, &spec, cfg)?;
    Ok(group_pulse_trains(&pulses, cfg, clip))
}

/// Writes events as JSON lines, one event per line.
pub fn write_events<W: Write>(mut out: W, events: &[PulseTrainEvent]) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_events<R: BufRead>(input: R) -> Result<Vec<PulseTrainEvent>> {
    let mut events = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        events.push(serde_json::from_str(&line)?);
    }
    Ok(events)
}

pub fn save_events(path: impl AsRef<Path>, events: &[PulseTrainEvent]) -> Result<()> {
    let mut buf = Vec::new();
    write_events(&mut buf, events)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_events(path: impl AsRef<Path>) -> Result<Vec<PulseTrainEvent>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    read_events(std::io::BufReader::new(file)).map_err(|e| match e {
        Error::Json(j) => Error::Format { path: path.to_path_buf(), detail: j.to_string() },
        other => other,
    })
}
