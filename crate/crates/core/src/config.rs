//! Flat `section.key = value` configuration. `#` starts a comment; blank
//! lines are ignored; unknown or repeated keys are errors.
//!
//! ```text
//! # detector tuned for a quieter site
//! detector.binarize_offset_db = 8
//! site.lat_deg = 42.4
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::ann::Hyperparams;
use crate::detector::DetectorConfig;
use crate::error::{Error, Result};
use crate::eval::{Site, DEFAULT_BINS_PER_DAY};
use crate::features::FeatureConfig;
use crate::signal::StftParams;

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationConfig {
    pub bind: String,
    pub default_pad_s: f64,
}

impl Default for AnnotationConfig {
    fn default() -> Self {
        Self { bind: "127.0.0.1:8750".into(), default_pad_s: 2.0 }
    }
}

/// Locations used by `serve`; the batch verbs take their paths as arguments.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathsConfig {
    pub audio_dir: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub label_log: Option<PathBuf>,
    pub export: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub stft: StftParams,
    pub detector: DetectorConfig,
    pub features: FeatureConfig,
    pub train: Hyperparams,
    pub site: Site,
    pub bins_per_day: u32,
    /// Acceptance threshold on the predicted score.
    pub tau: u8,
    pub annotation: AnnotationConfig,
    pub paths: PathsConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            stft: StftParams::default(),
            detector: DetectorConfig::default(),
            features: FeatureConfig::default(),
            train: Hyperparams::default(),
            site: Site::default(),
            bins_per_day: DEFAULT_BINS_PER_DAY,
            tau: 3,
            annotation: AnnotationConfig::default(),
            paths: PathsConfig::default(),
        }
    }
}

fn parse<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config { line, detail: format!("bad value {value:?} for {key}") })
}

impl PipelineConfig {
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = HashSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::Config { line, detail: format!("expected `section.key = value`, got {content:?}") })?;
            if !seen.insert(key.to_string()) {
                return Err(Error::Config { line, detail: format!("duplicate key {key}") });
            }
            cfg.set(line, key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_str(&std::fs::read_to_string(path)?)
    }

    fn set(&mut self, line: usize, key: &str, v: &str) -> Result<()> {
        let d = &mut self.detector;
        match key {
            "stft.window_len_samples" => self.stft.window_len_samples = parse(line, key, v)?,
            "stft.hop_samples" => self.stft.hop_samples = parse(line, key, v)?,
            "stft.window" => self.stft.window_kind = parse(line, key, v)?,
            "stft.floor_db" => self.stft.floor_db = parse(line, key, v)?,

            "detector.band_lo_hz" => d.band_lo_hz = parse(line, key, v)?,
            "detector.band_hi_hz" => d.band_hi_hz = parse(line, key, v)?,
            "detector.binarize_pct" => d.binarize_pct = parse(line, key, v)?,
            "detector.binarize_offset_db" => d.binarize_offset_db = parse(line, key, v)?,
            "detector.pulse_dur_min_s" => d.pulse_dur_min_s = parse(line, key, v)?,
            "detector.pulse_dur_max_s" => d.pulse_dur_max_s = parse(line, key, v)?,
            "detector.max_gap_s" => d.max_gap_s = parse(line, key, v)?,
            "detector.min_pulses" => d.min_pulses = parse(line, key, v)?,
            "detector.train_dur_min_s" => d.train_dur_min_s = parse(line, key, v)?,
            "detector.train_dur_max_s" => d.train_dur_max_s = parse(line, key, v)?,

            "features.context_window_s" => self.features.context_window_s = parse(line, key, v)?,
            "features.mode_bin_s" => self.features.mode_bin_s = parse(line, key, v)?,
            "features.snr_percentiles" => {
                let list: Vec<f64> = v.split(',').map(|p| parse(line, key, p.trim())).collect::<Result<_>>()?;
                self.features.snr_percentiles = list
                    .try_into()
                    .map_err(|_| Error::Config { line, detail: "snr_percentiles needs exactly 4 values".into() })?;
            }

            "train.learning_rate" => self.train.learning_rate = parse(line, key, v)?,
            "train.max_epochs" => self.train.max_epochs = parse(line, key, v)?,
            "train.target_mse" => self.train.target_mse = parse(line, key, v)?,
            "train.seed" => self.train.seed = parse(line, key, v)?,

            "site.lat_deg" => self.site.lat_deg = parse(line, key, v)?,
            "site.lon_deg" => self.site.lon_deg = parse(line, key, v)?,
            "site.utc_offset_hours" => self.site.utc_offset_hours = parse(line, key, v)?,

            "diel.bins_per_day" => self.bins_per_day = parse(line, key, v)?,
            "classify.tau" => self.tau = parse(line, key, v)?,

            "annotation.bind" => self.annotation.bind = v.to_string(),
            "annotation.default_pad_s" => self.annotation.default_pad_s = parse(line, key, v)?,

            "paths.audio_dir" => self.paths.audio_dir = Some(v.into()),
            "paths.events" => self.paths.events = Some(v.into()),
            "paths.features" => self.paths.features = Some(v.into()),
            "paths.label_log" => self.paths.label_log = Some(v.into()),
            "paths.export" => self.paths.export = Some(v.into()),

            _ => return Err(Error::Config { line, detail: format!("unknown key {key}") }),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.stft.validate()?;
        self.detector.validate()?;
        self.features.validate()?;
        self.train.validate()?;
        if self.bins_per_day == 0 || 1440 % self.bins_per_day != 0 {
            return Err(Error::BadBinsPerDay(self.bins_per_day));
        }
        if self.tau > 4 {
            return Err(Error::InvalidParameter(format!("tau {} outside 0..=4", self.tau)));
        }
        if !(self.annotation.default_pad_s >= 0.0) {
            return Err(Error::InvalidParameter("annotation.default_pad_s must be >= 0".into()));
        }
        Ok(())
    }
}
