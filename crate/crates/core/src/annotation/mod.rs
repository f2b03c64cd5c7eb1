//! Human scoring of detected events over HTTP, and assembly of the training
//! table from the resulting labels.
//!
//! Labels are appended to a JSON-lines log that is never rewritten. The
//! current label of an event is its most recent line.

mod http;
mod render;

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::dataset::save_training_table;
use crate::detector::{load_events, PulseTrainEvent};
use crate::error::{Error, Result};
use crate::features::{load_feature_table, FeatureVector};
use crate::pipeline::audio_index;
use crate::signal::{load_audio, AudioClip, StftParams};

pub use http::{router, serve};
pub use render::render_spectrogram_png;

pub const RUBRIC: [&str; 5] = [
    "Not target species",
    "Unsure of target species",
    "Faint target species",
    "Mediocre target species",
    "Strong target species",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub event_id: String,
    pub score: u8,
    pub annotator: String,
    pub labeled_at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Filter {
    All,
    Labeled,
    Unlabeled,
}

impl std::str::FromStr for Filter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" | "" => Ok(Filter::All),
            "labeled" => Ok(Filter::Labeled),
            "unlabeled" => Ok(Filter::Unlabeled),
            other => Err(Error::InvalidParameter(format!("unknown filter {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventSummary {
    pub event_id: String,
    pub source_id: String,
    pub start_utc: DateTime<Utc>,
    pub t_start_s: f64,
    pub t_end_s: f64,
    pub duration_s: f64,
    pub pulse_count: usize,
    /// F15 when a feature row exists.
    pub snr_db: Option<f64>,
    pub score: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Progress {
    pub labeled: usize,
    pub total: usize,
    /// Current labels per score 0..=4.
    pub histogram: [usize; 5],
    /// Lines in the label log, superseded ones included.
    pub submissions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventPage {
    pub events: Vec<EventSummary>,
    pub matching: usize,
    pub page: usize,
    pub page_size: usize,
    pub progress: Progress,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExportReport {
    pub path: PathBuf,
    pub rows: usize,
    /// Labelled events that have no feature row and were left out.
    pub missing_features: Vec<String>,
}

#[derive(Default)]
struct LabelBook {
    current: HashMap<String, Label>,
    history_len: usize,
}

/// Events, features and labels behind the service. Events and features are
/// fixed after construction; label writes are serialized by the lock.
pub struct AnnotationStore {
    events: Vec<PulseTrainEvent>,
    index: HashMap<String, usize>,
    features: HashMap<String, FeatureVector>,
    audio: HashMap<String, PathBuf>,
    stft: StftParams,
    band_hi_hz: f64,
    label_log: PathBuf,
    export_path: PathBuf,
    labels: RwLock<LabelBook>,
}

/// Everything needed to open a store.
#[derive(Debug, Clone)]
pub struct StoreConfig {
    pub events: PathBuf,
    pub features: Option<PathBuf>,
    pub audio_dir: PathBuf,
    pub label_log: PathBuf,
    pub export_path: PathBuf,
    pub stft: StftParams,
    pub band_hi_hz: f64,
}

impl StoreConfig {
    /// Fills the paths from the `paths.*` keys, with defaults next to the
    /// events file.
    pub fn from_pipeline(cfg: &PipelineConfig) -> Result<Self> {
        let need = |p: &Option<PathBuf>, key: &str| p.clone().ok_or_else(|| Error::InvalidParameter(format!("paths.{key} is required")));
        let events = need(&cfg.paths.events, "events")?;
        let dir = events.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self {
            features: cfg.paths.features.clone(),
            audio_dir: need(&cfg.paths.audio_dir, "audio_dir")?,
            label_log: cfg.paths.label_log.clone().unwrap_or_else(|| dir.join("labels.jsonl")),
            export_path: cfg.paths.export.clone().unwrap_or_else(|| dir.join("training.csv")),
            stft: cfg.stft,
            band_hi_hz: cfg.detector.band_hi_hz,
            events,
        })
    }
}

fn read_label_log(path: &Path) -> Result<LabelBook> {
    let mut book = LabelBook::default();
    if !path.exists() {
        return Ok(book);
    }
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    for (i, line) in file.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let label: Label = serde_json::from_str(&line)
            .map_err(|e| Error::Format { path: path.to_path_buf(), detail: format!("line {}: {e}", i + 1) })?;
        if label.score > 4 {
            return Err(Error::Format { path: path.to_path_buf(), detail: format!("line {}: score {}", i + 1, label.score) });
        }
        book.history_len += 1;
        book.current.insert(label.event_id.clone(), label);
    }
    Ok(book)
}

impl AnnotationStore {
    pub fn open(cfg: &StoreConfig) -> Result<Self> {
        let mut events = load_events(&cfg.events)?;
        events.sort_by(|a, b| a.source_id.cmp(&b.source_id).then(a.t_start_s.total_cmp(&b.t_start_s)));
        let features = match &cfg.features {
            Some(p) => load_feature_table(p)?.into_iter().map(|f| (f.event_id.clone(), f)).collect(),
            None => HashMap::new(),
        };
        Ok(Self {
            index: events.iter().enumerate().map(|(i, e)| (e.event_id.clone(), i)).collect(),
            events,
            features,
            audio: audio_index(&cfg.audio_dir)?,
            stft: cfg.stft,
            band_hi_hz: cfg.band_hi_hz,
            labels: RwLock::new(read_label_log(&cfg.label_log)?),
            label_log: cfg.label_log.clone(),
            export_path: cfg.export_path.clone(),
        })
    }

    pub fn event(&self, id: &str) -> Option<&PulseTrainEvent> {
        self.index.get(id).map(|&i| &self.events[i])
    }

    fn book(&self) -> std::sync::RwLockReadGuard<'_, LabelBook> {
        self.labels.read().unwrap_or_else(|e| e.into_inner())
    }

    pub fn current_label(&self, id: &str) -> Option<Label> {
        self.book().current.get(id).cloned()
    }

    pub fn progress(&self) -> Progress {
        let book = self.book();
        let mut histogram = [0usize; 5];
        let mut labeled = 0;
        for l in book.current.values().filter(|l| self.index.contains_key(&l.event_id)) {
            histogram[l.score as usize] += 1;
            labeled += 1;
        }
        Progress { labeled, total: self.events.len(), histogram, submissions: book.history_len }
    }

    /// Pages are numbered from 0; a page past the end is empty.
    pub fn list_events(&self, filter: Filter, page: usize, page_size: usize) -> Result<EventPage> {
        if page_size == 0 {
            return Err(Error::InvalidParameter("page_size must be positive".into()));
        }
        let matching: Vec<EventSummary> = {
            let book = self.book();
            self.events
                .iter()
                .map(|e| EventSummary {
                    event_id: e.event_id.clone(),
                    source_id: e.source_id.clone(),
                    start_utc: e.start_utc,
                    t_start_s: e.t_start_s,
                    t_end_s: e.t_end_s,
                    duration_s: e.duration_s(),
                    pulse_count: e.pulses.len(),
                    snr_db: self.features.get(&e.event_id).map(crate::eval::baseline_score),
                    score: book.current.get(&e.event_id).map(|l| l.score),
                })
                .filter(|s| match filter {
                    Filter::All => true,
                    Filter::Labeled => s.score.is_some(),
                    Filter::Unlabeled => s.score.is_none(),
                })
                .collect()
        };
        let n = matching.len();
        let events = matching.into_iter().skip(page.saturating_mul(page_size)).take(page_size).collect();
        Ok(EventPage { events, matching: n, page, page_size, progress: self.progress() })
    }

    /// Appends the label to the log, then makes it current.
    pub fn submit_score(&self, id: &str, score: i64, annotator: &str) -> Result<Label> {
        if self.event(id).is_none() {
            return Err(Error::UnknownEventIds(vec![id.to_string()]));
        }
        let score = u8::try_from(score)
            .ok()
            .filter(|s| *s <= 4)
            .ok_or_else(|| Error::InvalidParameter(format!("score {score} outside 0..=4")))?;
        let label = Label { event_id: id.to_string(), score, annotator: annotator.to_string(), labeled_at: Utc::now() };

        let mut book = self.labels.write().unwrap_or_else(|e| e.into_inner());
        let mut line = serde_json::to_string(&label)?;
        line.push('\n');
        let mut f = std::fs::OpenOptions::new().create(true).append(true).open(&self.label_log)?;
        f.write_all(line.as_bytes())?;
        f.sync_data()?;
        book.history_len += 1;
        book.current.insert(label.event_id.clone(), label.clone());
        Ok(label)
    }

    fn clip_for(&self, event: &PulseTrainEvent) -> Result<AudioClip> {
        let path = self.audio.get(&event.source_id).ok_or_else(|| Error::UnreadableAudio {
            path: PathBuf::from(format!("{}.wav", event.source_id)),
            reason: "source audio not found".into(),
        })?;
        load_audio(path)
    }

    /// Greyscale PNG of `[t_start - pad_s, t_end + pad_s]`, clipped to the
    /// recording, with the event's time-frequency box outlined.
    pub fn spectrogram_png(&self, id: &str, pad_s: f64) -> Result<Vec<u8>> {
        let event = self.event(id).ok_or_else(|| Error::UnknownEventIds(vec![id.to_string()]))?;
        if !(pad_s >= 0.0) || !pad_s.is_finite() {
            return Err(Error::InvalidParameter("pad_s must be a non-negative number".into()));
        }
        let clip = self.clip_for(event)?;
        render_spectrogram_png(&clip, event, pad_s, &self.stft, self.band_hi_hz)
    }

    /// The event's waveform as 16-bit WAV.
    pub fn audio_wav(&self, id: &str, pad_s: f64) -> Result<Vec<u8>> {
        let event = self.event(id).ok_or_else(|| Error::UnknownEventIds(vec![id.to_string()]))?;
        let clip = self.clip_for(event)?;
        let range = clip.sample_range(event.t_start_s - pad_s.max(0.0), event.t_end_s + pad_s.max(0.0));
        crate::signal::encode_wav_i16(&clip.samples[range], clip.sample_rate_hz)
    }

    /// Writes `event_id,F1..F18,score` for every currently labelled event
    /// that has features, in event order.
    pub fn export_training_set(&self) -> Result<ExportReport> {
        let current: BTreeMap<String, u8> = self.book().current.iter().map(|(k, l)| (k.clone(), l.score)).collect();
        let mut rows = Vec::new();
        let mut missing = Vec::new();
        for e in &self.events {
            let Some(&score) = current.get(&e.event_id) else { continue };
            if score > 4 {
                return Err(Error::InvalidParameter(format!("stored score {score} for {}", e.event_id)));
            }
            match self.features.get(&e.event_id) {
                Some(fv) => rows.push((fv.clone(), score)),
                None => missing.push(e.event_id.clone()),
            }
        }
        save_training_table(&self.export_path, &rows)?;
        Ok(ExportReport { path: self.export_path.clone(), rows: rows.len(), missing_features: missing })
    }
}
