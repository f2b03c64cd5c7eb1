//! Seeded synthetic survey: clips holding either a regular pulse train or an
//! irregular run of noise bursts at the same SNR, with simulated expert
//! scores. Burst runs pass the detector gates, so they reach the classifier
//! as false alarms that SNR alone cannot reject.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::PulseTrainEvent;
use crate::error::Result;
use crate::signal::{synthesize_bursts, synthesize_pulse_train, write_wav_i16, AudioClip, Burst, SynthesisSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClipKind {
    Train,
    Bursts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub n_trains: usize,
    pub n_bursts: usize,
    pub clip_s: f64,
    pub sample_rate_hz: u32,
    pub snr_db: (f64, f64),
    pub seed: u64,
    /// Clip start times are drawn within `days` days after this instant.
    pub first_day: DateTime<Utc>,
    pub days: u32,
    /// Prefix of every file name and source id.
    pub prefix: String,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            n_trains: 150,
            n_bursts: 150,
            clip_s: 20.0,
            sample_rate_hz: 8000,
            snr_db: (8.0, 22.0),
            seed: 1,
            first_day: Utc.with_ymd_and_hms(2009, 4, 1, 0, 0, 0).unwrap(),
            days: 30,
            prefix: "survey".into(),
        }
    }
}

/// Ground truth for one clip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusClip {
    pub source_id: String,
    pub kind: ClipKind,
    pub snr_db: f64,
    /// The score a careful annotator would give.
    pub score: u8,
    pub start_utc: DateTime<Utc>,
}

fn clip_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Trains are drawn mostly at night (local offset -5 h), bursts uniformly.
fn start_time(spec: &CorpusSpec, kind: ClipKind, rng: &mut ChaCha8Rng) -> DateTime<Utc> {
    let day = rng.random_range(0..spec.days.max(1)) as i64;
    let local_hour: f64 = match kind {
        ClipKind::Train if rng.random_bool(0.7) => (rng.random_range(20.0..30.0_f64)) % 24.0,
        _ => rng.random_range(0.0..24.0),
    };
    let secs = ((local_hour + 5.0) * 3600.0).round() as i64;
    spec.first_day + Duration::days(day) + Duration::seconds(secs)
}

/// Builds clip `index`; indices below `n_trains` are trains.
pub fn synthesize_clip(spec: &CorpusSpec, index: usize) -> Result<(AudioClip, CorpusClip)> {
    let kind = if index < spec.n_trains { ClipKind::Train } else { ClipKind::Bursts };
    let mut rng = clip_rng(spec.seed, index);
    let snr = rng.random_range(spec.snr_db.0..=spec.snr_db.1);
    let noise_seed = spec.seed.wrapping_mul(1_000_003).wrapping_add(index as u64);
    let first_onset = rng.random_range(1.0..3.0);

    let (clip, score) = match kind {
        ClipKind::Train => {
            let s = SynthesisSpec {
                n_pulses: rng.random_range(20..=35),
                pulse_duration_s: rng.random_range(0.04..=0.06),
                inter_onset_interval_s: rng.random_range(0.28..=0.38),
                snr_db: snr,
                noise_seed,
                first_onset_s: first_onset,
                onset_jitter_s: 0.005,
                ..Default::default()
            };
            let score = if snr >= 14.0 { 4 } else { 3 };
            (synthesize_pulse_train(&s, spec.clip_s, spec.sample_rate_hz)?, score)
        }
        ClipKind::Bursts => {
            let mut bursts = Vec::new();
            let mut t = first_onset;
            let end = (first_onset + rng.random_range(6.5..14.0)).min(spec.clip_s - 1.0);
            loop {
                let duration_s = rng.random_range(0.025..0.09);
                if t + duration_s > end {
                    break;
                }
                let lo = rng.random_range(150.0..800.0);
                let width = rng.random_range(250.0..900.0_f64);
                bursts.push(Burst {
                    onset_s: t,
                    duration_s,
                    band_lo_hz: lo,
                    band_hi_hz: (lo + width).min(1350.0),
                    snr_db: snr + rng.random_range(-3.0..3.0),
                });
                t += duration_s + rng.random_range(0.1..0.7);
            }
            let score = if snr >= 18.0 { 2 } else { rng.random_range(0..=1) };
            (synthesize_bursts(&bursts, spec.clip_s, spec.sample_rate_hz, 0.01, noise_seed)?, score)
        }
    };
    let start_utc = start_time(spec, kind, &mut rng);
    let stamp = start_utc.format("%Y%m%d_%H%M%S");
    let source_id = format!("{}_{index:04}_{stamp}", spec.prefix);
    let clip = AudioClip { source_id: source_id.clone(), ..clip }.with_start(start_utc);
    Ok((clip, CorpusClip { source_id, kind, snr_db: snr, score, start_utc }))
}

/// Writes every clip as `<source_id>.wav` under `dir` and returns the truth
/// table in index order.
pub fn write_corpus(dir: &Path, spec: &CorpusSpec) -> Result<Vec<CorpusClip>> {
    std::fs::create_dir_all(dir)?;
    (0..spec.n_trains + spec.n_bursts)
        .into_par_iter()
        .map(|i| {
            let (clip, truth) = synthesize_clip(spec, i)?;
            write_wav_i16(dir.join(format!("{}.wav", truth.source_id)), &clip)?;
            Ok(truth)
        })
        .collect()
}

/// Gives each detected event the score of the clip it came from.
pub fn labels_for_events(events: &[PulseTrainEvent], clips: &[CorpusClip]) -> BTreeMap<String, u8> {
    let by_source: HashMap<&str, u8> = clips.iter().map(|c| (c.source_id.as_str(), c.score)).collect();
    events
        .iter()
        .filter_map(|e| by_source.get(e.source_id.as_str()).map(|&s| (e.event_id.clone(), s)))
        .collect()
}
