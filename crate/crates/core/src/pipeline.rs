//! The batch verbs. Each reads its inputs from files, writes its outputs to
//! files, and returns a small report. Outputs are byte-stable for identical
//! inputs, configuration and seed.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;

use crate::ann::{init_model, load_model, save_model, train, PostClassifier, TrainingVector, DEFAULT_LAYER_SIZES, N_SCORES};
use crate::config::PipelineConfig;
use crate::dataset::{join_labels, load_labels, load_scored, load_training_table, save_scored, ScoredRow};
use crate::detector::{detect_events, load_events, save_events, PulseTrainEvent};
use crate::error::{Error, Result};
use crate::eval::{
    baseline_score, diel_grid, is_true_detection, render_diel_svg, render_roc_svg, roc_curve, write_diel_csv,
    write_roc_csv, DielGrid, RocCurve,
};
use crate::features::{extract_features, fit_standardizer, load_feature_table, save_feature_table, FeatureVector};
use crate::signal::{compute_spectrogram, load_audio};

/// WAV files directly inside `dir`, sorted by name.
pub fn list_audio_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().and_then(|x| x.to_str()).is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    files.sort();
    Ok(files)
}

/// Maps each file stem (the clip's source id) to its path.
pub fn audio_index(dir: &Path) -> Result<HashMap<String, PathBuf>> {
    Ok(list_audio_files(dir)?
        .into_iter()
        .filter_map(|p| p.file_stem().and_then(|s| s.to_str()).map(|s| (s.to_string(), p.clone())))
        .collect())
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct DetectReport {
    pub files_ok: usize,
    pub failures: Vec<(PathBuf, String)>,
    pub events: usize,
}

/// Detects events in every WAV file of `audio_dir`. A file that fails is
/// logged and skipped; the command fails only when every file does.
pub fn cmd_detect(audio_dir: &Path, cfg: &PipelineConfig, out: &Path) -> Result<DetectReport> {
    cfg.validate()?;
    let files = list_audio_files(audio_dir)?;
    if files.is_empty() {
        log::warn!("no .wav files in {}", audio_dir.display());
    }
    let results: Vec<(PathBuf, Result<Vec<PulseTrainEvent>>)> = files
        .par_iter()
        .map(|p| (p.clone(), load_audio(p).and_then(|clip| detect_events(&clip, &cfg.stft, &cfg.detector))))
        .collect();

    let mut report = DetectReport::default();
    let mut events = Vec::new();
    for (path, r) in results {
        match r {
            Ok(ev) => {
                log::info!("{}: {} events", path.display(), ev.len());
                report.files_ok += 1;
                events.extend(ev);
            }
            Err(e) => {
                log::error!("{}: {e}", path.display());
                report.failures.push((path, e.to_string()));
            }
        }
    }
    if !files.is_empty() && report.files_ok == 0 {
        return Err(Error::AllInputsFailed(files.len()));
    }
    events.sort_by(|a, b| a.source_id.cmp(&b.source_id).then(a.t_start_s.total_cmp(&b.t_start_s)));
    report.events = events.len();
    save_events(out, &events)?;
    Ok(report)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ExtractReport {
    pub rows: usize,
    pub skipped: Vec<(String, String)>,
}

/// One feature row per event, in event-file order. Events whose audio cannot
/// be loaded are skipped with a log line.
pub fn cmd_extract(events_path: &Path, audio_dir: &Path, cfg: &PipelineConfig, out: &Path) -> Result<ExtractReport> {
    cfg.validate()?;
    let events = load_events(events_path)?;
    let index = audio_index(audio_dir)?;

    let mut by_source: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, e) in events.iter().enumerate() {
        by_source.entry(e.source_id.as_str()).or_default().push(i);
    }
    let computed: Vec<(usize, Result<FeatureVector>)> = by_source
        .into_par_iter()
        .flat_map_iter(|(source, idxs)| {
            let loaded = index
                .get(source)
                .ok_or_else(|| Error::UnreadableAudio { path: audio_dir.join(format!("{source}.wav")), reason: "no such file".into() })
                .and_then(load_audio)
                .and_then(|clip| compute_spectrogram(&clip, &cfg.stft).map(|s| (clip, s)));
            let out: Vec<(usize, Result<FeatureVector>)> = match loaded {
                Ok((clip, spec)) => idxs
                    .into_iter()
                    .map(|i| (i, extract_features(&events[i], &spec, &clip, &cfg.detector, &cfg.features)))
                    .collect(),
                Err(e) => {
                    let msg = e.to_string();
                    idxs.into_iter().map(|i| (i, Err(Error::InvalidParameter(msg.clone())))).collect()
                }
            };
            out
        })
        .collect();

    let mut slots: Vec<Option<Result<FeatureVector>>> = (0..events.len()).map(|_| None).collect();
    for (i, r) in computed {
        slots[i] = Some(r);
    }
    let mut report = ExtractReport::default();
    let mut rows = Vec::new();
    for (e, r) in events.iter().zip(slots) {
        match r.expect("every event visited") {
            Ok(fv) => rows.push(fv),
            Err(err) => {
                log::error!("{}: skipped: {err}", e.event_id);
                report.skipped.push((e.event_id.clone(), err.to_string()));
            }
        }
    }
    if !events.is_empty() && rows.is_empty() {
        return Err(Error::AllInputsFailed(events.len()));
    }
    report.rows = rows.len();
    save_feature_table(out, &rows)?;
    Ok(report)
}

/// Where training rows come from.
#[derive(Debug, Clone)]
pub enum TrainingSource {
    /// A feature table joined with an `event_id,score` label file.
    Joined { features: PathBuf, labels: PathBuf },
    /// An exported `event_id,F1..F18,score` table.
    Table(PathBuf),
}

impl TrainingSource {
    pub fn load(&self) -> Result<Vec<(FeatureVector, u8)>> {
        match self {
            TrainingSource::Joined { features, labels } => join_labels(&load_feature_table(features)?, &load_labels(labels)?),
            TrainingSource::Table(p) => load_training_table(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    pub rows: usize,
    pub class_histogram: [usize; N_SCORES],
    pub epochs: usize,
    pub final_mse: f64,
    pub converged: bool,
    pub seed: u64,
    pub learning_rate: f64,
}

/// Fits the standardizer and network on labelled rows.
pub fn train_classifier(rows: &[(FeatureVector, u8)], cfg: &PipelineConfig) -> Result<(PostClassifier, TrainReport)> {
    let mut class_histogram = [0usize; N_SCORES];
    for (_, s) in rows {
        class_histogram[*s as usize] += 1;
    }
    let classes = class_histogram.iter().filter(|&&c| c > 0).count();
    if classes < 2 {
        return Err(Error::InsufficientClasses(classes));
    }
    let raw: Vec<FeatureVector> = rows.iter().map(|r| r.0.clone()).collect();
    let standardizer = fit_standardizer(&raw)?;
    let data = rows
        .iter()
        .map(|(fv, s)| TrainingVector::new(standardizer.standardize(fv)?, *s))
        .collect::<Result<Vec<_>>>()?;
    let model = init_model(&DEFAULT_LAYER_SIZES, cfg.train.seed)?;
    let outcome = train(&model, &data, &cfg.train)?;
    if !outcome.converged {
        log::warn!("training stopped at {} epochs with mse {}", outcome.epochs(), outcome.final_loss());
    }
    let report = TrainReport {
        rows: rows.len(),
        class_histogram,
        epochs: outcome.epochs(),
        final_mse: outcome.final_loss(),
        converged: outcome.converged,
        seed: cfg.train.seed,
        learning_rate: cfg.train.learning_rate,
    };
    Ok((PostClassifier { model: outcome.model, standardizer }, report))
}

/// The report path that accompanies a model file: `<model>.report.json`.
pub fn report_path(model_out: &Path) -> PathBuf {
    let mut name = model_out.file_name().unwrap_or_default().to_os_string();
    name.push(".report.json");
    model_out.with_file_name(name)
}

pub fn cmd_train(source: &TrainingSource, cfg: &PipelineConfig, model_out: &Path) -> Result<TrainReport> {
    cfg.validate()?;
    let rows = source.load()?;
    let (clf, report) = train_classifier(&rows, cfg)?;
    save_model(&clf, model_out)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(report_path(model_out), text)?;
    Ok(report)
}

pub fn classify_rows(clf: &PostClassifier, features: &[FeatureVector], tau: u8) -> Result<Vec<ScoredRow>> {
    if tau > 4 {
        return Err(Error::InvalidParameter(format!("tau {tau} outside 0..=4")));
    }
    features
        .iter()
        .map(|fv| clf.predict(fv).map(|p| ScoredRow::new(fv.event_id.clone(), &p, tau)))
        .collect()
}

pub fn cmd_classify(features: &Path, model: &Path, tau: u8, out: &Path) -> Result<usize> {
    let clf = load_model(model)?;
    let rows = classify_rows(&clf, &load_feature_table(features)?, tau)?;
    save_scored(out, &rows)?;
    Ok(rows.len())
}

#[derive(Debug, Clone)]
pub struct RocResult {
    pub curve: RocCurve,
    pub baseline: Option<RocCurve>,
    pub n: usize,
    pub positives: usize,
}

/// Truth is a human score of 3 or more; the ranking statistic is the expected
/// score. With `features`, the single-feature baseline is computed too.
/// Scored rows without a label are left out.
pub fn roc_from_files(scored: &Path, labels: &Path, features: Option<&Path>) -> Result<RocResult> {
    let scored = load_scored(scored)?;
    let labels = load_labels(labels)?;
    let mut scores = Vec::new();
    let mut truths = Vec::new();
    let mut ids = Vec::new();
    for r in &scored {
        if let Some(&s) = labels.get(&r.event_id) {
            scores.push(r.expected_score);
            truths.push(is_true_detection(s));
            ids.push(r.event_id.as_str());
        }
    }
    let curve = roc_curve(&scores, &truths)?;
    let baseline = match features {
        None => None,
        Some(p) => {
            let table: HashMap<String, FeatureVector> =
                load_feature_table(p)?.into_iter().map(|f| (f.event_id.clone(), f)).collect();
            let missing: Vec<String> = ids.iter().filter(|id| !table.contains_key(**id)).map(|s| s.to_string()).collect();
            if !missing.is_empty() {
                return Err(Error::UnknownEventIds(missing));
            }
            let b: Vec<f64> = ids.iter().map(|id| baseline_score(&table[*id])).collect();
            Some(roc_curve(&b, &truths)?)
        }
    };
    let positives = truths.iter().filter(|&&t| t).count();
    Ok(RocResult { curve, baseline, n: truths.len(), positives })
}

#[derive(Debug, Clone, Serialize)]
pub struct RocReport {
    pub n: usize,
    pub positives: usize,
    pub auc: f64,
    pub baseline_auc: Option<f64>,
}

/// Writes `roc.csv` and `roc.svg` (plus `roc_baseline.csv`) into `out_dir`.
pub fn cmd_roc(scored: &Path, labels: &Path, features: Option<&Path>, out_dir: &Path) -> Result<RocReport> {
    let r = roc_from_files(scored, labels, features)?;
    std::fs::create_dir_all(out_dir)?;
    let mut buf = Vec::new();
    write_roc_csv(&mut buf, &r.curve)?;
    std::fs::write(out_dir.join("roc.csv"), buf)?;
    let mut named = vec![("HK-ANN", &r.curve)];
    if let Some(b) = &r.baseline {
        let mut buf = Vec::new();
        write_roc_csv(&mut buf, b)?;
        std::fs::write(out_dir.join("roc_baseline.csv"), buf)?;
        named.push(("SNR baseline (F15)", b));
    }
    std::fs::write(out_dir.join("roc.svg"), render_roc_svg(&named))?;
    Ok(RocReport { n: r.n, positives: r.positives, auc: r.curve.auc, baseline_auc: r.baseline.as_ref().map(|b| b.auc) })
}

/// Accepted events (predicted score `>= tau`) binned by local date and time.
/// The date range spans the first to last event in the events file.
pub fn diel_from_files(scored: &Path, events: &Path, tau: u8, cfg: &PipelineConfig) -> Result<DielGrid> {
    let events = load_events(events)?;
    if events.is_empty() {
        return Err(Error::EmptySet);
    }
    let starts: HashMap<&str, _> = events.iter().map(|e| (e.event_id.as_str(), e.start_utc)).collect();
    let scored = load_scored(scored)?;
    let unknown: Vec<String> = scored.iter().filter(|r| !starts.contains_key(r.event_id.as_str())).map(|r| r.event_id.clone()).collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownEventIds(unknown));
    }
    let accepted: Vec<_> = scored.iter().filter(|r| r.score >= tau).map(|r| starts[r.event_id.as_str()]).collect();
    let dates: Vec<NaiveDate> = events.iter().map(|e| cfg.site.to_local(e.start_utc).date()).collect();
    let range = (*dates.iter().min().expect("non-empty"), *dates.iter().max().expect("non-empty"));
    diel_grid(&accepted, range, cfg.bins_per_day, cfg.site)
}

/// Writes `diel.csv` and `diel.svg` into `out_dir`; returns the accepted count.
pub fn cmd_diel(scored: &Path, events: &Path, tau: u8, cfg: &PipelineConfig, out_dir: &Path) -> Result<u64> {
    cfg.validate()?;
    let grid = diel_from_files(scored, events, tau, cfg)?;
    std::fs::create_dir_all(out_dir)?;
    let mut buf = Vec::new();
    write_diel_csv(&mut buf, &grid)?;
    std::fs::write(out_dir.join("diel.csv"), buf)?;
    std::fs::write(out_dir.join("diel.svg"), render_diel_svg(&grid))?;
    Ok(grid.total())
}
