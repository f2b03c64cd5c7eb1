use std::path::Path;
use std::process::Command;

use pulsescore::corpus::{labels_for_events, write_corpus, CorpusSpec};
use pulsescore::dataset::{load_scored, write_labels};
use pulsescore::detector::load_events;
use pulsescore::features::FEATURE_NAMES;
use pulsescore::pipeline::{cmd_classify, cmd_detect, cmd_diel, cmd_extract, cmd_roc, cmd_train, TrainingSource};
use pulsescore::signal::{synthesize_pulse_train, write_wav_i16, SynthesisSpec};
use pulsescore::{Error, PipelineConfig};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pulsescore"))
}

fn one_train_dir(dir: &Path) {
    std::fs::create_dir_all(dir).unwrap();
    let spec = SynthesisSpec { first_onset_s: 3.0, noise_seed: 21, ..Default::default() };
    let clip = synthesize_pulse_train(&spec, 20.0, 8000).unwrap();
    write_wav_i16(dir.join("hydro_20090401_221500.wav"), &clip).unwrap();
}

/// Small survey with labels, detected and extracted.
fn survey(dir: &Path) -> PipelineConfig {
    let cfg = PipelineConfig::default();
    let truth = write_corpus(&dir.join("audio"), &CorpusSpec { n_trains: 6, n_bursts: 6, seed: 4, ..Default::default() }).unwrap();
    cmd_detect(&dir.join("audio"), &cfg, &dir.join("events.jsonl")).unwrap();
    let labels = labels_for_events(&load_events(dir.join("events.jsonl")).unwrap(), &truth);
    write_labels(std::fs::File::create(dir.join("labels.csv")).unwrap(), &labels).unwrap();
    cmd_extract(&dir.join("events.jsonl"), &dir.join("audio"), &cfg, &dir.join("features.csv")).unwrap();
    cfg
}

#[test]
fn detect_one_train_gives_one_record() {
    let tmp = tempfile::tempdir().unwrap();
    one_train_dir(&tmp.path().join("a"));
    let r = cmd_detect(&tmp.path().join("a"), &PipelineConfig::default(), &tmp.path().join("ev.jsonl")).unwrap();
    assert_eq!(r.events, 1);
    let events = load_events(tmp.path().join("ev.jsonl")).unwrap();
    assert_eq!(events[0].source_id, "hydro_20090401_221500");
    assert_eq!(events[0].start_utc.format("%Y-%m-%d").to_string(), "2009-04-01");
}

#[test]
fn detect_empty_dir_writes_empty_file() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::create_dir(tmp.path().join("empty")).unwrap();
    let out = tmp.path().join("ev.jsonl");
    let r = cmd_detect(&tmp.path().join("empty"), &PipelineConfig::default(), &out).unwrap();
    assert_eq!(r.events, 0);
    assert_eq!(std::fs::read(&out).unwrap(), b"");
}

#[test]
fn corrupt_file_is_isolated() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("a");
    one_train_dir(&dir);
    std::fs::write(dir.join("broken.wav"), b"RIFF nonsense").unwrap();
    let r = cmd_detect(&dir, &PipelineConfig::default(), &tmp.path().join("ev.jsonl")).unwrap();
    assert_eq!((r.files_ok, r.failures.len(), r.events), (1, 1, 1));

    std::fs::remove_file(dir.join("hydro_20090401_221500.wav")).unwrap();
    let all_bad = cmd_detect(&dir, &PipelineConfig::default(), &tmp.path().join("ev2.jsonl"));
    assert!(matches!(all_bad, Err(Error::AllInputsFailed(1))));
}

#[test]
fn extract_rows_header_and_idempotence() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = survey(tmp.path());
    let events = load_events(tmp.path().join("events.jsonl")).unwrap();
    let text = std::fs::read_to_string(tmp.path().join("features.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "event_id");
    assert_eq!(&header[1..], &FEATURE_NAMES);
    let ids: Vec<&str> = lines.map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ids, events.iter().map(|e| e.event_id.as_str()).collect::<Vec<_>>());

    cmd_extract(&tmp.path().join("events.jsonl"), &tmp.path().join("audio"), &cfg, &tmp.path().join("again.csv")).unwrap();
    assert_eq!(std::fs::read(tmp.path().join("features.csv")).unwrap(), std::fs::read(tmp.path().join("again.csv")).unwrap());
}

#[test]
fn extract_skips_missing_audio() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = survey(tmp.path());
    let events = load_events(tmp.path().join("events.jsonl")).unwrap();
    let victim = &events[0].source_id;
    std::fs::remove_file(tmp.path().join("audio").join(format!("{victim}.wav"))).unwrap();
    let r = cmd_extract(&tmp.path().join("events.jsonl"), &tmp.path().join("audio"), &cfg, &tmp.path().join("f.csv")).unwrap();
    let lost = events.iter().filter(|e| &e.source_id == victim).count();
    assert_eq!(r.rows, events.len() - lost);
    assert_eq!(r.skipped.len(), lost);
}

#[test]
fn train_reports_unknown_ids_and_classes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = survey(tmp.path());
    std::fs::write(tmp.path().join("bad.csv"), "event_id,score\nnope@1,3\nalso@2,1\n").unwrap();
    let src = TrainingSource::Joined { features: tmp.path().join("features.csv"), labels: tmp.path().join("bad.csv") };
    match cmd_train(&src, &cfg, &tmp.path().join("m.json")) {
        Err(Error::UnknownEventIds(ids)) => assert_eq!(ids, ["also@2", "nope@1"]),
        other => panic!("{other:?}"),
    }

    let events = load_events(tmp.path().join("events.jsonl")).unwrap();
    let one_class: String = events.iter().map(|e| format!("{},2\n", e.event_id)).collect();
    std::fs::write(tmp.path().join("one.csv"), format!("event_id,score\n{one_class}")).unwrap();
    let src = TrainingSource::Joined { features: tmp.path().join("features.csv"), labels: tmp.path().join("one.csv") };
    assert!(matches!(cmd_train(&src, &cfg, &tmp.path().join("m.json")), Err(Error::InsufficientClasses(1))));
}

#[test]
fn train_classify_roc_diel() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let mut cfg = survey(d);
    cfg.train.max_epochs = 400;
    let src = TrainingSource::Joined { features: d.join("features.csv"), labels: d.join("labels.csv") };
    let report = cmd_train(&src, &cfg, &d.join("model.json")).unwrap();
    assert!(d.join("model.json.report.json").exists());
    assert_eq!(report.class_histogram.iter().sum::<usize>(), report.rows);

    cmd_train(&src, &cfg, &d.join("model2.json")).unwrap();
    assert_eq!(std::fs::read(d.join("model.json")).unwrap(), std::fs::read(d.join("model2.json")).unwrap());

    cmd_classify(&d.join("features.csv"), &d.join("model.json"), 3, &d.join("s3.csv")).unwrap();
    cmd_classify(&d.join("features.csv"), &d.join("model.json"), 4, &d.join("s4.csv")).unwrap();
    let s3 = load_scored(d.join("s3.csv")).unwrap();
    let s4 = load_scored(d.join("s4.csv")).unwrap();
    let n_events = load_events(d.join("events.jsonl")).unwrap().len();
    assert_eq!(s3.len(), n_events);
    assert!(s4.iter().zip(&s3).all(|(a, b)| !a.accept || b.accept));

    let roc = cmd_roc(&d.join("s3.csv"), &d.join("labels.csv"), Some(&d.join("features.csv")), &d.join("roc")).unwrap();
    assert!(roc.baseline_auc.is_some());
    let csv = std::fs::read_to_string(d.join("roc/roc.csv")).unwrap();
    assert!(csv.starts_with(&format!("# auc={}\n", roc.auc)));
    assert!(d.join("roc/roc.svg").exists());

    let accepted = cmd_diel(&d.join("s3.csv"), &d.join("events.jsonl"), 3, &cfg, &d.join("diel")).unwrap();
    assert_eq!(accepted, s3.iter().filter(|r| r.accept).count() as u64);
    let diel = std::fs::read_to_string(d.join("diel/diel.csv")).unwrap();
    let total: u64 = diel.lines().skip(1).map(|l| l.split(',').nth(3).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, accepted);
}

#[test]
fn perfect_separation_gives_auc_one() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(
        d.join("scored.csv"),
        "event_id,score,expected_score,accept,p0,p1,p2,p3,p4\na,4,3.9,1,0,0,0,0.1,0.9\nb,0,0.2,0,0.8,0.2,0,0,0\nc,3,3.1,1,0,0,0.1,0.7,0.2\n",
    )
    .unwrap();
    std::fs::write(d.join("labels.csv"), "event_id,score\na,4\nb,1\nc,3\n").unwrap();
    let r = cmd_roc(&d.join("scored.csv"), &d.join("labels.csv"), None, &d.join("out")).unwrap();
    assert_eq!(r.auc, 1.0);
    assert!(std::fs::read_to_string(d.join("out/roc.csv")).unwrap().starts_with("# auc=1\n"));

    std::fs::write(d.join("same.csv"), "event_id,score\na,4\nb,4\nc,3\n").unwrap();
    assert!(matches!(cmd_roc(&d.join("scored.csv"), &d.join("same.csv"), None, &d.join("out")), Err(Error::DegenerateTruth)));
}

#[test]
fn cli_verbs_and_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    one_train_dir(&d.join("audio"));

    let ok = bin().args(["detect"]).arg(d.join("audio")).arg("--out").arg(d.join("ev.jsonl")).output().unwrap().status;
    assert_eq!(ok.code(), Some(0));
    assert_eq!(load_events(d.join("ev.jsonl")).unwrap().len(), 1);

    let st = bin().args(["extract"]).arg(d.join("ev.jsonl")).arg(d.join("audio")).arg("--out").arg(d.join("f.csv")).output().unwrap().status;
    assert_eq!(st.code(), Some(0));

    // usage errors
    assert_eq!(bin().arg("frobnicate").output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["classify", "a.csv", "m.json", "--tau", "9"]).output().unwrap().status.code(), Some(2));
    std::fs::write(d.join("bad.cfg"), "detector.no_such_key = 1\n").unwrap();
    let st = bin().arg("detect").arg(d.join("audio")).arg("--config").arg(d.join("bad.cfg")).output().unwrap().status;
    assert_eq!(st.code(), Some(2));

    // every input fails
    std::fs::create_dir(d.join("junk")).unwrap();
    std::fs::write(d.join("junk/x.wav"), b"not audio").unwrap();
    let st = bin().arg("detect").arg(d.join("junk")).arg("--out").arg(d.join("j.jsonl")).output().unwrap().status;
    assert_eq!(st.code(), Some(1));

    let help = bin().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    let text = String::from_utf8_lossy(&help.stdout);
    for verb in ["detect", "extract", "train", "classify", "roc", "diel", "serve"] {
        assert!(text.contains(verb), "{verb} missing from help");
    }
}
