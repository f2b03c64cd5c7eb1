//! detect → extract → train → classify → roc → diel over a synthetic survey,
//! using the same functions the CLI verbs call.
//!
//! cargo run --release --example full_pipeline [out_dir]

use std::path::PathBuf;

use pulsescore::corpus::{labels_for_events, write_corpus, CorpusSpec};
use pulsescore::dataset::write_labels;
use pulsescore::detector::load_events;
use pulsescore::pipeline::{cmd_classify, cmd_detect, cmd_diel, cmd_extract, cmd_roc, cmd_train, TrainingSource};
use pulsescore::PipelineConfig;

fn main() -> pulsescore::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "target/pulsescore-demo".into()).into();
    let cfg = PipelineConfig::default();

    // a scored training survey and a separate test survey
    let train_spec = CorpusSpec { n_trains: 75, n_bursts: 75, seed: 2, prefix: "train".into(), ..Default::default() };
    let test_spec = CorpusSpec { seed: 1, prefix: "test".into(), ..Default::default() };

    let mut labels = Vec::new();
    for (name, spec) in [("train", &train_spec), ("test", &test_spec)] {
        let dir = out.join(name);
        let truth = write_corpus(&dir.join("audio"), spec)?;
        let r = cmd_detect(&dir.join("audio"), &cfg, &dir.join("events.jsonl"))?;
        println!("{name}: {} clips -> {} events", truth.len(), r.events);
        let events = load_events(dir.join("events.jsonl"))?;
        let l = labels_for_events(&events, &truth);
        write_labels(std::fs::File::create(dir.join("labels.csv"))?, &l)?;
        cmd_extract(&dir.join("events.jsonl"), &dir.join("audio"), &cfg, &dir.join("features.csv"))?;
        labels.push(l);
    }

    let (tr, te) = (out.join("train"), out.join("test"));
    let source = TrainingSource::Joined { features: tr.join("features.csv"), labels: tr.join("labels.csv") };
    let report = cmd_train(&source, &cfg, &out.join("model.json"))?;
    println!("trained: {} epochs, mse {:.4}, classes {:?}", report.epochs, report.final_mse, report.class_histogram);

    cmd_classify(&te.join("features.csv"), &out.join("model.json"), cfg.tau, &te.join("scored.csv"))?;
    let roc = cmd_roc(&te.join("scored.csv"), &te.join("labels.csv"), Some(&te.join("features.csv")), &out.join("roc"))?;
    println!("test ROC over {} events ({} true): AUC {:.3}, baseline AUC {:.3}", roc.n, roc.positives, roc.auc, roc.baseline_auc.unwrap_or(f64::NAN));

    let accepted = cmd_diel(&te.join("scored.csv"), &te.join("events.jsonl"), cfg.tau, &cfg, &out.join("diel"))?;
    println!("diel grid holds {accepted} accepted events; plots in {}", out.display());
    Ok(())
}
