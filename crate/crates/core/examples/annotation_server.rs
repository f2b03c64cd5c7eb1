//! Builds a small synthetic survey, detects and extracts it, then serves the
//! annotation API over it until interrupted.
//!
//! cargo run --release --example annotation_server [out_dir] [bind]
//! curl 'http://127.0.0.1:8750/api/events?filter=unlabeled&page_size=5'

use std::path::PathBuf;

use pulsescore::annotation::{serve, AnnotationStore, StoreConfig};
use pulsescore::corpus::{write_corpus, CorpusSpec};
use pulsescore::pipeline::{cmd_detect, cmd_extract};
use pulsescore::PipelineConfig;

fn main() -> pulsescore::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "target/annotation-demo".into()).into();
    let bind = std::env::args().nth(2).unwrap_or_else(|| "127.0.0.1:8750".into());

    let (audio, events, features) = (out.join("audio"), out.join("events.jsonl"), out.join("features.csv"));
    let mut cfg = PipelineConfig::default();
    if !events.exists() {
        write_corpus(&audio, &CorpusSpec { n_trains: 15, n_bursts: 15, ..Default::default() })?;
        cmd_detect(&audio, &cfg, &events)?;
        cmd_extract(&events, &audio, &cfg, &features)?;
    }
    cfg.paths.audio_dir = Some(audio);
    cfg.paths.events = Some(events);
    cfg.paths.features = Some(features);

    let store = AnnotationStore::open(&StoreConfig::from_pipeline(&cfg)?)?;
    let p = store.progress();
    println!("serving {} events ({} labeled) on http://{bind}", p.total, p.labeled);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(serve(store, cfg.annotation.default_pad_s, &bind))?;
    Ok(())
}
