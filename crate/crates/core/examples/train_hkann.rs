//! Trains the post-classifier on five Gaussian clusters, one per score, and
//! prints the loss curve.
//!
//! cargo run --release --example train_hkann [seed]

use pulsescore::ann::{gaussian_clusters, init_model, predict_score, train, Hyperparams, TrainingVector, DEFAULT_LAYER_SIZES};
use pulsescore::features::{fit_standardizer, FeatureVector};

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let rows = gaussian_clusters(40, 8.0, seed);
    let raw: Vec<FeatureVector> = rows.iter().map(|r| r.0.clone()).collect();
    let stats = fit_standardizer(&raw).unwrap();
    let data: Vec<TrainingVector> =
        rows.iter().map(|(fv, s)| TrainingVector::new(stats.standardize(fv).unwrap(), *s).unwrap()).collect();

    let hp = Hyperparams { seed, ..Default::default() };
    let model = init_model(&DEFAULT_LAYER_SIZES, hp.seed).unwrap();
    let outcome = train(&model, &data, &hp).unwrap();
    for (e, loss) in outcome.history.iter().enumerate().step_by(100) {
        println!("epoch {e:5}  mse {loss:.5}");
    }
    println!(
        "stopped after {} epochs, mse {:.5}, converged {}",
        outcome.epochs(),
        outcome.final_loss(),
        outcome.converged
    );

    let correct = data.iter().filter(|t| predict_score(&outcome.model, &t.fv).unwrap().score == t.score).count();
    println!("training accuracy {correct}/{}", data.len());
}
