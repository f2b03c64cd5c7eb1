use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::features::{FeatureVector, N_FEATURES};

/// Five Gaussian clouds, one per score, with unit spread around centers drawn
/// from N(0, center_sd²) in every dimension. Rows cycle through the scores.
pub fn gaussian_clusters(n_per_class: usize, center_sd: f64, seed: u64) -> Vec<(FeatureVector, u8)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = Normal::new(0.0, center_sd).expect("finite sd");
    let noise = Normal::new(0.0, 1.0).expect("unit sd");
    let centers: Vec<[f64; N_FEATURES]> = (0..5).map(|_| std::array::from_fn(|_| spread.sample(&mut rng))).collect();
    let mut rows = Vec::with_capacity(5 * n_per_class);
    for i in 0..n_per_class {
        for (k, c) in centers.iter().enumerate() {
            let v = std::array::from_fn(|j| c[j] + noise.sample(&mut rng));
            rows.push((FeatureVector::new(format!("c{k}-{i:03}"), v), k as u8));
        }
    }
    rows
}
