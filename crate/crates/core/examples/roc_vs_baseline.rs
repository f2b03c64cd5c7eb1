//! Compares a ranker that sees the truth through moderate noise with one that
//! barely does, and writes both curves to one SVG.
//!
//! cargo run --release --example roc_vs_baseline [out_dir]

use std::path::PathBuf;

use pulsescore::eval::{render_roc_svg, roc_curve, write_roc_csv};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> pulsescore::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "target/roc-demo".into()).into();
    std::fs::create_dir_all(&out)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let truth: Vec<bool> = (0..400).map(|_| rng.random_bool(0.4)).collect();
    let signal = |rng: &mut ChaCha8Rng, sep: f64| -> Vec<f64> {
        truth.iter().map(|&t| if t { sep } else { 0.0 } + rng.random_range(-1.0..1.0)).collect()
    };
    let strong = signal(&mut rng, 1.2);
    let weak = signal(&mut rng, 0.3);

    let a = roc_curve(&strong, &truth)?;
    let b = roc_curve(&weak, &truth)?;
    for (name, c) in [("classifier", &a), ("baseline", &b)] {
        let op = c.operating_point(0.1).expect("curve starts at the origin");
        println!("{name:<10} AUC {:.3}  TPR {:.3} at FPR {:.3} (threshold {:.3})", c.auc, op.tpr, op.fpr, op.threshold);
    }
    write_roc_csv(std::fs::File::create(out.join("roc.csv"))?, &a)?;
    std::fs::write(out.join("roc.svg"), render_roc_svg(&[("classifier", &a), ("baseline", &b)]))?;
    println!("wrote {}", out.display());
    Ok(())
}
