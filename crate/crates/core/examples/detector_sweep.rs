//! Sweeps the binarization threshold and reports planted-train recovery,
//! measured pulse timing, and false events on pure noise.
//!
//! ```text
//! cargo run --release --example detector_sweep
//! ```

use pulsescore::detector::{detect_events, DetectorConfig};
use pulsescore::signal::{synthesize_pulse_train, StftParams, SynthesisSpec};

const CLIPS: u64 = 50;
const SNR_DB: f64 = 15.0;

fn main() -> pulsescore::Result<()> {
    let stft = StftParams::default();
    println!("pct  offset  recovered  mean_dur_s  mean_ioi_s  noise_events  noise_pulses");
    for pct in [50.0, 85.0] {
        for offset in [6.0, 8.0, 10.0, 12.0, 14.0] {
            let cfg = DetectorConfig { binarize_pct: pct, binarize_offset_db: offset, ..Default::default() };
            let mut recovered = 0;
            let (mut dur_sum, mut ioi_sum, mut n_dur, mut n_ioi) = (0.0, 0.0, 0usize, 0usize);
            for seed in 0..CLIPS {
                let spec = SynthesisSpec {
                    snr_db: SNR_DB,
                    noise_seed: 1000 + seed,
                    first_onset_s: 2.0 + (seed % 5) as f64,
                    ..Default::default()
                };
                let clip = synthesize_pulse_train(&spec, 20.0, 8000)?;
                let events = detect_events(&clip, &stft, &cfg)?;
                let (t0, t1) = spec.planted_span();
                let hits: Vec<_> = events.iter().filter(|e| e.t_start_s < t1 && e.t_end_s > t0).collect();
                if hits.len() == 1 && events.len() == 1 && hits[0].pulses.len().abs_diff(30) <= 1 {
                    recovered += 1;
                }
                for e in &events {
                    dur_sum += e.pulses.iter().map(|p| p.duration_s()).sum::<f64>();
                    n_dur += e.pulses.len();
                    ioi_sum += e.pulses.windows(2).map(|w| w[1].t_start_s - w[0].t_start_s).sum::<f64>();
                    n_ioi += e.pulses.len().saturating_sub(1);
                }
            }
            let noise = synthesize_pulse_train(
                &SynthesisSpec { snr_db: f64::NEG_INFINITY, noise_seed: 424242, ..Default::default() },
                600.0,
                8000,
            )?;
            let spec = pulsescore::signal::compute_spectrogram(&noise, &stft)?;
            let mask = pulsescore::detector::binarize(&spec, &cfg)?;
            let pulses = pulsescore::detector::extract_pulses(&mask, &spec, &cfg)?;
            let noise_events = detect_events(&noise, &stft, &cfg)?.len();
            println!(
                "{pct:>4} {offset:>6} {:>8}/{CLIPS} {:>11.4} {:>11.4} {noise_events:>13} {:>13}",
                recovered,
                dur_sum / n_dur.max(1) as f64,
                ioi_sum / n_ioi.max(1) as f64,
                pulses.len()
            );
        }
    }
    Ok(())
}
