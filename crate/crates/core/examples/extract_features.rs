//! Detects a synthetic pulse train and prints its eighteen features next to
//! the values the synthesis parameters imply.
//!
//! cargo run --release --example extract_features

use pulsescore::detector::{detect_events, DetectorConfig};
use pulsescore::features::{extract_features, FeatureConfig, FEATURE_DESCRIPTIONS, FEATURE_NAMES};
use pulsescore::signal::{compute_spectrogram, synthesize_pulse_train, StftParams, SynthesisSpec};

fn main() -> pulsescore::Result<()> {
    let spec = SynthesisSpec { snr_db: 18.0, noise_seed: 5, first_onset_s: 2.0, ..Default::default() };
    let clip = synthesize_pulse_train(&spec, 15.0, 8000)?;
    let stft = StftParams::default();
    let det = DetectorConfig::default();
    let events = detect_events(&clip, &stft, &det)?;
    let Some(event) = events.first() else {
        println!("nothing detected");
        return Ok(());
    };
    let spectrogram = compute_spectrogram(&clip, &stft)?;
    let fv = extract_features(event, &spectrogram, &clip, &det, &FeatureConfig::default())?;

    println!("event {}", fv.event_id);
    for ((name, desc), v) in FEATURE_NAMES.iter().zip(FEATURE_DESCRIPTIONS).zip(fv.values) {
        println!("  {name:<4} {v:>10.4}  {desc}");
    }
    println!(
        "planted: {} pulses, {:.3} s each, {:.3} s apart, {:.0}..{:.0} Hz",
        spec.n_pulses, spec.pulse_duration_s, spec.inter_onset_interval_s, spec.band_lo_hz, spec.band_hi_hz
    );
    Ok(())
}
