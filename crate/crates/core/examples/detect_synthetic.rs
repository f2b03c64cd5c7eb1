//! Plants one pulse train in white noise at a range of SNRs and prints what
//! the detector finds.
//!
//! cargo run --release --example detect_synthetic

use pulsescore::detector::{detect_events, DetectorConfig};
use pulsescore::signal::{synthesize_pulse_train, StftParams, SynthesisSpec};

fn main() -> pulsescore::Result<()> {
    let stft = StftParams::default();
    let det = DetectorConfig::default();
    for snr_db in [0.0, 4.0, 8.0, 12.0, 20.0] {
        let spec = SynthesisSpec { snr_db, noise_seed: 17, first_onset_s: 4.0, ..Default::default() };
        let (lo, hi) = spec.planted_span();
        let clip = synthesize_pulse_train(&spec, 20.0, 8000)?;
        let events = detect_events(&clip, &stft, &det)?;
        println!("snr {snr_db:4.1} dB  planted {lo:.2}..{hi:.2} s  {} pulses  -> {} event(s)", spec.n_pulses, events.len());
        for e in &events {
            println!("    {}  {:.2}..{:.2} s  {} pulses", e.event_id, e.t_start_s, e.t_end_s, e.pulses.len());
        }
    }
    Ok(())
}
