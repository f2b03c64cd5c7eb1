//! Writes the spectrogram of a synthetic clip as a text matrix and the
//! annotation view of its detected event as a PNG.
//!
//! cargo run --release --example spectrogram_export [out_dir]

use std::path::PathBuf;

use pulsescore::annotation::render_spectrogram_png;
use pulsescore::detector::{detect_events, DetectorConfig};
use pulsescore::signal::{compute_spectrogram, synthesize_pulse_train, StftParams, SynthesisSpec};

fn main() -> pulsescore::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "target/spectrogram-demo".into()).into();
    std::fs::create_dir_all(&out)?;
    let spec = SynthesisSpec { snr_db: 15.0, noise_seed: 8, first_onset_s: 3.0, ..Default::default() };
    let clip = synthesize_pulse_train(&spec, 15.0, 8000)?;
    let stft = StftParams::default();
    let det = DetectorConfig::default();

    let spectrogram = compute_spectrogram(&clip, &stft)?;
    std::fs::write(out.join("spectrogram.txt"), spectrogram.to_matrix_text())?;
    println!(
        "{} frames x {} bins, hop {:.4} s, bin width {:.2} Hz",
        spectrogram.n_frames(),
        spectrogram.n_bins(),
        spectrogram.hop_s(),
        spectrogram.bin_width_hz()
    );

    for e in detect_events(&clip, &stft, &det)? {
        let png = render_spectrogram_png(&clip, &e, 2.0, &stft, det.band_hi_hz)?;
        let path = out.join(format!("{}.png", e.event_id.replace(['@', ':'], "_")));
        std::fs::write(&path, png)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
