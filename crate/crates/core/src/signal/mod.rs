//! Audio ingestion, spectrogram computation and synthetic test signals.

mod audio;
mod stft;
mod synth;

pub use audio::{encode_wav_i16, load_audio, parse_filename_timestamp, write_wav_i16, AudioClip};
pub use stft::{
    band_percentiles, band_percentiles_in_frames, compute_spectrogram, Spectrogram, StftParams,
    WindowKind,
};
pub use synth::{pure_tone, synthesize_bursts, synthesize_pulse_train, white_noise, Burst, SynthesisSpec};
