//! Seeded synthetic pulse trains for tests, examples and calibration.
//!
//! A train is a sequence of band-limited Gaussian noise bursts added to white
//! Gaussian background noise. The burst level is set relative to the part of
//! the background that falls inside the burst band, so `snr_db` is an in-band
//! ratio.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::AudioClip;
use crate::error::{Error, Result};

const RAMP_S: f64 = 0.002;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSpec {
    pub n_pulses: usize,
    pub pulse_duration_s: f64,
    pub inter_onset_interval_s: f64,
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
    /// In-band burst power over in-band background power. `-inf` gives
    /// background only.
    pub snr_db: f64,
    pub noise_seed: u64,
    /// Onset of the first pulse.
    pub first_onset_s: f64,
    /// RMS of the white background, full scale.
    pub noise_rms: f64,
    /// Each onset is displaced uniformly within `±onset_jitter_s`.
    pub onset_jitter_s: f64,
}

impl Default for SynthesisSpec {
    fn default() -> Self {
        Self {
            n_pulses: 30,
            pulse_duration_s: 0.05,
            inter_onset_interval_s: 0.3,
            band_lo_hz: 200.0,
            band_hi_hz: 1200.0,
            snr_db: 20.0,
            noise_seed: 1,
            first_onset_s: 1.0,
            noise_rms: 0.01,
            onset_jitter_s: 0.0,
        }
    }
}

impl SynthesisSpec {
    /// Nominal onset times before jitter.
    pub fn nominal_onsets(&self) -> Vec<f64> {
        (0..self.n_pulses)
            .map(|i| self.first_onset_s + i as f64 * self.inter_onset_interval_s)
            .collect()
    }

    /// `(start, end)` of the planted train, ignoring jitter.
    pub fn planted_span(&self) -> (f64, f64) {
        let last = self.first_onset_s
            + self.n_pulses.saturating_sub(1) as f64 * self.inter_onset_interval_s;
        (self.first_onset_s, last + self.pulse_duration_s)
    }
}

/// Seeded white Gaussian noise.
pub fn white_noise(n: usize, rms: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * rms
        })
        .collect()
}

/// Unit-RMS Gaussian noise restricted to `[lo_hz, hi_hz]` by zeroing FFT bins.
fn band_limited_noise(n: usize, fs: f64, lo_hz: f64, hi_hz: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = (0..n)
        .map(|_| Complex::new(StandardNormal.sample(rng), 0.0))
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let k_pos = if k <= n / 2 { k } else { n - k };
        let f = k_pos as f64 * fs / n as f64;
        if f < lo_hz || f > hi_hz {
            *c = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let out: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let rms = (out.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    if rms > 0.0 {
        out.iter().map(|v| v / rms).collect()
    } else {
        out
    }
}

/// Generates a clip holding `spec.n_pulses` bursts at regular onsets inside
/// seeded white noise. The background depends only on `noise_seed`, so the
/// `snr_db = -inf` case is exactly [`white_noise`] with the same seed.
pub fn synthesize_pulse_train(spec: &SynthesisSpec, duration_s: f64, sample_rate_hz: u32) -> Result<AudioClip> {
    let fs = sample_rate_hz as f64;
    if !(duration_s > 0.0) || sample_rate_hz == 0 {
        return Err(Error::InvalidParameter("duration and sample rate must be positive".into()));
    }
    if !(spec.band_lo_hz < spec.band_hi_hz) || spec.band_hi_hz > fs / 2.0 {
        return Err(Error::InvalidParameter(format!(
            "band [{}, {}] invalid at {sample_rate_hz} Hz",
            spec.band_lo_hz, spec.band_hi_hz
        )));
    }
    if spec.n_pulses > 0 {
        if !(spec.pulse_duration_s > 0.0) || !(spec.inter_onset_interval_s > 0.0) {
            return Err(Error::InvalidParameter("pulse duration and interval must be positive".into()));
        }
        if spec.n_pulses as f64 * spec.inter_onset_interval_s > duration_s {
            return Err(Error::InfeasiblePacking(format!(
                "{} pulses every {} s do not fit in {duration_s} s",
                spec.n_pulses, spec.inter_onset_interval_s
            )));
        }
        let (_, end) = spec.planted_span();
        if spec.first_onset_s - spec.onset_jitter_s < 0.0 || end + spec.onset_jitter_s > duration_s {
            return Err(Error::InfeasiblePacking(format!(
                "train span [{}, {end}] s (jitter {}) leaves the clip",
                spec.first_onset_s, spec.onset_jitter_s
            )));
        }
        if spec.inter_onset_interval_s - 2.0 * spec.onset_jitter_s < spec.pulse_duration_s {
            return Err(Error::InfeasiblePacking("jittered pulses may overlap".into()));
        }
    }

    let n = (duration_s * fs).round() as usize;
    let mut samples = white_noise(n, spec.noise_rms, spec.noise_seed);
    if spec.n_pulses == 0 || spec.snr_db == f64::NEG_INFINITY {
        return Ok(AudioClip::new(samples, sample_rate_hz, format!("synth-{}", spec.noise_seed)));
    }

    let in_band_fraction = (spec.band_hi_hz - spec.band_lo_hz) / (fs / 2.0);
    let pulse_rms = spec.noise_rms * (in_band_fraction * 10f64.powf(spec.snr_db / 10.0)).sqrt();
    let pulse_len = (spec.pulse_duration_s * fs).round() as usize;
    let ramp = ((RAMP_S * fs).round() as usize).min(pulse_len / 2);

    let mut rng = ChaCha8Rng::seed_from_u64(spec.noise_seed);
    rng.set_stream(1);
    for onset in spec.nominal_onsets() {
        let jitter = if spec.onset_jitter_s > 0.0 {
            rng.random_range(-spec.onset_jitter_s..=spec.onset_jitter_s)
        } else {
            0.0
        };
        let burst = band_limited_noise(pulse_len, fs, spec.band_lo_hz, spec.band_hi_hz, &mut rng);
        let start = ((onset + jitter) * fs).round() as usize;
        add_ramped(&mut samples, start, &burst, pulse_rms, ramp);
    }
    for s in &mut samples {
        *s = s.clamp(-1.0, 1.0);
    }
    Ok(AudioClip::new(samples, sample_rate_hz, format!("synth-{}", spec.noise_seed)))
}

fn add_ramped(samples: &mut [f64], start: usize, burst: &[f64], rms: f64, ramp: usize) {
    let len = burst.len();
    for (i, b) in burst.iter().enumerate() {
        let Some(dst) = samples.get_mut(start + i) else { break };
        let edge = i.min(len - 1 - i);
        let gain = if edge < ramp { 0.5 - 0.5 * (std::f64::consts::PI * edge as f64 / ramp as f64).cos() } else { 1.0 };
        *dst += b * rms * gain;
    }
}

/// One band-limited noise burst at an arbitrary time, band and level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Burst {
    pub onset_s: f64,
    pub duration_s: f64,
    pub band_lo_hz: f64,
    pub band_hi_hz: f64,
    /// In-band, as for [`SynthesisSpec::snr_db`].
    pub snr_db: f64,
}

/// Arbitrary bursts over the same seeded background as
/// [`synthesize_pulse_train`].
pub fn synthesize_bursts(
    bursts: &[Burst],
    duration_s: f64,
    sample_rate_hz: u32,
    noise_rms: f64,
    noise_seed: u64,
) -> Result<AudioClip> {
    let fs = sample_rate_hz as f64;
    if !(duration_s > 0.0) || sample_rate_hz == 0 {
        return Err(Error::InvalidParameter("duration and sample rate must be positive".into()));
    }
    let n = (duration_s * fs).round() as usize;
    let mut samples = white_noise(n, noise_rms, noise_seed);
    let mut rng = ChaCha8Rng::seed_from_u64(noise_seed);
    rng.set_stream(1);
    for b in bursts {
        if !(b.band_lo_hz < b.band_hi_hz) || b.band_hi_hz > fs / 2.0 || !(b.duration_s > 0.0) {
            return Err(Error::InvalidParameter(format!("invalid burst {b:?}")));
        }
        if b.onset_s < 0.0 || b.onset_s + b.duration_s > duration_s {
            return Err(Error::InfeasiblePacking(format!("burst at {} s leaves the clip", b.onset_s)));
        }
        let len = (b.duration_s * fs).round() as usize;
        let rms = noise_rms * ((b.band_hi_hz - b.band_lo_hz) / (fs / 2.0) * 10f64.powf(b.snr_db / 10.0)).sqrt();
        let burst = band_limited_noise(len, fs, b.band_lo_hz, b.band_hi_hz, &mut rng);
        add_ramped(&mut samples, (b.onset_s * fs).round() as usize, &burst, rms, ((RAMP_S * fs).round() as usize).min(len / 2));
    }
    for s in &mut samples {
        *s = s.clamp(-1.0, 1.0);
    }
    Ok(AudioClip::new(samples, sample_rate_hz, format!("synth-{noise_seed}")))
}

/// Pure sinusoid, useful for gate tests.
pub fn pure_tone(freq_hz: f64, amplitude: f64, duration_s: f64, sample_rate_hz: u32) -> AudioClip {
    let fs = sample_rate_hz as f64;
    let n = (duration_s * fs).round() as usize;
    let samples = (0..n)
        .map(|i| amplitude * (2.0 * std::f64::consts::PI * freq_hz * i as f64 / fs).sin())
        .collect();
    AudioClip::new(samples, sample_rate_hz, "tone")
}
