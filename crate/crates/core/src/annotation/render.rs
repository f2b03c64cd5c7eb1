use crate::detector::PulseTrainEvent;
use crate::error::{Error, Result};
use crate::signal::{compute_spectrogram, AudioClip, StftParams};

const OUTLINE: u8 = 255;

/// Time runs left to right, frequency bottom to top from 0 Hz up to
/// `band_hi_hz`. dB maps linearly from the floor (black) to the image
/// maximum (white).
pub fn render_spectrogram_png(
    clip: &AudioClip,
    event: &PulseTrainEvent,
    pad_s: f64,
    stft: &StftParams,
    band_hi_hz: f64,
) -> Result<Vec<u8>> {
    let range = clip.sample_range(event.t_start_s - pad_s, event.t_end_s + pad_s);
    let t0 = range.start as f64 / clip.sample_rate_hz as f64;
    let view = AudioClip::new(clip.samples[range].to_vec(), clip.sample_rate_hz, clip.source_id.clone());
    let spec = compute_spectrogram(&view, stft)?;

    let bw = spec.bin_width_hz();
    let top_bin = ((band_hi_hz / bw).ceil() as usize).min(spec.n_bins() - 1);
    let (w, h) = (spec.n_frames(), top_bin + 1);

    let mut max_db = stft.floor_db;
    for f in 0..w {
        for &v in &spec.frame(f)[..h] {
            max_db = max_db.max(v);
        }
    }
    let span = max_db - stft.floor_db;
    let mut pixels = vec![0u8; w * h];
    for f in 0..w {
        for (b, &v) in spec.frame(f)[..h].iter().enumerate() {
            let level = if span > 0.0 { ((v - stft.floor_db) / span * 255.0).round().clamp(0.0, 255.0) } else { 0.0 };
            pixels[(top_bin - b) * w + f] = level as u8;
        }
    }

    let fs = clip.sample_rate_hz as f64;
    let col = |t: f64| {
        let c = ((t - t0) * fs - stft.window_len_samples as f64 / 2.0) / stft.hop_samples as f64;
        (c.round().max(0.0) as usize).min(w - 1)
    };
    let row = |hz: f64| top_bin - ((hz / bw).round().max(0.0) as usize).min(top_bin);
    let f_lo = event.pulses.iter().map(|p| p.f_lo_hz).fold(f64::INFINITY, f64::min);
    let f_hi = event.pulses.iter().map(|p| p.f_hi_hz).fold(0.0, f64::max);
    let (c0, c1) = (col(event.t_start_s), col(event.t_end_s));
    let (r0, r1) = if f_lo.is_finite() { (row(f_hi), row(f_lo)) } else { (0, h - 1) };
    for c in c0..=c1 {
        pixels[r0 * w + c] = OUTLINE;
        pixels[r1 * w + c] = OUTLINE;
    }
    for r in r0..=r1 {
        pixels[r * w + c0] = OUTLINE;
        pixels[r * w + c1] = OUTLINE;
    }

    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, w as u32, h as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(|e| Error::InvalidParameter(e.to_string()))?;
        writer.write_image_data(&pixels).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::{detect_events, DetectorConfig};
    use crate::signal::{synthesize_pulse_train, SynthesisSpec};

    fn decode(bytes: &[u8]) -> (u32, u32, Vec<u8>) {
        let dec = png::Decoder::new(std::io::Cursor::new(bytes));
        let mut reader = dec.read_info().unwrap();
        let mut buf = vec![0; reader.output_buffer_size().unwrap()];
        let info = reader.next_frame(&mut buf).unwrap();
        (info.width, info.height, buf[..info.buffer_size()].to_vec())
    }

    #[test]
    fn width_covers_padded_span() {
        let spec = SynthesisSpec { first_onset_s: 5.0, noise_seed: 3, ..Default::default() };
        let clip = synthesize_pulse_train(&spec, 25.0, 8000).unwrap();
        let stft = StftParams::default();
        let ev = &detect_events(&clip, &stft, &DetectorConfig::default()).unwrap()[0];
        let png = render_spectrogram_png(&clip, ev, 2.0, &stft, 1400.0).unwrap();
        let (w, h, px) = decode(&png);
        let n = clip.sample_range(ev.t_start_s - 2.0, ev.t_end_s + 2.0).len();
        assert_eq!(w as usize, stft.frame_count(n));
        assert_eq!(h, 46); // bins 0..=45 at 31.25 Hz reach 1406 Hz
        assert_eq!(*px.iter().max().unwrap(), 255);
        assert_eq!(png, render_spectrogram_png(&clip, ev, 2.0, &stft, 1400.0).unwrap());
    }
}
