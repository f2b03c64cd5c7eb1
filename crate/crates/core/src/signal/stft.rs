use std::fmt::Write as _;
use std::ops::Range;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::AudioClip;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    /// Periodic raised cosine (Hann).
    Hann,
    Hamming,
    Rectangular,
}

impl WindowKind {
    pub fn coefficients(self, len: usize) -> Vec<f64> {
        let n = len as f64;
        (0..len)
            .map(|i| {
                let phase = 2.0 * std::f64::consts::PI * i as f64 / n;
                match self {
                    WindowKind::Hann => 0.5 - 0.5 * phase.cos(),
                    WindowKind::Hamming => 0.54 - 0.46 * phase.cos(),
                    WindowKind::Rectangular => 1.0,
                }
            })
            .collect()
    }
}

impl std::str::FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hann" | "raised-cosine" => Ok(WindowKind::Hann),
            "hamming" => Ok(WindowKind::Hamming),
            "rectangular" | "rect" => Ok(WindowKind::Rectangular),
            other => Err(Error::InvalidParameter(format!("unknown window kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StftParams {
    pub window_len_samples: usize,
    pub hop_samples: usize,
    pub window_kind: WindowKind,
    pub floor_db: f64,
}

impl Default for StftParams {
    fn default() -> Self {
        Self {
            window_len_samples: 256,
            hop_samples: 128,
            window_kind: WindowKind::Hann,
            floor_db: -120.0,
        }
    }
}

impl StftParams {
    pub fn validate(&self) -> Result<()> {
        if self.window_len_samples < 2 {
            return Err(Error::InvalidParameter("window_len_samples must be >= 2".into()));
        }
        if self.hop_samples < 1 || self.hop_samples > self.window_len_samples {
            return Err(Error::InvalidParameter(
                "hop_samples must be in [1, window_len_samples]".into(),
            ));
        }
        if !self.floor_db.is_finite() {
            return Err(Error::InvalidParameter("floor_db must be finite".into()));
        }
        Ok(())
    }

    pub fn frame_count(&self, num_samples: usize) -> usize {
        if num_samples < self.window_len_samples {
            0
        } else {
            (num_samples - self.window_len_samples) / self.hop_samples + 1
        }
    }
}

/// Log-magnitude time-frequency matrix, stored frame-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    cells_db: Vec<f64>,
    frame_times_s: Vec<f64>,
    bin_freqs_hz: Vec<f64>,
    pub params: StftParams,
    pub sample_rate_hz: u32,
}

impl Spectrogram {
    /// Builds a spectrogram from raw parts. Cells are laid out frame-major
    /// (`cells[frame * n_bins + bin]`).
    pub fn from_parts(
        cells_db: Vec<f64>,
        frame_times_s: Vec<f64>,
        bin_freqs_hz: Vec<f64>,
        params: StftParams,
        sample_rate_hz: u32,
    ) -> Result<Self> {
        if cells_db.len() != frame_times_s.len() * bin_freqs_hz.len() {
            return Err(Error::DimensionMismatch {
                expected: frame_times_s.len() * bin_freqs_hz.len(),
                actual: cells_db.len(),
            });
        }
        let increasing = |v: &[f64]| v.windows(2).all(|w| w[1] > w[0]);
        if !increasing(&frame_times_s) || !increasing(&bin_freqs_hz) {
            return Err(Error::InvalidParameter("axes must be strictly increasing".into()));
        }
        Ok(Self { cells_db, frame_times_s, bin_freqs_hz, params, sample_rate_hz })
    }

    pub fn n_frames(&self) -> usize {
        self.frame_times_s.len()
    }

    pub fn n_bins(&self) -> usize {
        self.bin_freqs_hz.len()
    }

    pub fn frame_times_s(&self) -> &[f64] {
        &self.frame_times_s
    }

    pub fn bin_freqs_hz(&self) -> &[f64] {
        &self.bin_freqs_hz
    }

    pub fn cells_db(&self) -> &[f64] {
        &self.cells_db
    }

    #[inline]
    pub fn at(&self, frame: usize, bin: usize) -> f64 {
        self.cells_db[frame * self.bin_freqs_hz.len() + bin]
    }

    pub fn frame(&self, frame: usize) -> &[f64] {
        let nb = self.n_bins();
        &self.cells_db[frame * nb..(frame + 1) * nb]
    }

    pub fn hop_s(&self) -> f64 {
        self.params.hop_samples as f64 / self.sample_rate_hz as f64
    }

    /// Width of one frequency bin in Hz.
    pub fn bin_width_hz(&self) -> f64 {
        self.sample_rate_hz as f64 / self.params.window_len_samples as f64
    }

    /// Bins whose center frequency lies in `[lo_hz, hi_hz]`.
    pub fn band_bins(&self, lo_hz: f64, hi_hz: f64) -> Result<Range<usize>> {
        let start = self.bin_freqs_hz.partition_point(|&f| f < lo_hz);
        let end = self.bin_freqs_hz.partition_point(|&f| f <= hi_hz);
        if start >= end {
            return Err(Error::EmptyBand { lo_hz, hi_hz });
        }
        Ok(start..end)
    }

    /// Frames whose center time lies in `[t0, t1]`.
    pub fn frames_between(&self, t0: f64, t1: f64) -> Range<usize> {
        let start = self.frame_times_s.partition_point(|&t| t < t0);
        let end = self.frame_times_s.partition_point(|&t| t <= t1);
        start..end.max(start)
    }

    /// Text matrix export: `#fs`, `#hop`, `#nfft` header lines followed by one
    /// whitespace-separated row of dB values per frame.
    pub fn to_matrix_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "#fs {}", self.sample_rate_hz);
        let _ = writeln!(out, "#hop {}", self.params.hop_samples);
        let _ = writeln!(out, "#nfft {}", self.params.window_len_samples);
        for f in 0..self.n_frames() {
            let row: Vec<String> = self.frame(f).iter().map(|v| format!("{v:.3}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Short-time Fourier transform magnitude in dBFS. Magnitudes are scaled by
/// `2 / sum(window)` so a full-scale sinusoid centred on a bin reads 0 dB.
pub fn compute_spectrogram(clip: &AudioClip, params: &StftParams) -> Result<Spectrogram> {
    params.validate()?;
    let n = params.window_len_samples;
    if clip.samples.len() < n {
        return Err(Error::ClipTooShort { samples: clip.samples.len(), window: n });
    }
    let fs = clip.sample_rate_hz as f64;
    let window = params.window_kind.coefficients(n);
    let scale = 2.0 / window.iter().sum::<f64>();
    let n_frames = params.frame_count(clip.samples.len());
    let n_bins = n / 2 + 1;

    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut cells = Vec::with_capacity(n_frames * n_bins);

    for frame in 0..n_frames {
        let start = frame * params.hop_samples;
        for (dst, (&s, &w)) in buf.iter_mut().zip(clip.samples[start..start + n].iter().zip(&window)) {
            *dst = Complex::new(s * w, 0.0);
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        cells.extend(buf[..n_bins].iter().map(|c| {
            let mag = c.norm() * scale;
            if mag > 0.0 {
                (20.0 * mag.log10()).max(params.floor_db)
            } else {
                params.floor_db
            }
        }));
    }

    let frame_times_s = (0..n_frames)
        .map(|f| (f * params.hop_samples) as f64 / fs + n as f64 / (2.0 * fs))
        .collect();
    let bin_freqs_hz = (0..n_bins).map(|k| k as f64 * fs / n as f64).collect();
    Ok(Spectrogram {
        cells_db: cells,
        frame_times_s,
        bin_freqs_hz,
        params: *params,
        sample_rate_hz: clip.sample_rate_hz,
    })
}

/// Nearest-rank percentile of an unsorted slice. `pct` in `[0, 100]`.
fn nearest_rank(sorted: &[f64], pct: f64) -> f64 {
    let n = sorted.len();
    let rank = (pct * n as f64 / 100.0).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

fn check_pcts(pcts: &[f64]) -> Result<()> {
    match pcts.iter().find(|p| !(0.0..=100.0).contains(*p)) {
        Some(p) => Err(Error::InvalidParameter(format!("percentile {p} outside [0, 100]"))),
        None => Ok(()),
    }
}

/// Nearest-rank percentiles over every cell whose bin frequency lies in the
/// band. The output follows the order of `pcts`.
pub fn band_percentiles(spec: &Spectrogram, band: (f64, f64), pcts: &[f64]) -> Result<Vec<f64>> {
    band_percentiles_in_frames(spec, band, 0..spec.n_frames(), pcts)
}

/// As [`band_percentiles`], restricted to a frame range.
pub fn band_percentiles_in_frames(
    spec: &Spectrogram,
    band: (f64, f64),
    frames: Range<usize>,
    pcts: &[f64],
) -> Result<Vec<f64>> {
    check_pcts(pcts)?;
    let bins = spec.band_bins(band.0, band.1)?;
    let frames = frames.start.min(spec.n_frames())..frames.end.min(spec.n_frames());
    if frames.is_empty() {
        return Err(Error::EmptyBand { lo_hz: band.0, hi_hz: band.1 });
    }
    let mut values: Vec<f64> = frames
        .flat_map(|f| spec.frame(f)[bins.clone()].iter().copied())
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(pcts.iter().map(|&p| nearest_rank(&values, p)).collect())
}
