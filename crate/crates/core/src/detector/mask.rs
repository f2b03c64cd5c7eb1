use super::DetectorConfig;
use crate::error::Result;
use crate::signal::{band_percentiles, Spectrogram};

/// One-bit image aligned cell-for-cell with a [`Spectrogram`].
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    cells: Vec<bool>,
    n_frames: usize,
    n_bins: usize,
    pub threshold_db_used: f64,
}

impl BinaryMask {
    pub fn new(n_frames: usize, n_bins: usize, threshold_db_used: f64) -> Self {
        Self { cells: vec![false; n_frames * n_bins], n_frames, n_bins, threshold_db_used }
    }

    pub fn n_frames(&self) -> usize {
        self.n_frames
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    #[inline]
    pub fn get(&self, frame: usize, bin: usize) -> bool {
        self.cells[frame * self.n_bins + bin]
    }

    #[inline]
    pub fn set(&mut self, frame: usize, bin: usize, value: bool) {
        self.cells[frame * self.n_bins + bin] = value;
    }

    pub fn count_true(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }
}

/// Sets each in-band cell that strictly exceeds the in-band
/// `binarize_pct` percentile plus `binarize_offset_db`. Cells outside the
/// analysis band are always clear.
pub fn binarize(spec: &Spectrogram, cfg: &DetectorConfig) -> Result<BinaryMask> {
    let bins = spec.band_bins(cfg.band_lo_hz, cfg.band_hi_hz)?;
    let reference = band_percentiles(spec, cfg.band(), &[cfg.binarize_pct])?[0];
    let threshold = reference + cfg.binarize_offset_db;
    let mut mask = BinaryMask::new(spec.n_frames(), spec.n_bins(), threshold);
    for f in 0..spec.n_frames() {
        let row = spec.frame(f);
        for b in bins.clone() {
            if row[b] > threshold {
                mask.set(f, b, true);
            }
        }
    }
    Ok(mask)
}
