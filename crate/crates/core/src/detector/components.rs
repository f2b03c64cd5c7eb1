use super::{BinaryMask, DetectorConfig, Pulse};
use crate::error::{Error, Result};
use crate::signal::Spectrogram;

/// Bounding box and statistics of one connected region of set cells.
#[derive(Debug, Clone, PartialEq)]
struct Region {
    first_frame: usize,
    last_frame: usize,
    lo_bin: usize,
    hi_bin: usize,
    peak_db: f64,
    cells: usize,
}

impl Region {
    fn absorb(&mut self, other: &Region) {
        self.last_frame = self.last_frame.max(other.last_frame);
        self.lo_bin = self.lo_bin.min(other.lo_bin);
        self.hi_bin = self.hi_bin.max(other.hi_bin);
        self.peak_db = self.peak_db.max(other.peak_db);
        self.cells += other.cells;
    }
}

/// 8-connected component labelling by flood fill.
fn label_regions(mask: &BinaryMask, spec: &Spectrogram) -> Vec<Region> {
    let (nf, nb) = (mask.n_frames(), mask.n_bins());
    let mut seen = vec![false; nf * nb];
    let mut regions = Vec::new();
    let mut stack = Vec::new();

    for f0 in 0..nf {
        for b0 in 0..nb {
            if !mask.get(f0, b0) || seen[f0 * nb + b0] {
                continue;
            }
            seen[f0 * nb + b0] = true;
            stack.push((f0, b0));
            let mut r = Region {
                first_frame: f0,
                last_frame: f0,
                lo_bin: b0,
                hi_bin: b0,
                peak_db: f64::NEG_INFINITY,
                cells: 0,
            };
            while let Some((f, b)) = stack.pop() {
                r.first_frame = r.first_frame.min(f);
                r.last_frame = r.last_frame.max(f);
                r.lo_bin = r.lo_bin.min(b);
                r.hi_bin = r.hi_bin.max(b);
                r.peak_db = r.peak_db.max(spec.at(f, b));
                r.cells += 1;
                for nf_ in f.saturating_sub(1)..=(f + 1).min(nf - 1) {
                    for nb_ in b.saturating_sub(1)..=(b + 1).min(nb - 1) {
                        let idx = nf_ * nb + nb_;
                        if mask.get(nf_, nb_) && !seen[idx] {
                            seen[idx] = true;
                            stack.push((nf_, nb_));
                        }
                    }
                }
            }
            regions.push(r);
        }
    }
    regions
}

/// Turns connected regions of the mask into pulses.
///
/// Regions whose frame spans intersect are fused first, since a broadband
/// pulse can break into several regions across frequency within the same
/// frames. Fused regions outside the pulse-duration gate are dropped. A
/// region covering frames `a..=b` spans `[t_a - hop/2, t_b + hop/2]`.
pub fn extract_pulses(mask: &BinaryMask, spec: &Spectrogram, cfg: &DetectorConfig) -> Result<Vec<Pulse>> {
    if mask.n_frames() != spec.n_frames() || mask.n_bins() != spec.n_bins() {
        return Err(Error::DimensionMismatch {
            expected: spec.n_frames() * spec.n_bins(),
            actual: mask.n_frames() * mask.n_bins(),
        });
    }
    let mut regions = label_regions(mask, spec);
    regions.sort_by_key(|r| (r.first_frame, r.lo_bin));

    let mut fused: Vec<Region> = Vec::with_capacity(regions.len());
    for r in regions {
        match fused.last_mut() {
            Some(prev) if r.first_frame <= prev.last_frame => prev.absorb(&r),
            _ => fused.push(r),
        }
    }

    let half_hop = spec.hop_s() / 2.0;
    let half_bin = spec.bin_width_hz() / 2.0;
    let times = spec.frame_times_s();
    let freqs = spec.bin_freqs_hz();
    Ok(fused
        .into_iter()
        .map(|r| Pulse {
            t_start_s: times[r.first_frame] - half_hop,
            t_end_s: times[r.last_frame] + half_hop,
            f_lo_hz: (freqs[r.lo_bin] - half_bin).max(cfg.band_lo_hz),
            f_hi_hz: (freqs[r.hi_bin] + half_bin).min(cfg.band_hi_hz),
            peak_db: r.peak_db,
            cell_count: r.cells,
        })
        .filter(|p| {
            let d = p.duration_s();
            // tolerate rounding in frame arithmetic at the gate edges
            d >= cfg.pulse_dur_min_s - 1e-9 && d <= cfg.pulse_dur_max_s + 1e-9
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::StftParams;

    const HOP: f64 = 0.016;
    const BW: f64 = 31.25;

    fn spec(frames: usize, bins: usize) -> Spectrogram {
        let values = (0..frames * bins).map(|i| -60.0 + (i % 7) as f64).collect();
        Spectrogram::from_parts(
            values,
            (0..frames).map(|f| 0.016 + HOP * f as f64).collect(),
            (0..bins).map(|b| BW * b as f64).collect(),
            StftParams::default(),
            8000,
        )
        .unwrap()
    }

    fn fill(mask: &mut BinaryMask, frames: std::ops::RangeInclusive<usize>, bins: std::ops::RangeInclusive<usize>) {
        for f in frames {
            for b in bins.clone() {
                mask.set(f, b, true);
            }
        }
    }

    #[test]
    fn rectangular_block_geometry() {
        let s = spec(40, 129);
        let mut m = BinaryMask::new(40, 129, 0.0);
        // 200 Hz = bin 6.4 -> 7; 1200 Hz = bin 38.4 -> 38
        fill(&mut m, 10..=13, 7..=38);
        let pulses = extract_pulses(&m, &s, &DetectorConfig::default()).unwrap();
        assert_eq!(pulses.len(), 1);
        let p = &pulses[0];
        assert!((p.duration_s() - 0.064).abs() < 1e-9);
        assert!((p.f_lo_hz - (7.0 * BW - BW / 2.0)).abs() < 1e-9);
        assert!((p.f_hi_hz - (38.0 * BW + BW / 2.0)).abs() < 1e-9);
        assert!(p.f_lo_hz > 190.0 && p.f_hi_hz < 1210.0);
        assert_eq!(p.cell_count, 4 * 32);
        let peak = (10..=13)
            .flat_map(|f| (7..=38).map(move |b| (f, b)))
            .map(|(f, b)| s.at(f, b))
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(p.peak_db, peak);
    }

    #[test]
    fn separated_blocks_are_two_pulses() {
        let s = spec(40, 129);
        let mut m = BinaryMask::new(40, 129, 0.0);
        fill(&mut m, 5..=8, 10..=20);
        fill(&mut m, 10..=13, 22..=30);
        let pulses = extract_pulses(&m, &s, &DetectorConfig::default()).unwrap();
        assert_eq!(pulses.len(), 2);
        assert!(pulses[0].t_start_s < pulses[1].t_start_s);
        assert!(pulses[0].t_end_s <= pulses[1].t_start_s);
    }

    #[test]
    fn diagonal_touch_is_connected() {
        let s = spec(20, 129);
        let mut m = BinaryMask::new(20, 129, 0.0);
        fill(&mut m, 3..=4, 10..=12);
        fill(&mut m, 5..=6, 13..=15);
        let pulses = extract_pulses(&m, &s, &DetectorConfig::default()).unwrap();
        assert_eq!(pulses.len(), 1);
        assert_eq!(pulses[0].cell_count, 12);
    }

    #[test]
    fn same_frames_different_bands_fuse() {
        let s = spec(20, 129);
        let mut m = BinaryMask::new(20, 129, 0.0);
        fill(&mut m, 3..=5, 5..=8);
        fill(&mut m, 4..=6, 30..=33);
        let pulses = extract_pulses(&m, &s, &DetectorConfig::default()).unwrap();
        assert_eq!(pulses.len(), 1);
        assert!((pulses[0].duration_s() - 4.0 * HOP).abs() < 1e-9);
    }

    #[test]
    fn duration_gate() {
        let s = spec(40, 129);
        let mut m = BinaryMask::new(40, 129, 0.0);
        fill(&mut m, 5..=5, 10..=30); // 16 ms
        fill(&mut m, 10..=30, 10..=30); // 336 ms
        assert!(extract_pulses(&m, &s, &DetectorConfig::default()).unwrap().is_empty());
        assert!(extract_pulses(&BinaryMask::new(40, 129, 0.0), &s, &DetectorConfig::default())
            .unwrap()
            .is_empty());
    }
}
