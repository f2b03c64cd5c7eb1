//! The 18-value feature vector computed for every detected pulse train,
//! and z-score conditioning for the network input.
//!
//! | slot | meaning                                          | unit  |
//! |------|--------------------------------------------------|-------|
//! | F1   | event duration                                   | s     |
//! | F2   | minimum pulse frequency                          | Hz    |
//! | F3   | maximum pulse frequency                          | Hz    |
//! | F4   | number of pulses                                 |       |
//! | F5   | mean pulse bandwidth                             | Hz    |
//! | F6   | center frequency, (F2 + F3) / 2                  | Hz    |
//! | F7   | L_eq over the event span                         | dBFS  |
//! | F8   | mean pulse duration                              | s     |
//! | F9   | max pulse duration                               | s     |
//! | F10  | min pulse duration                               | s     |
//! | F11  | mean inter-pulse onset interval                  | s     |
//! | F12  | mode of the onset interval (10 ms bins)          | s     |
//! | F13  | max onset interval                               | s     |
//! | F14  | min onset interval                               | s     |
//! | F15  | F7 minus the 5th percentile in-band cell level   | dB    |
//! | F16  | same, 10th percentile                            | dB    |
//! | F17  | same, 20th percentile                            | dB    |
//! | F18  | same, 25th percentile                            | dB    |
//!
//! The mode of the pulse duration is not part of the vector; the interval
//! mode is.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detector::{DetectorConfig, PulseTrainEvent};
use crate::error::{Error, Result};
use crate::signal::{band_percentiles_in_frames, AudioClip, Spectrogram};

pub const N_FEATURES: usize = 18;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "F1", "F2", "F3", "F4", "F5", "F6", "F7", "F8", "F9", "F10", "F11", "F12", "F13", "F14", "F15",
    "F16", "F17", "F18",
];

/// Short human-readable descriptions, index-aligned with [`FEATURE_NAMES`].
pub const FEATURE_DESCRIPTIONS: [&str; N_FEATURES] = [
    "event duration (s)",
    "min frequency (Hz)",
    "max frequency (Hz)",
    "pulse count",
    "mean pulse bandwidth (Hz)",
    "center frequency (Hz)",
    "Leq (dBFS)",
    "mean pulse duration (s)",
    "max pulse duration (s)",
    "min pulse duration (s)",
    "mean pulse interval (s)",
    "mode pulse interval (s)",
    "max pulse interval (s)",
    "min pulse interval (s)",
    "SNR re P5 (dB)",
    "SNR re P10 (dB)",
    "SNR re P20 (dB)",
    "SNR re P25 (dB)",
];

/// Zero-based slots of features referenced elsewhere.
pub mod slot {
    pub const DURATION: usize = 0;
    pub const PULSE_COUNT: usize = 3;
    pub const LEQ: usize = 6;
    pub const MEAN_PULSE_DURATION: usize = 7;
    pub const MEAN_INTERVAL: usize = 10;
    pub const SNR_P5: usize = 14;
}

pub const LEQ_FLOOR_DB: f64 = -120.0;
const SIGMA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Width of the window, centred on the event, for the noise percentiles.
    pub context_window_s: f64,
    pub mode_bin_s: f64,
    pub snr_percentiles: [f64; 4],
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self { context_window_s: 60.0, mode_bin_s: 0.01, snr_percentiles: [5.0, 10.0, 20.0, 25.0] }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.context_window_s > 0.0) || !(self.mode_bin_s > 0.0) {
            return Err(Error::InvalidParameter("context window and mode bin must be positive".into()));
        }
        if self.snr_percentiles.windows(2).any(|w| w[0] > w[1])
            || self.snr_percentiles.iter().any(|p| !(0.0..=100.0).contains(p))
        {
            return Err(Error::InvalidParameter("snr percentiles must be ascending within [0, 100]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub event_id: String,
    pub values: [f64; N_FEATURES],
}

impl FeatureVector {
    pub fn new(event_id: impl Into<String>, values: [f64; N_FEATURES]) -> Self {
        Self { event_id: event_id.into(), values }
    }

    pub fn from_slice(event_id: impl Into<String>, values: &[f64]) -> Result<Self> {
        let values: [f64; N_FEATURES] = values
            .try_into()
            .map_err(|_| Error::DimensionMismatch { expected: N_FEATURES, actual: values.len() })?;
        Ok(Self::new(event_id, values))
    }

    /// 1-based accessor matching the F1..F18 naming.
    pub fn f(&self, index: usize) -> f64 {
        self.values[index - 1]
    }
}

/// Equivalent continuous level `10 log10(mean(x^2))` over `[t0, t1]`, floored
/// at -120 dBFS.
pub fn compute_leq(clip: &AudioClip, span: (f64, f64)) -> Result<f64> {
    let range = clip.sample_range(span.0, span.1);
    if range.is_empty() {
        return Err(Error::EmptySpan { t0: span.0, t1: span.1 });
    }
    let x = &clip.samples[range];
    let ms = x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64;
    Ok(if ms > 0.0 { (10.0 * ms.log10()).max(LEQ_FLOOR_DB) } else { LEQ_FLOOR_DB })
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Histogram mode with bins of `bin_width`. Returns the mean of the values in
/// the most populated bin; ties go to the lower bin.
pub fn binned_mode(values: &[f64], bin_width: f64) -> f64 {
    let mut bins: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for &v in values {
        bins.entry((v / bin_width).floor() as i64).or_default().push(v);
    }
    let mut best: Option<&Vec<f64>> = None;
    for members in bins.values() {
        if best.is_none_or(|b| members.len() > b.len()) {
            best = Some(members);
        }
    }
    best.map(|m| mean(m)).unwrap_or(f64::NAN)
}

/// Computes F1..F18 for one event. `spec` must be the spectrogram of `clip`.
pub fn extract_features(
    event: &PulseTrainEvent,
    spec: &Spectrogram,
    clip: &AudioClip,
    det: &DetectorConfig,
    cfg: &FeatureConfig,
) -> Result<FeatureVector> {
    if event.pulses.is_empty() {
        return Err(Error::EmptyEvent(event.event_id.clone()));
    }
    let pulses = &event.pulses;
    let durations: Vec<f64> = pulses.iter().map(|p| p.duration_s()).collect();
    let bandwidths: Vec<f64> = pulses.iter().map(|p| p.bandwidth_hz()).collect();
    let intervals: Vec<f64> = pulses.windows(2).map(|w| w[1].t_start_s - w[0].t_start_s).collect();
    // a lone pulse has no interval; report zeros rather than NaN
    let (i_mean, i_mode, i_max, i_min) = if intervals.is_empty() {
        (0.0, 0.0, 0.0, 0.0)
    } else {
        (mean(&intervals), binned_mode(&intervals, cfg.mode_bin_s), max_of(&intervals), min_of(&intervals))
    };

    let f_min = pulses.iter().map(|p| p.f_lo_hz).fold(f64::INFINITY, f64::min);
    let f_max = pulses.iter().map(|p| p.f_hi_hz).fold(f64::NEG_INFINITY, f64::max);
    let leq = compute_leq(clip, (event.t_start_s, event.t_end_s))?;

    let center = 0.5 * (event.t_start_s + event.t_end_s);
    let half = cfg.context_window_s / 2.0;
    let frames = spec.frames_between(center - half, center + half);
    let noise = band_percentiles_in_frames(spec, det.band(), frames, &cfg.snr_percentiles)?;

    let values = [
        event.t_end_s - event.t_start_s,
        f_min,
        f_max,
        pulses.len() as f64,
        mean(&bandwidths),
        0.5 * (f_min + f_max),
        leq,
        mean(&durations),
        max_of(&durations),
        min_of(&durations),
        i_mean,
        i_mode,
        i_max,
        i_min,
        leq - noise[0],
        leq - noise[1],
        leq - noise[2],
        leq - noise[3],
    ];
    if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "feature {} of {} is not finite",
            FEATURE_NAMES[bad], event.event_id
        )));
    }
    Ok(FeatureVector::new(event.event_id.clone(), values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizerStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Per-feature mean and population standard deviation, with the deviation
/// floored at 1e-12.
pub fn fit_standardizer(set: &[FeatureVector]) -> Result<StandardizerStats> {
    if set.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = set.len() as f64;
    let mut mean_v = vec![0.0; N_FEATURES];
    let mut std_v = vec![0.0; N_FEATURES];
    for j in 0..N_FEATURES {
        let col: Vec<f64> = set.iter().map(|fv| fv.values[j]).collect();
        let first = col[0];
        if col.iter().all(|&v| v == first) {
            // exact mean so constant slots standardize to exactly zero
            mean_v[j] = first;
            std_v[j] = SIGMA_FLOOR;
            continue;
        }
        let m = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / n;
        mean_v[j] = m;
        std_v[j] = var.sqrt().max(SIGMA_FLOOR);
    }
    Ok(StandardizerStats { mean: mean_v, std: std_v })
}

impl StandardizerStats {
    fn check(&self, fv: &FeatureVector) -> Result<()> {
        if self.mean.len() != fv.values.len() || self.std.len() != fv.values.len() {
            return Err(Error::DimensionMismatch { expected: self.mean.len(), actual: fv.values.len() });
        }
        Ok(())
    }

    pub fn standardize(&self, fv: &FeatureVector) -> Result<FeatureVector> {
        self.check(fv)?;
        let mut out = fv.clone();
        for (j, v) in out.values.iter_mut().enumerate() {
            *v = (*v - self.mean[j]) / self.std[j];
        }
        Ok(out)
    }

    pub fn unstandardize(&self, fv: &FeatureVector) -> Result<FeatureVector> {
        self.check(fv)?;
        let mut out = fv.clone();
        for (j, v) in out.values.iter_mut().enumerate() {
            *v = *v * self.std[j] + self.mean[j];
        }
        Ok(out)
    }
}

pub fn standardize(fv: &FeatureVector, stats: &StandardizerStats) -> Result<FeatureVector> {
    stats.standardize(fv)
}

/// Writes the feature table: header `event_id,F1..F18`, one row per event.
/// Values use the shortest representation that reads back bit-exactly.
pub fn write_feature_table<W: Write>(out: W, rows: &[FeatureVector]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["event_id"];
    header.extend(FEATURE_NAMES);
    w.write_record(&header)?;
    for fv in rows {
        let mut rec = vec![fv.event_id.clone()];
        rec.extend(fv.values.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_feature_table<R: Read>(input: R) -> Result<Vec<FeatureVector>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let expected: Vec<&str> = std::iter::once("event_id").chain(FEATURE_NAMES).collect();
    if header.iter().collect::<Vec<_>>() != expected {
        return Err(Error::InvalidParameter(format!("unexpected feature header {header:?}")));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let values = parse_floats(rec.iter().skip(1))?;
        rows.push(FeatureVector::from_slice(&rec[0], &values)?);
    }
    Ok(rows)
}

pub(crate) fn parse_floats<'a>(cells: impl Iterator<Item = &'a str>) -> Result<Vec<f64>> {
    cells
        .map(|c| c.trim().parse::<f64>().map_err(|e| Error::InvalidParameter(format!("bad number {c:?}: {e}"))))
        .collect()
}

pub fn save_feature_table(path: impl AsRef<Path>, rows: &[FeatureVector]) -> Result<()> {
    let mut buf = Vec::new();
    write_feature_table(&mut buf, rows)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn load_feature_table(path: impl AsRef<Path>) -> Result<Vec<FeatureVector>> {
    let path = path.as_ref();
    read_feature_table(std::fs::File::open(path)?).map_err(|e| match e {
        Error::Io(io) => Error::Io(io),
        other => Error::Format { path: path.to_path_buf(), detail: other.to_string() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::{detect_events, Pulse};
    use crate::signal::{compute_spectrogram, synthesize_pulse_train, StftParams, SynthesisSpec};
    use proptest::prelude::*;

    fn planted(seed: u64) -> (AudioClip, Spectrogram, PulseTrainEvent) {
        let spec = SynthesisSpec { snr_db: 20.0, noise_seed: seed, first_onset_s: 4.0, ..Default::default() };
        let clip = synthesize_pulse_train(&spec, 20.0, 8000).unwrap();
        let stft = StftParams::default();
        let sg = compute_spectrogram(&clip, &stft).unwrap();
        let mut events = detect_events(&clip, &stft, &DetectorConfig::default()).unwrap();
        assert_eq!(events.len(), 1);
        (clip, sg, events.remove(0))
    }

    #[test]
    fn planted_train_features() {
        let (clip, sg, ev) = planted(21);
        let fv = extract_features(&ev, &sg, &clip, &DetectorConfig::default(), &FeatureConfig::default()).unwrap();
        let hop = 0.016;
        assert_eq!(fv.f(4), 30.0);
        assert!((fv.f(8) - 0.05).abs() <= hop, "F8 {}", fv.f(8));
        assert!((fv.f(11) - 0.30).abs() <= hop, "F11 {}", fv.f(11));
        assert!(fv.f(2) <= fv.f(6) && fv.f(6) <= fv.f(3));
        assert!(fv.f(15) >= fv.f(16) && fv.f(16) >= fv.f(17) && fv.f(17) >= fv.f(18));
        assert!(fv.f(9) >= fv.f(8) && fv.f(8) >= fv.f(10));
        assert!(fv.f(13) >= fv.f(11) && fv.f(11) >= fv.f(14));
        let again = extract_features(&ev, &sg, &clip, &DetectorConfig::default(), &FeatureConfig::default()).unwrap();
        assert_eq!(fv, again);
        assert!(fv.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn two_pulse_event_collapses_interval_stats() {
        let (clip, sg, mut ev) = planted(22);
        ev.pulses.truncate(2);
        ev.t_end_s = ev.pulses[1].t_end_s;
        let fv = extract_features(&ev, &sg, &clip, &DetectorConfig::default(), &FeatureConfig::default()).unwrap();
        assert_eq!(fv.f(11), fv.f(12));
        assert_eq!(fv.f(12), fv.f(13));
        assert_eq!(fv.f(13), fv.f(14));
    }

    #[test]
    fn event_without_pulses_is_rejected() {
        let (clip, sg, mut ev) = planted(23);
        ev.pulses.clear();
        assert!(matches!(
            extract_features(&ev, &sg, &clip, &DetectorConfig::default(), &FeatureConfig::default()),
            Err(Error::EmptyEvent(_))
        ));
    }

    #[test]
    fn leq_reference_signals() {
        let square = AudioClip::new((0..8000).map(|i| if i % 20 < 10 { 1.0 } else { -1.0 }).collect(), 8000, "sq");
        assert!(compute_leq(&square, (0.0, 1.0)).unwrap().abs() < 1e-12);
        let sine = crate::signal::pure_tone(100.0, 1.0, 1.0, 8000);
        assert!((compute_leq(&sine, (0.0, 1.0)).unwrap() + 3.0103).abs() < 0.01);
        let silence = AudioClip::new(vec![0.0; 800], 8000, "s");
        assert_eq!(compute_leq(&silence, (0.0, 0.1)).unwrap(), -120.0);
        assert!(matches!(compute_leq(&silence, (0.05, 0.05)), Err(Error::EmptySpan { .. })));
    }

    #[test]
    fn mode_ties_to_lower_bin() {
        assert!((binned_mode(&[0.301, 0.302, 0.455, 0.451], 0.01) - 0.3015).abs() < 1e-12);
        assert_eq!(binned_mode(&[0.3], 0.01), 0.3);
        assert_eq!(binned_mode(&[0.1, 0.5, 0.52, 0.525, 0.1], 0.01), 0.1);
        assert!((binned_mode(&[0.1, 0.52, 0.525, 0.528], 0.01) - 0.5243333333333333).abs() < 1e-12);
    }

    fn fv(id: &str, x: f64) -> FeatureVector {
        FeatureVector::new(id, [x; N_FEATURES])
    }

    #[test]
    fn standardizer_contracts() {
        assert!(matches!(fit_standardizer(&[]), Err(Error::EmptySet)));
        let same = vec![fv("a", 0.1); 3];
        let stats = fit_standardizer(&same).unwrap();
        assert!(stats.std.iter().all(|&s| s == 1e-12));
        assert!(stats.standardize(&same[0]).unwrap().values.iter().all(|&v| v == 0.0));

        let stats = fit_standardizer(&[fv("a", 0.0), fv("b", 2.0)]).unwrap();
        assert!(stats.mean.iter().all(|&m| m == 1.0));
        assert!(stats.std.iter().all(|&s| s == 1.0));
        let at_mean = FeatureVector::new("m", stats.mean.clone().try_into().unwrap());
        assert!(stats.standardize(&at_mean).unwrap().values.iter().all(|&v| v == 0.0));

        let short = StandardizerStats { mean: vec![0.0; 3], std: vec![1.0; 3] };
        assert!(matches!(short.standardize(&fv("x", 1.0)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn feature_table_round_trip() {
        let rows = vec![fv("a@1", 0.1), FeatureVector::new("b@2", std::array::from_fn(|i| i as f64 / 3.0))];
        let mut buf = Vec::new();
        write_feature_table(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("event_id,F1,F2,F3,F4,F5,F6,F7,F8,F9,F10,F11,F12,F13,F14,F15,F16,F17,F18\n"));
        assert_eq!(read_feature_table(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn single_pulse_event_has_zero_intervals() {
        let (clip, sg, mut ev) = planted(24);
        ev.pulses.truncate(1);
        ev.t_end_s = ev.pulses[0].t_end_s;
        let fv = extract_features(&ev, &sg, &clip, &DetectorConfig::default(), &FeatureConfig::default()).unwrap();
        assert_eq!(&fv.values[10..14], &[0.0; 4]);
        let _ = Pulse::duration_s(&ev.pulses[0]);
    }

    proptest! {
        #[test]
        fn standardized_set_is_zero_mean_unit_variance(
            data in prop::collection::vec(prop::array::uniform18(-1e3f64..1e3), 2..40)
        ) {
            let set: Vec<FeatureVector> = data.iter().enumerate().map(|(i, v)| FeatureVector::new(i.to_string(), *v)).collect();
            let stats = fit_standardizer(&set).unwrap();
            let z: Vec<FeatureVector> = set.iter().map(|f| stats.standardize(f).unwrap()).collect();
            for j in 0..N_FEATURES {
                let col: Vec<f64> = z.iter().map(|f| f.values[j]).collect();
                let m = col.iter().sum::<f64>() / col.len() as f64;
                let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / col.len() as f64;
                prop_assert!(m.abs() < 1e-9);
                if stats.std[j] > 1e-6 {
                    prop_assert!((var - 1.0).abs() < 1e-9);
                }
            }
            for (orig, zz) in set.iter().zip(&z) {
                let back = stats.unstandardize(zz).unwrap();
                for (a, b) in orig.values.iter().zip(&back.values) {
                    prop_assert!((a - b).abs() < 1e-9);
                }
            }
        }
    }
}
