use chrono::{DateTime, TimeDelta, Utc};

use super::{DetectorConfig, Pulse, PulseTrainEvent};
use crate::signal::AudioClip;

/// Deterministic event identifier: source id plus onset in milliseconds.
pub fn event_id_for(source_id: &str, t_start_s: f64) -> String {
    format!("{source_id}@{:09}", (t_start_s * 1000.0).round().max(0.0) as u64)
}

fn utc_at(start: DateTime<Utc>, offset_s: f64) -> DateTime<Utc> {
    start + TimeDelta::microseconds((offset_s * 1e6).round() as i64)
}

/// Greedy left-to-right grouping of time-sorted pulses. A pulse extends the
/// current train when its onset is within `max_gap_s` of the previous onset;
/// otherwise it opens a new train. Trains failing `min_pulses` or the train
/// duration gate are dropped.
pub fn group_pulse_trains(pulses: &[Pulse], cfg: &DetectorConfig, clip: &AudioClip) -> Vec<PulseTrainEvent> {
    let clip_end = clip.duration_s();
    let mut trains: Vec<Vec<Pulse>> = Vec::new();
    let mut current: Vec<Pulse> = Vec::new();
    for p in pulses {
        let mut p = p.clone();
        p.t_start_s = p.t_start_s.max(0.0);
        p.t_end_s = p.t_end_s.min(clip_end);
        if let Some(prev) = current.last() {
            if p.t_start_s - prev.t_start_s > cfg.max_gap_s {
                trains.push(std::mem::take(&mut current));
            }
        }
        current.push(p);
    }
    if !current.is_empty() {
        trains.push(current);
    }

    trains
        .into_iter()
        .filter_map(|pulses| {
            let t_start_s = pulses.first()?.t_start_s;
            let t_end_s = pulses.last()?.t_end_s;
            let dur = t_end_s - t_start_s;
            let keep = pulses.len() >= cfg.min_pulses
                && dur >= cfg.train_dur_min_s
                && dur <= cfg.train_dur_max_s;
            keep.then(|| PulseTrainEvent {
                event_id: event_id_for(&clip.source_id, t_start_s),
                source_id: clip.source_id.clone(),
                start_utc: utc_at(clip.start_utc, t_start_s),
                t_start_s,
                t_end_s,
                pulses,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pulses_at(onsets: &[f64]) -> Vec<Pulse> {
        onsets
            .iter()
            .map(|&t| Pulse {
                t_start_s: t,
                t_end_s: t + 0.05,
                f_lo_hz: 200.0,
                f_hi_hz: 1200.0,
                peak_db: -20.0,
                cell_count: 40,
            })
            .collect()
    }

    fn clip() -> AudioClip {
        AudioClip::new(vec![0.0; 8000 * 30], 8000, "unit")
    }

    fn cfg() -> DetectorConfig {
        DetectorConfig { train_dur_min_s: 1.0, ..Default::default() }
    }

    #[test]
    fn one_train_when_gaps_small() {
        let onsets: Vec<f64> = (0..10).map(|i| 1.0 + 0.5 * i as f64).collect();
        let events = group_pulse_trains(&pulses_at(&onsets), &cfg(), &clip());
        assert_eq!(events.len(), 1);
        assert_eq!(events[0].pulses.len(), 10);
        assert_eq!(events[0].t_start_s, 1.0);
        assert!((events[0].t_end_s - 5.55).abs() < 1e-12);
        assert_eq!(events[0].event_id, "unit@000001000");
    }

    #[test]
    fn split_at_long_gap() {
        let mut onsets: Vec<f64> = (0..5).map(|i| 1.0 + 0.5 * i as f64).collect();
        onsets.extend((0..5).map(|i| 5.0 + 0.5 * i as f64));
        let events = group_pulse_trains(&pulses_at(&onsets), &cfg(), &clip());
        assert_eq!(events.len(), 2);
        assert!(events.iter().all(|e| e.pulses.len() == 5));
        assert_ne!(events[0].event_id, events[1].event_id);
    }

    #[test]
    fn size_and_duration_gates() {
        assert!(group_pulse_trains(&pulses_at(&[1.0, 1.5, 2.0]), &cfg(), &clip()).is_empty());
        let long: Vec<f64> = (0..20).map(|i| 0.5 * i as f64).collect();
        let strict = DetectorConfig { train_dur_max_s: 5.0, ..cfg() };
        assert!(group_pulse_trains(&pulses_at(&long), &strict, &clip()).is_empty());
        assert!(group_pulse_trains(&[], &cfg(), &clip()).is_empty());
    }
}
