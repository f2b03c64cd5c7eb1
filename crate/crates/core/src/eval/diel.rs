use std::io::Write;

use chrono::{DateTime, Duration, NaiveDate, Timelike, Utc};
use serde::{Deserialize, Serialize};

use super::solar::day_night;
use crate::error::{Error, Result};

/// Observation site. Grid rows and columns are in local clock time at
/// `utc_offset_hours`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub utc_offset_hours: f64,
}

impl Default for Site {
    fn default() -> Self {
        Self { lat_deg: 42.4, lon_deg: -70.3, utc_offset_hours: -5.0 }
    }
}

impl Site {
    pub fn to_local(&self, t: DateTime<Utc>) -> chrono::NaiveDateTime {
        t.naive_utc() + Duration::seconds((self.utc_offset_hours * 3600.0).round() as i64)
    }
}

pub const DEFAULT_BINS_PER_DAY: u32 = 144;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DielGrid {
    pub dates: Vec<NaiveDate>,
    pub bins_per_day: u32,
    /// `counts[date][bin]`
    pub counts: Vec<Vec<u32>>,
    pub night_mask: Vec<Vec<bool>>,
    pub site: Site,
}

impl DielGrid {
    pub fn bin_minutes(&self) -> u32 {
        1440 / self.bins_per_day
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().map(|&c| c as u64).sum()
    }
}

/// Bins events by local date and time of day over the inclusive date range.
/// Events outside the range are dropped. Night cells are judged at bin centers.
pub fn diel_grid(
    events: &[DateTime<Utc>],
    range: (NaiveDate, NaiveDate),
    bins_per_day: u32,
    site: Site,
) -> Result<DielGrid> {
    if bins_per_day == 0 || 1440 % bins_per_day != 0 {
        return Err(Error::BadBinsPerDay(bins_per_day));
    }
    let (first, last) = range;
    if last < first {
        return Err(Error::InvalidParameter(format!("empty date range {first}..={last}")));
    }
    let width = 1440 / bins_per_day;
    let dates: Vec<NaiveDate> = first.iter_days().take_while(|d| *d <= last).collect();

    let mut night_mask = Vec::with_capacity(dates.len());
    for &date in &dates {
        let row = (0..bins_per_day)
            .map(|b| {
                let center = (b * width) as f64 + width as f64 / 2.0;
                day_night(date, center, site.lat_deg, site.lon_deg, site.utc_offset_hours)
            })
            .collect::<Result<Vec<bool>>>()?;
        night_mask.push(row);
    }

    let mut counts = vec![vec![0u32; bins_per_day as usize]; dates.len()];
    for &t in events {
        let local = site.to_local(t);
        if local.date() < first || local.date() > last {
            continue;
        }
        let row = (local.date() - first).num_days() as usize;
        let minute = local.hour() * 60 + local.minute();
        counts[row][(minute / width) as usize] += 1;
    }
    Ok(DielGrid { dates, bins_per_day, counts, night_mask, site })
}

/// Long format: `date,bin,start_minute,count,night`, one row per cell.
pub fn write_diel_csv<W: Write>(mut out: W, grid: &DielGrid) -> Result<()> {
    writeln!(out, "date,bin,start_minute,count,night")?;
    let w = grid.bin_minutes();
    for (i, date) in grid.dates.iter().enumerate() {
        for b in 0..grid.bins_per_day as usize {
            let night = u8::from(grid.night_mask[i][b]);
            writeln!(out, "{date},{b},{},{},{night}", b as u32 * w, grid.counts[i][b])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use proptest::prelude::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    const UTC_SITE: Site = Site { lat_deg: 42.4, lon_deg: -70.3, utc_offset_hours: 0.0 };

    #[test]
    fn single_event_lands_in_bin_81() {
        let t = Utc.with_ymd_and_hms(2009, 4, 1, 13, 37, 0).unwrap();
        let g = diel_grid(&[t], (d(2009, 4, 1), d(2009, 4, 1)), 144, UTC_SITE).unwrap();
        assert_eq!(g.counts[0][81], 1);
        assert_eq!(g.total(), 1);
    }

    #[test]
    fn offset_moves_event_to_previous_day() {
        let t = Utc.with_ymd_and_hms(2009, 4, 2, 2, 0, 0).unwrap();
        let g = diel_grid(&[t], (d(2009, 4, 1), d(2009, 4, 2)), 24, Site::default()).unwrap();
        assert_eq!(g.counts[0][21], 1);
    }

    #[test]
    fn empty_and_bad_bins() {
        let g = diel_grid(&[], (d(2009, 1, 1), d(2009, 1, 3)), 144, Site::default()).unwrap();
        assert_eq!(g.dates.len(), 3);
        assert_eq!(g.total(), 0);
        assert!(g.night_mask[0][0] && !g.night_mask[0][72]);
        assert!(matches!(diel_grid(&[], (d(2009, 1, 1), d(2009, 1, 1)), 7, Site::default()), Err(Error::BadBinsPerDay(7))));
        assert!(matches!(diel_grid(&[], (d(2009, 1, 1), d(2009, 1, 1)), 0, Site::default()), Err(Error::BadBinsPerDay(0))));
    }

    #[test]
    fn csv_rows_per_cell() {
        let g = diel_grid(&[], (d(2009, 1, 1), d(2009, 1, 2)), 24, Site::default()).unwrap();
        let mut buf = Vec::new();
        write_diel_csv(&mut buf, &g).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 48);
        assert_eq!(text.lines().nth(1).unwrap(), "2009-01-01,0,0,0,1");
    }

    proptest! {
        #[test]
        fn conserves_in_range_events(secs in proptest::collection::vec(0i64..40 * 86400, 0..200)) {
            let base = Utc.with_ymd_and_hms(2009, 3, 1, 0, 0, 0).unwrap();
            let events: Vec<_> = secs.iter().map(|s| base + Duration::seconds(*s)).collect();
            let site = Site::default();
            let range = (d(2009, 3, 5), d(2009, 3, 30));
            let g = diel_grid(&events, range, 144, site).unwrap();
            let expect = events.iter().filter(|t| {
                let day = site.to_local(**t).date();
                day >= range.0 && day <= range.1
            }).count() as u64;
            prop_assert_eq!(g.total(), expect);
        }
    }
}
