//! Bins a month of event times that favour the night into a date x time-of-day
//! grid and prints sunrise and sunset for the site.
//!
//! cargo run --release --example diel_grid [out_dir]

use std::path::PathBuf;

use chrono::{Duration, NaiveDate, TimeZone, Utc};
use pulsescore::eval::{diel_grid, render_diel_svg, sun_crossings, write_diel_csv, Site, DEFAULT_BINS_PER_DAY};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn hhmm(m: Option<f64>) -> String {
    m.map_or("--:--".into(), |m| format!("{:02}:{:02}", (m / 60.0) as u32, (m % 60.0) as u32))
}

fn main() -> pulsescore::Result<()> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "target/diel-demo".into()).into();
    std::fs::create_dir_all(&out)?;
    let site = Site::default();
    let first = NaiveDate::from_ymd_opt(2009, 4, 1).unwrap();
    let last = NaiveDate::from_ymd_opt(2009, 4, 30).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let events: Vec<_> = (0..600)
        .map(|_| {
            let day = rng.random_range(0..30);
            // local hour 20..30 wraps past midnight; the rest is uniform
            let hour = if rng.random_bool(0.7) { rng.random_range(20.0..30.0) } else { rng.random_range(0.0..24.0) };
            let local = Utc.from_utc_datetime(&first.and_hms_opt(0, 0, 0).unwrap())
                + Duration::days(day)
                + Duration::seconds((hour * 3600.0) as i64);
            local - Duration::minutes((site.utc_offset_hours * 60.0) as i64)
        })
        .collect();

    let grid = diel_grid(&events, (first, last), DEFAULT_BINS_PER_DAY, site)?;
    let night: u64 = grid
        .counts
        .iter()
        .zip(&grid.night_mask)
        .flat_map(|(c, n)| c.iter().zip(n))
        .filter(|(_, &n)| n)
        .map(|(&c, _)| c as u64)
        .sum();
    println!("{} events binned, {night} at night", grid.total());
    for d in [first, last] {
        let (rise, set) = sun_crossings(d, site.lat_deg, site.lon_deg, site.utc_offset_hours)?;
        println!("{d}: sunrise {} sunset {} local", hhmm(rise), hhmm(set));
    }
    write_diel_csv(std::fs::File::create(out.join("diel.csv"))?, &grid)?;
    std::fs::write(out.join("diel.svg"), render_diel_svg(&grid))?;
    println!("wrote {}", out.display());
    Ok(())
}
