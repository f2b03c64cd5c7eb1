//! Low-precision solar elevation from the fractional-year series
//! (declination and equation of time), good to a few minutes of rise/set.

use std::f64::consts::PI;

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};

pub const MAX_ABS_LATITUDE: f64 = 66.0;

/// Elevation of the sun's center in degrees, no refraction.
/// `minute_of_day` is local clock time at `utc_offset_hours`.
pub fn solar_elevation_deg(date: NaiveDate, minute_of_day: f64, lat_deg: f64, lon_deg: f64, utc_offset_hours: f64) -> f64 {
    let days_in_year = if date.leap_year() { 366.0 } else { 365.0 };
    let utc_hour = minute_of_day / 60.0 - utc_offset_hours;
    let g = 2.0 * PI / days_in_year * (date.ordinal0() as f64 + (utc_hour - 12.0) / 24.0);

    let eqtime = 229.18
        * (0.000075 + 0.001868 * g.cos() - 0.032077 * g.sin() - 0.014615 * (2.0 * g).cos()
            - 0.040849 * (2.0 * g).sin());
    let decl = 0.006918 - 0.399912 * g.cos() + 0.070257 * g.sin() - 0.006758 * (2.0 * g).cos()
        + 0.000907 * (2.0 * g).sin()
        - 0.002697 * (3.0 * g).cos()
        + 0.00148 * (3.0 * g).sin();

    let true_solar_min = minute_of_day + eqtime + 4.0 * lon_deg - 60.0 * utc_offset_hours;
    let hour_angle = (true_solar_min / 4.0 - 180.0).to_radians();
    let lat = lat_deg.to_radians();
    let cos_zenith = lat.sin() * decl.sin() + lat.cos() * decl.cos() * hour_angle.cos();
    90.0 - cos_zenith.clamp(-1.0, 1.0).acos().to_degrees()
}

fn check_latitude(lat_deg: f64) -> Result<()> {
    if !(lat_deg.abs() < MAX_ABS_LATITUDE) {
        return Err(Error::PolarLatitude(lat_deg));
    }
    Ok(())
}

/// True when the sun is below the horizon.
pub fn day_night(date: NaiveDate, minute_of_day: f64, lat_deg: f64, lon_deg: f64, utc_offset_hours: f64) -> Result<bool> {
    check_latitude(lat_deg)?;
    Ok(solar_elevation_deg(date, minute_of_day, lat_deg, lon_deg, utc_offset_hours) < 0.0)
}

/// Local minutes at which the elevation crosses zero upward and downward.
pub fn sun_crossings(
    date: NaiveDate,
    lat_deg: f64,
    lon_deg: f64,
    utc_offset_hours: f64,
) -> Result<(Option<f64>, Option<f64>)> {
    check_latitude(lat_deg)?;
    let elev = |m: f64| solar_elevation_deg(date, m, lat_deg, lon_deg, utc_offset_hours);
    let (mut rise, mut set) = (None, None);
    for m in 0..1440 {
        let (a, b) = (m as f64, m as f64 + 1.0);
        let (ea, eb) = (elev(a), elev(b));
        if (ea < 0.0) == (eb < 0.0) {
            continue;
        }
        let (mut lo, mut hi) = (a, b);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if (elev(mid) < 0.0) == (ea < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if ea < 0.0 {
            rise.get_or_insert(lo);
        } else {
            set.get_or_insert(lo);
        }
    }
    Ok((rise, set))
}
