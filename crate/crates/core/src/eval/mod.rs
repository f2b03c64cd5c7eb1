//! ROC analysis against human truth, confusion counts at a score threshold,
//! and date-by-time-of-day activity grids with night shading.

mod diel;
mod roc;
mod solar;
mod svg;

pub use diel::{diel_grid, write_diel_csv, DielGrid, Site, DEFAULT_BINS_PER_DAY};
pub use roc::{confusion_at, roc_curve, write_roc_csv, Confusion, RocCurve, RocPoint};
pub use solar::{day_night, solar_elevation_deg, sun_crossings, MAX_ABS_LATITUDE};
pub use svg::{render_diel_svg, render_roc_svg};

use crate::features::{slot, FeatureVector};

/// A score of 3 or more counts as a true detection.
pub const TRUTH_MIN_SCORE: u8 = 3;

pub fn is_true_detection(score: u8) -> bool {
    score >= TRUTH_MIN_SCORE
}

/// Naive single-feature ranking: SNR against the 5th percentile (F15).
pub fn baseline_score(fv: &FeatureVector) -> f64 {
    fv.values[slot::SNR_P5]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_projects_f15() {
        let mut fv = FeatureVector::new("e", [0.0; 18]);
        fv.values[14] = 12.0;
        assert_eq!(baseline_score(&fv), 12.0);
        fv.values[3] = 99.0;
        fv.values[15] = -4.0;
        assert_eq!(baseline_score(&fv), 12.0);
    }
}
