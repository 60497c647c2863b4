//! Maps raw gaze fixations to line-number observations.
//!
//! The text block is assumed to be evenly divided into `n_lines` horizontal
//! bands; a fixation's observation is the band whose center is nearest to its
//! `y` coordinate. Screen `y` grows downward, so line 1 is at the top.

use crate::error::{Error, Result};
use crate::hmm::ObservationSequence;

/// One gaze sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixation {
    /// Timestamp in seconds (or a sample index).
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl Fixation {
    pub fn new(t: f64, x: f64, y: f64) -> Self {
        Fixation { t, x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.x.is_finite() && self.y.is_finite()
    }
}

/// The on-screen rectangle holding the text block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurveillanceRegion {
    pub y_top: f64,
    pub y_bottom: f64,
    pub x_left: f64,
    pub x_right: f64,
    pub n_lines: usize,
}

impl SurveillanceRegion {
    pub fn new(y_top: f64, y_bottom: f64, x_left: f64, x_right: f64, n_lines: usize) -> Result<Self> {
        let region = SurveillanceRegion {
            y_top,
            y_bottom,
            x_left,
            x_right,
            n_lines,
        };
        region.check()?;
        Ok(region)
    }

    pub fn check(&self) -> Result<()> {
        let finite = [self.y_top, self.y_bottom, self.x_left, self.x_right]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::usage("region bounds must be finite"));
        }
        if !(self.y_bottom > self.y_top) {
            return Err(Error::usage(format!(
                "region y_bottom ({}) must exceed y_top ({})",
                self.y_bottom, self.y_top
            )));
        }
        if self.n_lines == 0 {
            return Err(Error::usage("region needs at least one line"));
        }
        Ok(())
    }

    /// Vertical extent `L_y`.
    pub fn height(&self) -> f64 {
        self.y_bottom - self.y_top
    }

    /// Distance between adjacent line centers.
    pub fn line_spacing(&self) -> f64 {
        self.height() / self.n_lines as f64
    }

    /// Center of line `j` (1-based).
    pub fn line_center(&self, line: usize) -> f64 {
        self.y_top + (line as f64 - 0.5) * self.line_spacing()
    }

    pub fn line_centers(&self) -> Vec<f64> {
        (1..=self.n_lines).map(|j| self.line_center(j)).collect()
    }
}

/// Line whose center is nearest to the fixation's `y`.
///
/// Points exactly half-way between two centers go to the upper (lower index)
/// line; points beyond the outermost centers clamp to line 1 or `n_lines`.
pub fn discretize(fix: &Fixation, region: &SurveillanceRegion) -> usize {
    discretize_y(fix.y, region)
}

pub(crate) fn discretize_y(y: f64, region: &SurveillanceRegion) -> usize {
    let n = region.n_lines;
    let guess = ((y - region.y_top) / region.line_spacing()).ceil();
    let mut best = if guess.is_nan() {
        1
    } else {
        guess.clamp(1.0, n as f64) as usize
    };
    // The arithmetic guess can be off by one near a boundary; settle it by
    // comparing distances to the neighboring centers directly.
    let dist = |j: usize| (y - region.line_center(j)).abs();
    while best > 1 && dist(best - 1) <= dist(best) {
        best -= 1;
    }
    while best < n && dist(best + 1) < dist(best) {
        best += 1;
    }
    best
}

pub fn discretize_page(fixes: &[Fixation], region: &SurveillanceRegion) -> Result<ObservationSequence> {
    if fixes.is_empty() {
        return Err(Error::usage("cannot discretize an empty page"));
    }
    ObservationSequence::new(fixes.iter().map(|f| discretize(f, region)).collect())
}

/// Parameters for estimating the text region from fixations alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionEstimate {
    /// Points farther than this many standard deviations from the mean are
    /// discarded before the extremes are taken.
    pub k_sigma: f64,
    /// How many extreme points are averaged for each bound.
    pub batch: usize,
}

impl Default for RegionEstimate {
    fn default() -> Self {
        RegionEstimate {
            k_sigma: 1.9,
            batch: 10,
        }
    }
}

/// Estimates the text region from the fixations of one page.
///
/// Each axis is cleaned independently in a single pass, then each bound is
/// the mean of the `batch` most extreme surviving values.
pub fn estimate_region(
    fixes: &[Fixation],
    n_lines: usize,
    settings: &RegionEstimate,
) -> Result<SurveillanceRegion> {
    if n_lines == 0 {
        return Err(Error::usage("n_lines must be at least 1"));
    }
    if settings.batch == 0 || !(settings.k_sigma >= 0.0) {
        return Err(Error::usage("batch must be positive and k_sigma non-negative"));
    }
    let ys: Vec<f64> = fixes.iter().map(|f| f.y).collect();
    let xs: Vec<f64> = fixes.iter().map(|f| f.x).collect();
    let (y_top, y_bottom) = extreme_means(&ys, settings, "y")?;
    let (x_left, x_right) = extreme_means(&xs, settings, "x")?;
    if !(y_bottom > y_top) {
        return Err(Error::InsufficientData(
            "fixations span zero height after cleaning".into(),
        ));
    }
    Ok(SurveillanceRegion {
        y_top,
        y_bottom,
        x_left,
        x_right,
        n_lines,
    })
}

/// Values within `k_sigma` population standard deviations of their mean.
pub fn clean_outliers(values: &[f64], k_sigma: f64) -> Vec<f64> {
    if values.is_empty() {
        return Vec::new();
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    let limit = k_sigma * std;
    values
        .iter()
        .copied()
        .filter(|v| (v - mean).abs() <= limit)
        .collect()
}

fn extreme_means(values: &[f64], settings: &RegionEstimate, axis: &str) -> Result<(f64, f64)> {
    let mut kept = clean_outliers(values, settings.k_sigma);
    if kept.len() < 2 * settings.batch {
        return Err(Error::InsufficientData(format!(
            "{} {axis} values survive cleaning, need at least {}",
            kept.len(),
            2 * settings.batch
        )));
    }
    kept.sort_by(f64::total_cmp);
    let b = settings.batch as f64;
    let low = kept[..settings.batch].iter().sum::<f64>() / b;
    let high = kept[kept.len() - settings.batch..].iter().sum::<f64>() / b;
    Ok((low, high))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn region(y_top: f64, y_bottom: f64, n: usize) -> SurveillanceRegion {
        SurveillanceRegion::new(y_top, y_bottom, 0.0, 1.0, n).unwrap()
    }

    fn at_y(y: f64) -> Fixation {
        Fixation::new(0.0, 0.5, y)
    }

    #[test]
    fn centers_even_division() {
        let c = region(0.0, 10.0, 10).line_centers();
        let expected: Vec<f64> = (0..10).map(|j| j as f64 + 0.5).collect();
        assert_eq!(c, expected);
        assert_eq!(region(0.0, 1.0, 1).line_centers(), vec![0.5]);
        assert_eq!(
            region(100.0, 200.0, 4).line_centers(),
            vec![112.5, 137.5, 162.5, 187.5]
        );
    }

    #[test]
    fn nearest_center() {
        assert_eq!(discretize(&at_y(3.2), &region(0.0, 10.0, 10)), 4);
    }

    #[test]
    fn boundary_goes_to_lower_index() {
        let r = region(0.0, 10.0, 10);
        assert_eq!(discretize(&at_y(1.0), &r), 1);
        assert_eq!(discretize(&at_y(5.0), &r), 5);
    }

    #[test]
    fn out_of_region_clamps() {
        let r = region(0.0, 10.0, 10);
        assert_eq!(discretize(&at_y(-40.0), &r), 1);
        assert_eq!(discretize(&at_y(1e9), &r), 10);
    }

    #[test]
    fn invalid_regions_rejected() {
        assert!(SurveillanceRegion::new(1.0, 1.0, 0.0, 1.0, 3).is_err());
        assert!(SurveillanceRegion::new(0.0, 1.0, 0.0, 1.0, 0).is_err());
        assert!(SurveillanceRegion::new(f64::NAN, 1.0, 0.0, 1.0, 2).is_err());
    }

    #[test]
    fn page_preserves_order_and_length() {
        let r = region(0.0, 3.0, 3);
        let page = [at_y(2.9), at_y(0.1), at_y(1.4)];
        let obs = discretize_page(&page, &r).unwrap();
        assert_eq!(obs.symbols(), &[3, 1, 2]);
        assert_eq!(discretize_page(&page[..1], &r).unwrap().len(), 1);
        assert!(matches!(discretize_page(&[], &r), Err(Error::Usage(_))));
    }

    #[test]
    fn region_from_exact_line_centers() {
        let fixes: Vec<Fixation> = (0..10).map(|j| at_y(j as f64 + 0.5)).collect();
        let settings = RegionEstimate {
            k_sigma: 1.9,
            batch: 1,
        };
        let r = estimate_region(&fixes, 10, &settings).unwrap();
        assert_eq!(r.y_top, 0.5);
        assert_eq!(r.y_bottom, 9.5);
        assert_eq!(r.n_lines, 10);
    }

    #[test]
    fn identical_points_are_insufficient() {
        let fixes = vec![at_y(3.0); 100];
        assert!(matches!(
            estimate_region(&fixes, 5, &RegionEstimate::default()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn too_few_survivors() {
        let fixes: Vec<Fixation> = (0..15).map(|j| at_y(j as f64)).collect();
        assert!(matches!(
            estimate_region(&fixes, 5, &RegionEstimate::default()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn cleaning_drops_far_outlier() {
        let mut values: Vec<f64> = (0..50).map(|v| v as f64 / 10.0).collect();
        values.push(1000.0);
        let kept = clean_outliers(&values, 1.9);
        assert_eq!(kept.len(), 50);
    }
}
