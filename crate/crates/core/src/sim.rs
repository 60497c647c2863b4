//! Synthetic reading-gaze generator with ground-truth line labels.
//!
//! A page holds `n_lines` lines spaced one line-width apart, so the text block
//! spans `y` in `[0, n_lines]` and line `j` is centered at `j - 0.5`. The
//! reader visits the lines top to bottom, optionally re-reading each line a
//! random number of times. Each visit lasts `t_line` seconds. Every visit but
//! the first opens with a `t_return` second sweep from the right margin back
//! to the left, already on the new line. Gaussian noise of standard deviation
//! `sigma` line-widths is added to both coordinates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::discretizer::{discretize_page, Fixation, SurveillanceRegion};
use crate::error::{Error, Result};
use crate::hmm::ObservationSequence;

/// How many consecutive times each line is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repetition {
    None,
    /// Uniform on `min..=max`.
    Random { min: usize, max: usize },
}

impl Repetition {
    /// Re-reading scenario: one to five visits per line.
    pub const ONE_TO_FIVE: Repetition = Repetition::Random { min: 1, max: 5 };

    fn mean(&self) -> f64 {
        match *self {
            Repetition::None => 1.0,
            Repetition::Random { min, max } => (min + max) as f64 / 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Seconds spent on one visit to a line.
    pub t_line: f64,
    /// Seconds of the right-to-left return sweep, taken out of each visit
    /// after the first.
    pub t_return: f64,
    pub sample_hz: f64,
    pub n_pages: usize,
    pub n_lines: usize,
    /// Noise standard deviation in line-widths, applied to `x` and `y`.
    pub sigma: f64,
    pub repetition: Repetition,
    pub seed: u64,
    /// AR(1) coefficient of the noise; zero gives white noise.
    pub noise_corr: f64,
    /// Horizontal extent of the text block in line-widths.
    pub page_width: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            t_line: 1.0,
            t_return: 0.1,
            sample_hz: 60.0,
            n_pages: 50,
            n_lines: 25,
            sigma: 0.2,
            repetition: Repetition::None,
            seed: 0,
            noise_corr: 0.0,
            page_width: 25.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::usage(format!("simulation config: {msg}")));
        if !(self.t_line > 0.0 && self.t_line.is_finite()) {
            return bad("t_line must be positive");
        }
        if !(self.sample_hz > 0.0 && self.sample_hz.is_finite()) {
            return bad("sample_hz must be positive");
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return bad("sigma must be non-negative");
        }
        if !(0.0..1.0).contains(&self.noise_corr) {
            return bad("noise_corr must be in [0, 1)");
        }
        if self.n_lines == 0 || self.n_pages == 0 {
            return bad("n_lines and n_pages must be positive");
        }
        if !(self.page_width > 0.0 && self.page_width.is_finite()) {
            return bad("page_width must be positive");
        }
        if self.samples_per_line() == 0 {
            return bad("t_line * sample_hz rounds to zero samples");
        }
        if !(self.t_return >= 0.0) || self.return_samples() >= self.samples_per_line() {
            return bad("t_return must be non-negative and shorter than t_line");
        }
        if let Repetition::Random { min, max } = self.repetition {
            if min == 0 || min > max {
                return bad("random repetition needs 1 <= min <= max");
            }
        }
        Ok(())
    }

    /// Samples emitted per visit to a line (`T_l * f_s`).
    pub fn samples_per_line(&self) -> usize {
        (self.t_line * self.sample_hz).round() as usize
    }

    /// Leading samples of each non-first visit spent on the return sweep.
    pub fn return_samples(&self) -> usize {
        (self.t_return * self.sample_hz).round() as usize
    }

    pub fn region(&self) -> SurveillanceRegion {
        SurveillanceRegion {
            y_top: 0.0,
            y_bottom: self.n_lines as f64,
            x_left: 0.0,
            x_right: self.page_width,
            n_lines: self.n_lines,
        }
    }
}

/// Expected samples per page: `T_l * f_s * N_l`, times the mean number of
/// visits per line under random repetition.
pub fn samples_per_page(config: &SimConfig) -> usize {
    let base = config.samples_per_line() * config.n_lines;
    (base as f64 * config.repetition.mean()).round() as usize
}

/// One page of fixations with the true line of every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPage {
    pub fixations: Vec<Fixation>,
    pub labels: Vec<usize>,
    pub region: SurveillanceRegion,
}

impl LabeledPage {
    pub fn len(&self) -> usize {
        self.fixations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fixations.is_empty()
    }

    /// Discretized observations `o(t)` of this page in its own region.
    pub fn observations(&self) -> Result<ObservationSequence> {
        discretize_page(&self.fixations, &self.region)
    }
}

/// AR(1) noise source with stationary standard deviation `std`.
struct Ar1 {
    std: f64,
    corr: f64,
    innovation: f64,
    state: Option<f64>,
}

impl Ar1 {
    fn new(std: f64, corr: f64) -> Self {
        Ar1 {
            std,
            corr,
            innovation: (1.0 - corr * corr).sqrt(),
            state: None,
        }
    }

    fn next(&mut self, rng: &mut impl Rng) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        let v = match self.state {
            None => self.std * z,
            Some(prev) => self.corr * prev + self.innovation * self.std * z,
        };
        self.state = Some(v);
        v
    }
}

/// Generates page `page_index`, seeded with `config.seed + page_index`.
pub fn simulate_page(config: &SimConfig, page_index: usize) -> Result<LabeledPage> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(page_index as u64));
    let region = config.region();

    let mut visits = Vec::with_capacity(config.n_lines);
    for line in 1..=config.n_lines {
        let reps = match config.repetition {
            Repetition::None => 1,
            Repetition::Random { min, max } => rng.gen_range(min..=max),
        };
        visits.extend(std::iter::repeat_n(line, reps));
    }

    let per_line = config.samples_per_line();
    let n_return = config.return_samples();
    let noise_std = config.sigma * region.line_spacing();
    let mut noise_x = Ar1::new(noise_std, config.noise_corr);
    let mut noise_y = Ar1::new(noise_std, config.noise_corr);
    let width = region.x_right - region.x_left;

    let mut fixations = Vec::with_capacity(visits.len() * per_line);
    let mut labels = Vec::with_capacity(visits.len() * per_line);
    for (v, &line) in visits.iter().enumerate() {
        let sweep = if v == 0 { 0 } else { n_return };
        let reading = per_line - sweep;
        let y = region.line_center(line);
        for k in 0..per_line {
            let x = if k < sweep {
                region.x_right - width * (k + 1) as f64 / sweep as f64
            } else {
                region.x_left + width * ((k - sweep) as f64 + 0.5) / reading as f64
            };
            let t = fixations.len() as f64 / config.sample_hz;
            let dx = noise_x.next(&mut rng);
            let dy = noise_y.next(&mut rng);
            fixations.push(Fixation::new(t, x + dx, y + dy));
            labels.push(line);
        }
    }
    Ok(LabeledPage {
        fixations,
        labels,
        region,
    })
}

/// Generates `config.n_pages` independent pages.
pub fn simulate_corpus(config: &SimConfig) -> Result<Vec<LabeledPage>> {
    (0..config.n_pages).map(|p| simulate_page(config, p)).collect()
}

/// Replaces a `fraction` of the page's fixations, chosen at random, with
/// points drawn uniformly over a screen `screen_scale` times the size of the
/// text region and centered on it. Labels and timestamps are kept.
pub fn inject_outliers(page: &LabeledPage, fraction: f64, screen_scale: f64, seed: u64) -> Result<LabeledPage> {
    if !(0.0..=1.0).contains(&fraction) || !(screen_scale >= 1.0) {
        return Err(Error::usage("outlier fraction must be in [0, 1] and screen_scale >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = &page.region;
    let (w, h) = (r.x_right - r.x_left, r.y_bottom - r.y_top);
    let pad = (screen_scale - 1.0) / 2.0;
    let (x0, y0) = (r.x_left - pad * w, r.y_top - pad * h);
    let count = (fraction * page.len() as f64).round() as usize;
    let mut out = page.clone();
    for idx in rand::seq::index::sample(&mut rng, page.len(), count) {
        let f = &mut out.fixations[idx];
        f.x = x0 + rng.gen::<f64>() * screen_scale * w;
        f.y = y0 + rng.gen::<f64>() * screen_scale * h;
    }
    Ok(out)
}

/// Splits a corpus into its first `n_train` pages and the rest.
pub fn split_train_test(pages: &[LabeledPage], n_train: usize) -> Result<(&[LabeledPage], &[LabeledPage])> {
    if n_train == 0 || n_train >= pages.len() {
        return Err(Error::usage(format!(
            "cannot take {n_train} training pages from a corpus of {}",
            pages.len()
        )));
    }
    Ok(pages.split_at(n_train))
}
