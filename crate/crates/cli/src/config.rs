//! TOML configuration file. Every key is optional; missing keys take the
//! library defaults and command-line flags override the file.

use std::path::Path;

use anyhow::{Context, Result};
use gaze_lds::discretizer::RegionEstimate;
use gaze_lds::eval::{ExperimentSpec, Scenario, STANDARD_NOISE_LEVELS};
use gaze_lds::hmm::EmSettings;
use gaze_lds::io::{Coordinates, CsvOptions, NonFinite};
use gaze_lds::lds::{TrainSettings, DEFAULT_EMISSION_OFF_DIAGONAL};
use gaze_lds::sim::{Repetition, SimConfig};
use gaze_lds::SurveillanceRegion;
use serde::Deserialize;

use crate::UsageError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub seed: u64,
    pub sim: SimSection,
    pub em: EmSection,
    pub experiment: ExperimentSection,
    pub region: RegionSection,
    pub io: IoSection,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            sim: SimSection::default(),
            em: EmSection::default(),
            experiment: ExperimentSection::default(),
            region: RegionSection::default(),
            io: IoSection::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RepetitionMode {
    None,
    Random,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub t_line: f64,
    pub t_return: f64,
    pub sample_hz: f64,
    pub n_pages: usize,
    pub n_lines: usize,
    pub sigma: f64,
    pub repetition: RepetitionMode,
    pub repeat_min: usize,
    pub repeat_max: usize,
    pub noise_corr: f64,
    pub page_width: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        let d = SimConfig::default();
        SimSection {
            t_line: d.t_line,
            t_return: d.t_return,
            sample_hz: d.sample_hz,
            n_pages: d.n_pages,
            n_lines: d.n_lines,
            sigma: d.sigma,
            repetition: RepetitionMode::None,
            repeat_min: 1,
            repeat_max: 5,
            noise_corr: d.noise_corr,
            page_width: d.page_width,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmSection {
    pub max_iters: usize,
    pub tol: f64,
    pub emission_off_diagonal: f64,
}

impl Default for EmSection {
    fn default() -> Self {
        let d = EmSettings::default();
        EmSection {
            max_iters: d.max_iters,
            tol: d.tol,
            emission_off_diagonal: DEFAULT_EMISSION_OFF_DIAGONAL,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub train_pages: usize,
    pub test_pages: usize,
    pub noise_levels: Vec<f64>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            train_pages: 40,
            test_pages: 10,
            noise_levels: STANDARD_NOISE_LEVELS.to_vec(),
        }
    }
}

/// Fixed text-region bounds (all four or none) and estimation settings.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegionSection {
    pub y_top: Option<f64>,
    pub y_bottom: Option<f64>,
    pub x_left: Option<f64>,
    pub x_right: Option<f64>,
    pub k_sigma: Option<f64>,
    pub batch: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateMode {
    #[default]
    Normalized,
    Pixels,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonFiniteMode {
    #[default]
    Error,
    Drop,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IoSection {
    pub coordinates: CoordinateMode,
    pub screen_width: Option<f64>,
    pub screen_height: Option<f64>,
    pub non_finite: NonFiniteMode,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).map_err(|e| UsageError(format!("config {}: {e}", path.display())).into())
    }

    pub fn sim_config(&self) -> SimConfig {
        let s = &self.sim;
        SimConfig {
            t_line: s.t_line,
            t_return: s.t_return,
            sample_hz: s.sample_hz,
            n_pages: s.n_pages,
            n_lines: s.n_lines,
            sigma: s.sigma,
            repetition: match s.repetition {
                RepetitionMode::None => Repetition::None,
                RepetitionMode::Random => Repetition::Random {
                    min: s.repeat_min,
                    max: s.repeat_max,
                },
            },
            seed: self.seed,
            noise_corr: s.noise_corr,
            page_width: s.page_width,
        }
    }

    pub fn train_settings(&self) -> TrainSettings {
        TrainSettings {
            em: EmSettings {
                max_iters: self.em.max_iters,
                tol: self.em.tol,
            },
            emission_off_diagonal: self.em.emission_off_diagonal,
        }
    }

    pub fn experiment(&self, scenario: Scenario) -> ExperimentSpec {
        ExperimentSpec {
            noise_levels: self.experiment.noise_levels.clone(),
            sim: self.sim_config(),
            train_pages: self.experiment.train_pages,
            test_pages: self.experiment.test_pages,
            train: self.train_settings(),
            ..ExperimentSpec::standard(scenario, self.seed)
        }
    }

    pub fn region_estimate(&self) -> RegionEstimate {
        let d = RegionEstimate::default();
        RegionEstimate {
            k_sigma: self.region.k_sigma.unwrap_or(d.k_sigma),
            batch: self.region.batch.unwrap_or(d.batch),
        }
    }

    /// The configured fixed region, if its bounds are given.
    pub fn fixed_region(&self, n_lines: usize) -> Result<Option<SurveillanceRegion>> {
        let r = &self.region;
        match (r.y_top, r.y_bottom, r.x_left, r.x_right) {
            (None, None, None, None) => Ok(None),
            (Some(t), Some(b), Some(l), Some(rt)) => Ok(Some(SurveillanceRegion::new(t, b, l, rt, n_lines)?)),
            _ => Err(UsageError("[region] needs all of y_top, y_bottom, x_left, x_right or none".into()).into()),
        }
    }

    pub fn csv_options(&self) -> Result<CsvOptions> {
        let coordinates = match self.io.coordinates {
            CoordinateMode::Normalized => Coordinates::Normalized,
            CoordinateMode::Pixels => match (self.io.screen_width, self.io.screen_height) {
                (Some(width), Some(height)) if width > 0.0 && height > 0.0 => Coordinates::Pixels { width, height },
                _ => {
                    return Err(UsageError("pixel coordinates need positive [io] screen_width and screen_height".into()).into())
                }
            },
        };
        Ok(CsvOptions {
            non_finite: match self.io.non_finite {
                NonFiniteMode::Error => NonFinite::Error,
                NonFiniteMode::Drop => NonFinite::Drop,
            },
            coordinates,
        })
    }
}
