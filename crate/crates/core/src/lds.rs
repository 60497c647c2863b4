//! Line detection: HMM initialization, unsupervised training, decoding and
//! error metrics.

use std::fmt;

use crate::discretizer::{discretize_page, SurveillanceRegion};
use crate::error::{Error, Result};
use crate::hmm::{self, EmSettings, HmmParams, Matrix, ObservationSequence, StatePath, TrainingTrace};
use crate::sim::LabeledPage;

/// Off-diagonal prior and emission mass of the default initial guess.
pub const DEFAULT_EMISSION_OFF_DIAGONAL: f64 = 0.01;

// Initial transition guess: stay on the line, move to one neighbor (interior
// lines have two).
const STAY: f64 = 0.9;
const EDGE_MOVE: f64 = 0.1;
const INTERIOR_MOVE: f64 = 0.05;

/// Decoding window used by [`detect_lines_windowed`] when none is given:
/// twenty seconds of 60 Hz samples.
pub const DEFAULT_WINDOW: usize = 1200;

/// Initial guess with the default off-diagonal mass of 0.01.
pub fn default_initial_params(n_lines: usize) -> Result<HmmParams> {
    initial_params(n_lines, DEFAULT_EMISSION_OFF_DIAGONAL)
}

/// Initial guess for training an `n_lines` model.
///
/// * prior: `off` on every line but the first, which takes the rest;
/// * transition: tridiagonal, 0.9 to stay, 0.05 to each neighbor (0.1 to the
///   single neighbor of the first and last line);
/// * emission: `off` everywhere except the diagonal, which takes the rest.
///
/// If `off * (n_lines - 1)` would exceed one half, `off` shrinks so the
/// diagonal keeps half the mass.
pub fn initial_params(n_lines: usize, off: f64) -> Result<HmmParams> {
    if n_lines < 2 {
        return Err(Error::usage(format!(
            "a line model needs at least 2 lines, got {n_lines}"
        )));
    }
    if !(off > 0.0 && off < 1.0) {
        return Err(Error::usage("off-diagonal mass must be in (0, 1)"));
    }
    let n = n_lines;
    let off = off.min(0.5 / (n - 1) as f64);
    let diag = 1.0 - off * (n - 1) as f64;

    let mut prior = vec![off; n];
    prior[0] = diag;

    let transition = Matrix::from_fn(n, n, |i, j| {
        let at_edge = i == 0 || i == n - 1;
        match i.abs_diff(j) {
            0 => STAY,
            1 if at_edge => EDGE_MOVE,
            1 => INTERIOR_MOVE,
            _ => 0.0,
        }
    });
    let emission = Matrix::from_fn(n, n, |i, j| if i == j { diag } else { off });
    HmmParams::new(prior, transition, emission)
}

/// A trained line detector for a given text region.
#[derive(Debug, Clone, PartialEq)]
pub struct LdsModel {
    pub params: HmmParams,
    pub region: SurveillanceRegion,
}

impl LdsModel {
    pub fn new(params: HmmParams, region: SurveillanceRegion) -> Result<Self> {
        params.validate()?;
        region.check()?;
        if params.n_states() != region.n_lines {
            return Err(Error::usage(format!(
                "model has {} states but region has {} lines",
                params.n_states(),
                region.n_lines
            )));
        }
        Ok(LdsModel { params, region })
    }

    pub fn n_lines(&self) -> usize {
        self.region.n_lines
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSettings {
    pub em: EmSettings,
    pub emission_off_diagonal: f64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            em: EmSettings::default(),
            emission_off_diagonal: DEFAULT_EMISSION_OFF_DIAGONAL,
        }
    }
}

/// Trains a model on already discretized sequences.
pub fn train(
    sequences: &[ObservationSequence],
    region: SurveillanceRegion,
    settings: &TrainSettings,
) -> Result<(LdsModel, TrainingTrace)> {
    if sequences.is_empty() {
        return Err(Error::usage("training corpus is empty"));
    }
    let init = initial_params(region.n_lines, settings.emission_off_diagonal)?;
    let (params, trace) = hmm::baum_welch(&init, sequences, &settings.em)?;
    Ok((LdsModel::new(params, region)?, trace))
}

/// Trains on labeled pages. Labels are ignored; each page is discretized in
/// its own region and the model takes the first page's region.
pub fn train_on_pages(pages: &[LabeledPage], settings: &TrainSettings) -> Result<(LdsModel, TrainingTrace)> {
    let first = pages
        .first()
        .ok_or_else(|| Error::usage("training corpus is empty"))?;
    if let Some(p) = pages.iter().find(|p| p.region.n_lines != first.region.n_lines) {
        return Err(Error::usage(format!(
            "pages disagree on line count ({} vs {})",
            p.region.n_lines, first.region.n_lines
        )));
    }
    let sequences = pages
        .iter()
        .map(LabeledPage::observations)
        .collect::<Result<Vec<_>>>()?;
    train(&sequences, first.region, settings)
}

/// Most probable line at every sample of `obs`.
pub fn detect_lines(model: &LdsModel, obs: &ObservationSequence) -> Result<StatePath> {
    hmm::viterbi(&model.params, obs)
}

/// Decodes raw fixations in `region`, which must have the model's line count.
pub fn detect_fixations(
    model: &LdsModel,
    fixes: &[crate::discretizer::Fixation],
    region: &SurveillanceRegion,
) -> Result<StatePath> {
    let obs = discretize_page(fixes, region)?;
    // A region with more lines than the model yields out-of-range symbols.
    model.params.check_symbols(&obs)?;
    if region.n_lines != model.n_lines() {
        return Err(Error::usage(format!(
            "region has {} lines but the model has {}",
            region.n_lines,
            model.n_lines()
        )));
    }
    detect_lines(model, &obs)
}

/// Decodes `obs` in consecutive windows of `window` samples.
///
/// Each window after the first starts from the transition row of the
/// previous window's last decoded line instead of the model prior. The
/// returned log-probability is the sum over windows.
pub fn detect_lines_windowed(model: &LdsModel, obs: &ObservationSequence, window: usize) -> Result<StatePath> {
    if window == 0 {
        return Err(Error::usage("decoding window must be positive"));
    }
    model.params.check_symbols(obs)?;
    let mut params = model.params.clone();
    let mut states = Vec::with_capacity(obs.len());
    let mut log_prob = 0.0;
    for chunk in obs.symbols().chunks(window) {
        let path = hmm::viterbi(&params, &ObservationSequence::new(chunk.to_vec())?)?;
        let last = *path.states.last().expect("chunks are non-empty");
        params.prior = model.params.transition.row(last - 1).to_vec();
        log_prob += path.log_prob;
        states.extend(path.states);
    }
    Ok(StatePath { states, log_prob })
}

/// Percentage of samples whose predicted line differs from the truth.
pub fn page_error(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::usage(format!(
            "prediction has {} samples but truth has {}",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::usage("cannot score an empty page"));
    }
    let wrong = predicted.iter().zip(truth).filter(|(p, t)| p != t).count();
    Ok(100.0 * wrong as f64 / truth.len() as f64)
}

pub fn average_error(per_page: &[f64]) -> Result<f64> {
    if per_page.is_empty() {
        return Err(Error::usage("no pages to average"));
    }
    Ok(per_page.iter().sum::<f64>() / per_page.len() as f64)
}

/// Where a line prediction came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// The discretized observation itself.
    DiscretizerOnly,
    Hmm,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::DiscretizerOnly => "discretizer-only",
            Method::Hmm => "hmm",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub per_page_error: Vec<f64>,
    pub average_error: f64,
    pub method: Method,
    /// Samples scored on each page.
    pub samples: Vec<usize>,
}

impl EvalReport {
    pub fn new(method: Method, per_page_error: Vec<f64>, samples: Vec<usize>) -> Result<Self> {
        let average_error = average_error(&per_page_error)?;
        Ok(EvalReport {
            per_page_error,
            average_error,
            method,
            samples,
        })
    }
}
