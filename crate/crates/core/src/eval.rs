//! Experiment harness: noise sweeps over simulated corpora, HMM versus
//! discretizer-only comparison, and CSV output for tables and plots.

use std::fmt::{self, Write as _};
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::io::write_atomic;
use crate::lds::{self, EvalReport, LdsModel, Method, TrainSettings};
use crate::sim::{self, LabeledPage, Repetition, SimConfig};

/// Noise levels of the standard sweep, in line-widths.
pub const STANDARD_NOISE_LEVELS: [f64; 9] = [1.0, 0.63, 0.46, 0.37, 0.3, 0.26, 0.25, 0.22, 0.2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Every line read exactly once.
    NoRepeat,
    /// Every line read one to five times in a row.
    RandomRepeat,
}

impl Scenario {
    pub const ALL: [Scenario; 2] = [Scenario::NoRepeat, Scenario::RandomRepeat];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::NoRepeat => "no_repeat",
            Scenario::RandomRepeat => "random_repeat",
        }
    }

    fn repetition(&self) -> Repetition {
        match self {
            Scenario::NoRepeat => Repetition::None,
            Scenario::RandomRepeat => Repetition::ONE_TO_FIVE,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub noise_levels: Vec<f64>,
    /// Template for every corpus; `sigma`, `repetition`, `n_pages` and `seed`
    /// are overridden per run.
    pub sim: SimConfig,
    pub train_pages: usize,
    pub test_pages: usize,
    pub seed: u64,
    pub train: TrainSettings,
}

impl ExperimentSpec {
    /// The standard sweep: 40 training and 10 test pages of 25 lines.
    pub fn standard(scenario: Scenario, seed: u64) -> Self {
        ExperimentSpec {
            scenario,
            noise_levels: STANDARD_NOISE_LEVELS.to_vec(),
            sim: SimConfig::default(),
            train_pages: 40,
            test_pages: 10,
            seed,
            train: TrainSettings::default(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.noise_levels.is_empty() {
            return Err(Error::usage("experiment needs at least one noise level"));
        }
        if self.train_pages == 0 || self.test_pages == 0 {
            return Err(Error::usage("experiment needs training and test pages"));
        }
        Ok(())
    }

    /// Simulation settings for one noise level.
    pub fn sim_config(&self, sigma: f64) -> SimConfig {
        SimConfig {
            sigma,
            repetition: self.scenario.repetition(),
            n_pages: self.train_pages + self.test_pages,
            seed: self.seed,
            ..self.sim.clone()
        }
    }
}

/// Outcome at one noise level.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub sigma: f64,
    pub hmm: EvalReport,
    pub baseline: EvalReport,
    pub em_iterations: usize,
    pub converged: bool,
}

/// For each noise level: simulate a corpus, train on the leading pages
/// without labels, and score the held-out pages.
pub fn run_table_experiment(spec: &ExperimentSpec) -> Result<Vec<TableRow>> {
    spec.validate()?;
    spec.noise_levels
        .iter()
        .map(|&sigma| run_noise_level(spec, sigma))
        .collect()
}

pub fn run_noise_level(spec: &ExperimentSpec, sigma: f64) -> Result<TableRow> {
    let corpus = sim::simulate_corpus(&spec.sim_config(sigma))?;
    let (train, test) = sim::split_train_test(&corpus, spec.train_pages)?;
    let (model, trace) = lds::train_on_pages(train, &spec.train)?;
    let (baseline, hmm) = compare_baseline(test, &model)?;
    Ok(TableRow {
        sigma,
        hmm,
        baseline,
        em_iterations: trace.iterations_run,
        converged: trace.converged,
    })
}

/// Scores the discretizer alone (`L(t) = o(t)`) and the HMM decoder on the
/// same labeled pages. Each page is discretized in its own region.
pub fn compare_baseline(pages: &[LabeledPage], model: &LdsModel) -> Result<(EvalReport, EvalReport)> {
    if pages.is_empty() {
        return Err(Error::usage("no pages to evaluate"));
    }
    let mut base = Vec::with_capacity(pages.len());
    let mut hmm = Vec::with_capacity(pages.len());
    let mut samples = Vec::with_capacity(pages.len());
    for page in pages {
        if page.region.n_lines != model.n_lines() {
            return Err(Error::usage(format!(
                "page has {} lines but the model has {}",
                page.region.n_lines,
                model.n_lines()
            )));
        }
        let obs = page.observations()?;
        let path = lds::detect_lines(model, &obs)?;
        base.push(lds::page_error(obs.symbols(), &page.labels)?);
        hmm.push(lds::page_error(&path.states, &page.labels)?);
        samples.push(page.len());
    }
    Ok((
        EvalReport::new(Method::DiscretizerOnly, base, samples.clone())?,
        EvalReport::new(Method::Hmm, hmm, samples)?,
    ))
}

/// Data for an external plotting tool.
#[derive(Debug, Clone, Copy)]
pub enum PlotData<'a> {
    /// Rows `t,x,y,label`.
    Scatter(&'a LabeledPage),
    /// Rows `page,e_discretizer,e_hmm`, pages numbered from 1.
    PageErrors { baseline: &'a [f64], hmm: &'a [f64] },
}

pub fn emit_plot_data(path: &Path, data: PlotData<'_>) -> Result<()> {
    match data {
        PlotData::Scatter(page) => crate::io::write_page_csv(path, page),
        PlotData::PageErrors { baseline, hmm } => {
            if baseline.len() != hmm.len() {
                return Err(Error::usage("error series differ in length"));
            }
            write_atomic(path, |out| {
                writeln!(out, "page,e_discretizer,e_hmm")?;
                for (i, (b, h)) in baseline.iter().zip(hmm).enumerate() {
                    writeln!(out, "{},{b:.6},{h:.6}", i + 1)?;
                }
                Ok(())
            })
        }
    }
}

/// Directory name for a noise level, e.g. `0.63` or `1`.
pub fn sigma_dir(sigma: f64) -> String {
    format!("{sigma}")
}

/// Writes `<root>/<scenario>/<sigma>/table.csv` for every row and
/// `<root>/summary.csv` over all scenarios.
pub fn write_results(root: &Path, results: &[(Scenario, Vec<TableRow>)]) -> Result<()> {
    for (scenario, rows) in results {
        for row in rows {
            let path = root
                .join(scenario.name())
                .join(sigma_dir(row.sigma))
                .join("table.csv");
            emit_plot_data(
                &path,
                PlotData::PageErrors {
                    baseline: &row.baseline.per_page_error,
                    hmm: &row.hmm.per_page_error,
                },
            )?;
        }
    }
    write_atomic(&root.join("summary.csv"), |out| {
        writeln!(out, "scenario,sigma,e_avg,e_avg_discretizer,em_iterations")?;
        for (scenario, rows) in results {
            for row in rows {
                writeln!(
                    out,
                    "{scenario},{},{:.6},{:.6},{}",
                    row.sigma, row.hmm.average_error, row.baseline.average_error, row.em_iterations
                )?;
            }
        }
        Ok(())
    })
}

/// Human-readable table of one scenario.
pub fn format_table(scenario: Scenario, rows: &[TableRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{scenario}");
    let _ = writeln!(s, "  {:>6}  {:>10}  {:>14}", "sigma", "e_avg hmm", "e_avg discrete");
    for row in rows {
        let _ = writeln!(
            s,
            "  {:>6}  {:>9.2}%  {:>13.2}%",
            row.sigma, row.hmm.average_error, row.baseline.average_error
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretizer::SurveillanceRegion;
    use crate::lds::default_initial_params;

    fn small_spec(scenario: Scenario, sigma: f64) -> ExperimentSpec {
        ExperimentSpec {
            noise_levels: vec![sigma],
            sim: SimConfig {
                n_lines: 5,
                ..SimConfig::default()
            },
            train_pages: 4,
            test_pages: 2,
            ..ExperimentSpec::standard(scenario, 3)
        }
    }

    #[test]
    fn noiseless_pages_score_zero() {
        let spec = small_spec(Scenario::NoRepeat, 0.0);
        let rows = run_table_experiment(&spec).unwrap();
        assert_eq!(rows[0].hmm.average_error, 0.0);
        assert_eq!(rows[0].baseline.average_error, 0.0);
    }

    #[test]
    fn reports_cover_same_pages() {
        let spec = small_spec(Scenario::RandomRepeat, 0.4);
        let row = run_noise_level(&spec, 0.4).unwrap();
        assert_eq!(row.hmm.samples, row.baseline.samples);
        assert_eq!(row.hmm.per_page_error.len(), 2);
        assert_eq!(row.hmm.method, Method::Hmm);
        assert_eq!(row.baseline.method, Method::DiscretizerOnly);
    }

    #[test]
    fn empty_noise_levels_rejected() {
        let mut spec = small_spec(Scenario::NoRepeat, 0.2);
        spec.noise_levels.clear();
        assert!(run_table_experiment(&spec).is_err());
    }

    #[test]
    fn line_count_mismatch_rejected() {
        let page = sim::simulate_page(&SimConfig::default(), 0).unwrap();
        let region = SurveillanceRegion::new(0.0, 10.0, 0.0, 10.0, 10).unwrap();
        let model = LdsModel::new(default_initial_params(10).unwrap(), region).unwrap();
        assert!(compare_baseline(&[page], &model).is_err());
    }

    #[test]
    fn plot_files() {
        let dir = tempfile::tempdir().unwrap();
        let empty = dir.path().join("empty.csv");
        emit_plot_data(&empty, PlotData::PageErrors { baseline: &[], hmm: &[] }).unwrap();
        assert_eq!(std::fs::read_to_string(&empty).unwrap(), "page,e_discretizer,e_hmm\n");

        let errors = dir.path().join("errors.csv");
        emit_plot_data(
            &errors,
            PlotData::PageErrors {
                baseline: &[40.0, 38.5],
                hmm: &[15.0, 17.25],
            },
        )
        .unwrap();
        let text = std::fs::read_to_string(&errors).unwrap();
        assert_eq!(
            text,
            "page,e_discretizer,e_hmm\n1,40.000000,15.000000\n2,38.500000,17.250000\n"
        );

        let page = sim::simulate_page(
            &SimConfig {
                n_lines: 2,
                ..SimConfig::default()
            },
            0,
        )
        .unwrap();
        let scatter = dir.path().join("scatter.csv");
        emit_plot_data(&scatter, PlotData::Scatter(&page)).unwrap();
        let text = std::fs::read_to_string(&scatter).unwrap();
        assert!(text.starts_with("t,x,y,label\n0,"));
        assert_eq!(text.lines().count(), 121);
    }

    #[test]
    fn results_layout() {
        let dir = tempfile::tempdir().unwrap();
        let spec = small_spec(Scenario::NoRepeat, 0.3);
        let rows = run_table_experiment(&spec).unwrap();
        write_results(dir.path(), &[(Scenario::NoRepeat, rows)]).unwrap();
        assert!(dir.path().join("no_repeat/0.3/table.csv").exists());
        let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 2);
        assert!(summary.lines().nth(1).unwrap().starts_with("no_repeat,0.3,"));
    }
}
