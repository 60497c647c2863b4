use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use gaze_lds::discretizer::{discretize_page, estimate_region};
use gaze_lds::eval::{compare_baseline, emit_plot_data, format_table, run_table_experiment, write_results, PlotData, Scenario};
use gaze_lds::io::{load_model, parse_fixation_csv, save_model, write_atomic, write_page_csv, FixationLog};
use gaze_lds::lds::{detect_lines, detect_lines_windowed, train, train_on_pages, LdsModel};
use gaze_lds::sim::simulate_page;
use gaze_lds::{Fixation, SurveillanceRegion};

mod config;

use config::{Config, RepetitionMode};

/// A problem with the command line or configuration file (exit code 1).
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Line detection for eye-gaze reading data.
#[derive(Debug, Parser)]
#[command(name = "gaze-lds", version)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Random seed, overriding `seed` in the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write simulated labeled pages as page_NNN.csv files.
    Simulate {
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        #[command(flatten)]
        sim: SimFlags,
    },
    /// Train a model on fixation logs, or on simulated pages when no input is given.
    Train {
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Fixation CSV files, one page each.
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        sim: SimFlags,
        /// Estimate each input's region instead of using the configured bounds.
        #[arg(long)]
        estimate_region: bool,
    },
    /// Print the most probable line for every sample of a fixation log.
    Decode {
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        /// Output CSV (`t,line`); standard output when omitted.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Decode in consecutive windows of this many samples.
        #[arg(long)]
        window: Option<usize>,
        #[command(flatten)]
        region: RegionFlags,
    },
    /// Score the model and the discretizer alone on labeled fixation logs.
    Evaluate {
        #[arg(long, value_name = "FILE")]
        model: PathBuf,
        /// Labeled fixation CSV files, one page each.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Directory for report.csv and page_errors.csv.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[command(flatten)]
        region: RegionFlags,
    },
    /// Estimate the text region of a fixation log.
    EstimateRegion {
        #[arg(long, value_name = "FILE")]
        input: PathBuf,
        #[arg(long)]
        lines: Option<usize>,
    },
    /// Run the noise sweep for both reading scenarios.
    Tables {
        #[arg(long, value_name = "DIR", default_value = "results")]
        out: PathBuf,
        /// Run a single scenario.
        #[arg(long, value_parser = ["no_repeat", "random_repeat"])]
        scenario: Option<String>,
    },
}

#[derive(Debug, Args)]
struct SimFlags {
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    pages: Option<usize>,
    #[arg(long)]
    lines: Option<usize>,
    #[arg(long, value_enum)]
    repetition: Option<RepetitionMode>,
    #[arg(long)]
    noise_corr: Option<f64>,
}

#[derive(Debug, Args)]
struct RegionFlags {
    /// Number of text lines; defaults to the model's (or the configuration's).
    #[arg(long)]
    lines: Option<usize>,
    /// Estimate each page's region from its fixations.
    #[arg(long)]
    estimate_region: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 1;
    }
    match err.downcast_ref::<gaze_lds::Error>() {
        Some(gaze_lds::Error::Usage(_)) => 1,
        Some(gaze_lds::Error::ZeroLikelihood) => 3,
        _ => 2,
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = Config::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    match cli.command {
        Command::Simulate { out, sim } => simulate(&cfg, &out, &sim),
        Command::Train { out, inputs, sim, estimate_region } => train_cmd(&cfg, &out, &inputs, &sim, estimate_region),
        Command::Decode { model, input, out, window, region } => decode(&cfg, &model, &input, out.as_deref(), window, &region),
        Command::Evaluate { model, inputs, out, region } => evaluate(&cfg, &model, &inputs, out.as_deref(), &region),
        Command::EstimateRegion { input, lines } => {
            let log = read_log(&cfg, &input)?;
            let r = estimate_region(&log.fixations(), lines.unwrap_or(cfg.sim.n_lines), &cfg.region_estimate())?;
            println!("region {} {} {} {} {}", r.y_top, r.y_bottom, r.x_left, r.x_right, r.n_lines);
            println!("height {} line_spacing {}", r.height(), r.line_spacing());
            Ok(())
        }
        Command::Tables { out, scenario } => tables(&cfg, &out, scenario.as_deref()),
    }
}

fn apply_sim_flags(cfg: &mut Config, flags: &SimFlags) {
    let s = &mut cfg.sim;
    s.sigma = flags.sigma.unwrap_or(s.sigma);
    s.n_pages = flags.pages.unwrap_or(s.n_pages);
    s.n_lines = flags.lines.unwrap_or(s.n_lines);
    s.repetition = flags.repetition.unwrap_or(s.repetition);
    s.noise_corr = flags.noise_corr.unwrap_or(s.noise_corr);
}

fn simulate(cfg: &Config, out: &Path, flags: &SimFlags) -> Result<()> {
    let mut cfg = cfg.clone();
    apply_sim_flags(&mut cfg, flags);
    let sim = cfg.sim_config();
    sim.validate()?;
    for i in 0..sim.n_pages {
        let page = simulate_page(&sim, i)?;
        write_page_csv(&out.join(format!("page_{i:03}.csv")), &page)?;
    }
    println!("wrote {} pages to {}", sim.n_pages, out.display());
    Ok(())
}

fn read_log(cfg: &Config, path: &Path) -> Result<FixationLog> {
    let log = parse_fixation_csv(path, &cfg.csv_options()?)?;
    if log.rows.is_empty() {
        return Err(gaze_lds::Error::Format {
            path: path.into(),
            message: "no fixation rows".into(),
        }
        .into());
    }
    Ok(log)
}

/// Region for one page: estimated on request, else the configured bounds,
/// else `fallback` (a model's region), else estimated.
fn page_region(
    cfg: &Config,
    estimate: bool,
    n_lines: usize,
    fallback: Option<&SurveillanceRegion>,
    fixes: &[Fixation],
) -> Result<SurveillanceRegion> {
    if !estimate {
        if let Some(r) = cfg.fixed_region(n_lines)? {
            return Ok(r);
        }
        if let Some(r) = fallback {
            return Ok(SurveillanceRegion { n_lines, ..*r });
        }
    }
    Ok(estimate_region(fixes, n_lines, &cfg.region_estimate())?)
}

fn train_cmd(cfg: &Config, out: &Path, inputs: &[PathBuf], sim: &SimFlags, estimate: bool) -> Result<()> {
    let mut cfg = cfg.clone();
    cfg.sim.n_pages = cfg.experiment.train_pages;
    apply_sim_flags(&mut cfg, sim);
    let settings = cfg.train_settings();
    let (model, trace) = if inputs.is_empty() {
        let sim = cfg.sim_config();
        sim.validate()?;
        let pages = (0..sim.n_pages).map(|i| simulate_page(&sim, i)).collect::<gaze_lds::Result<Vec<_>>>()?;
        train_on_pages(&pages, &settings)?
    } else {
        let n_lines = cfg.sim.n_lines;
        let mut sequences = Vec::with_capacity(inputs.len());
        let mut first_region = None;
        for path in inputs {
            let fixes = read_log(&cfg, path)?.fixations();
            let r = page_region(&cfg, estimate, n_lines, None, &fixes)?;
            sequences.push(discretize_page(&fixes, &r)?);
            first_region.get_or_insert(r);
        }
        train(&sequences, first_region.expect("inputs are non-empty"), &settings)?
    };
    save_model(out, &model)?;
    println!(
        "trained {} lines: {} iterations, converged {}, log-likelihood {:.6}",
        model.n_lines(),
        trace.iterations_run,
        trace.converged,
        trace.log_likelihoods.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

/// Decodes one page, reporting out-of-range symbols before a line-count mismatch.
fn decode_page(
    model: &LdsModel,
    fixes: &[Fixation],
    region: &SurveillanceRegion,
    window: Option<usize>,
) -> Result<Vec<usize>> {
    let obs = discretize_page(fixes, region)?;
    model.params.check_symbols(&obs)?;
    if region.n_lines != model.n_lines() {
        return Err(UsageError(format!(
            "region has {} lines but the model has {}",
            region.n_lines,
            model.n_lines()
        ))
        .into());
    }
    let path = match window {
        Some(w) => detect_lines_windowed(model, &obs, w)?,
        None => detect_lines(model, &obs)?,
    };
    Ok(path.states)
}

fn decode(
    cfg: &Config,
    model_path: &Path,
    input: &Path,
    out: Option<&Path>,
    window: Option<usize>,
    flags: &RegionFlags,
) -> Result<()> {
    let model = load_model(model_path)?;
    let fixes = read_log(cfg, input)?.fixations();
    let region = page_region(cfg, flags.estimate_region, flags.lines.unwrap_or(model.n_lines()), Some(&model.region), &fixes)?;
    let lines = decode_page(&model, &fixes, &region, window)?;
    let fill = |buf: &mut Vec<u8>| -> std::io::Result<()> {
        writeln!(buf, "t,line")?;
        for (f, l) in fixes.iter().zip(&lines) {
            writeln!(buf, "{},{l}", f.t)?;
        }
        Ok(())
    };
    match out {
        Some(path) => write_atomic(path, fill)?,
        None => {
            let mut buf = Vec::new();
            fill(&mut buf)?;
            std::io::stdout().write_all(&buf)?;
        }
    }
    Ok(())
}

fn evaluate(cfg: &Config, model_path: &Path, inputs: &[PathBuf], out: Option<&Path>, flags: &RegionFlags) -> Result<()> {
    let model = load_model(model_path)?;
    let n_lines = flags.lines.unwrap_or(model.n_lines());
    let mut pages = Vec::with_capacity(inputs.len());
    for path in inputs {
        let log = read_log(cfg, path)?;
        let region = page_region(cfg, flags.estimate_region, n_lines, Some(&model.region), &log.fixations())?;
        pages.push(log.into_page(region)?);
    }
    let (baseline, hmm) = compare_baseline(&pages, &model)?;
    println!("{:>4}  {:>8}  {:>12}  {:>8}  input", "page", "samples", "e_discretizer", "e_hmm");
    for (i, path) in inputs.iter().enumerate() {
        println!(
            "{:>4}  {:>8}  {:>12.4}%  {:>7.4}%  {}",
            i + 1,
            hmm.samples[i],
            baseline.per_page_error[i],
            hmm.per_page_error[i],
            path.display()
        );
    }
    println!("e_avg {}: {:.4}%", baseline.method, baseline.average_error);
    println!("e_avg {}: {:.4}%", hmm.method, hmm.average_error);
    if let Some(dir) = out {
        write_atomic(&dir.join("report.csv"), |buf| {
            writeln!(buf, "method,page,samples,e_p")?;
            for report in [&baseline, &hmm] {
                for (i, (e, n)) in report.per_page_error.iter().zip(&report.samples).enumerate() {
                    writeln!(buf, "{},{},{n},{e:.6}", report.method, i + 1)?;
                }
            }
            Ok(())
        })?;
        emit_plot_data(
            &dir.join("page_errors.csv"),
            PlotData::PageErrors {
                baseline: &baseline.per_page_error,
                hmm: &hmm.per_page_error,
            },
        )?;
    }
    Ok(())
}

fn tables(cfg: &Config, out: &Path, only: Option<&str>) -> Result<()> {
    let mut results = Vec::new();
    for scenario in Scenario::ALL {
        if only.is_some_and(|name| name != scenario.name()) {
            continue;
        }
        let rows = run_table_experiment(&cfg.experiment(scenario))
            .with_context(|| format!("running the {scenario} sweep"))?;
        print!("{}", format_table(scenario, &rows));
        results.push((scenario, rows));
    }
    write_results(out, &results)?;
    println!("wrote {}", out.join("summary.csv").display());
    Ok(())
}
