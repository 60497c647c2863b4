//! Fixation logs, model files and atomic file output.
//!
//! Fixation CSV files carry a `t,x,y` header with an optional trailing
//! `label` column; one file holds one page.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::discretizer::{Fixation, SurveillanceRegion};
use crate::error::{Error, Result};
use crate::hmm::{self, LineError};
use crate::lds::LdsModel;
use crate::sim::LabeledPage;

/// Writes `path` by filling a sibling temporary file and renaming it over the
/// target, so readers never observe a partial file.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    fill(&mut buf).map_err(|e| Error::io(path, e))?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::usage(format!("{} is not a file path", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&buf)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// What to do with rows containing NaN or infinite values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NonFinite {
    #[default]
    Error,
    Drop,
}

/// Units of incoming gaze coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Coordinates {
    /// Used as given: normalized `[0, 1]` screen fractions (or the simulator's
    /// line-width units).
    #[default]
    Normalized,
    /// Pixels on a screen of this size; rescaled to `[0, 1]` on ingestion.
    Pixels { width: f64, height: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CsvOptions {
    pub non_finite: NonFinite,
    pub coordinates: Coordinates,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub fixation: Fixation,
    pub label: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixationLog {
    pub path: PathBuf,
    pub rows: Vec<LogRow>,
    /// Rows skipped because they held non-finite values.
    pub dropped: usize,
    /// Sampling rate implied by the timestamps, when they advance.
    pub sample_hz: Option<f64>,
}

impl FixationLog {
    pub fn fixations(&self) -> Vec<Fixation> {
        self.rows.iter().map(|r| r.fixation).collect()
    }

    /// Labels of every row, or `None` if the log is unlabeled.
    pub fn labels(&self) -> Option<Vec<usize>> {
        self.rows.iter().map(|r| r.label).collect()
    }

    /// Pairs the log with `region` as a labeled page.
    pub fn into_page(self, region: SurveillanceRegion) -> Result<LabeledPage> {
        let labels = self.labels().ok_or_else(|| Error::Format {
            path: self.path.clone(),
            message: "log has no label column".into(),
        })?;
        if let Some(&bad) = labels.iter().find(|&&l| l > region.n_lines) {
            return Err(Error::Format {
                path: self.path,
                message: format!("label {bad} exceeds the {} lines of the region", region.n_lines),
            });
        }
        Ok(LabeledPage {
            fixations: self.rows.iter().map(|r| r.fixation).collect(),
            labels,
            region,
        })
    }
}

pub fn parse_fixation_csv(path: &Path, options: &CsvOptions) -> Result<FixationLog> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_fixation_text(path, &text, options)
}

pub(crate) fn parse_fixation_text(path: &Path, text: &str, options: &CsvOptions) -> Result<FixationLog> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => {
            return Err(Error::Format {
                path: path.into(),
                message: e.to_string(),
            })
        }
        None => {
            return Err(Error::Format {
                path: path.into(),
                message: "empty file, expected header t,x,y[,label]".into(),
            })
        }
    };
    let columns: Vec<&str> = header.iter().collect();
    let labeled = match columns.as_slice() {
        ["t", "x", "y"] => false,
        ["t", "x", "y", "label"] => true,
        _ => {
            return Err(Error::Format {
                path: path.into(),
                message: format!("expected header t,x,y[,label], found {}", columns.join(",")),
            })
        }
    };

    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.into(),
        line,
        message,
    };
    let (sx, sy) = match options.coordinates {
        Coordinates::Normalized => (1.0, 1.0),
        Coordinates::Pixels { width, height } => (1.0 / width, 1.0 / height),
    };

    let mut rows: Vec<LogRow> = Vec::new();
    let mut dropped = 0;
    for record in records {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let expected = if labeled { 4 } else { 3 };
        if record.len() != expected {
            return Err(parse_err(line, format!("expected {expected} fields, found {}", record.len())));
        }
        let number = |i: usize, name: &str| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|_| parse_err(line, format!("invalid {name} value {:?}", &record[i])))
        };
        let fixation = Fixation::new(number(0, "t")?, number(1, "x")? * sx, number(2, "y")? * sy);
        let label = if labeled {
            let l: usize = record[3]
                .parse()
                .map_err(|_| parse_err(line, format!("invalid label {:?}", &record[3])))?;
            if l == 0 {
                return Err(parse_err(line, "labels start at 1".into()));
            }
            Some(l)
        } else {
            None
        };
        if !fixation.is_finite() {
            match options.non_finite {
                NonFinite::Drop => {
                    dropped += 1;
                    continue;
                }
                NonFinite::Error => return Err(parse_err(line, "non-finite value".into())),
            }
        }
        if let Some(prev) = rows.last() {
            if fixation.t < prev.fixation.t {
                return Err(parse_err(line, "timestamps must be non-decreasing".into()));
            }
        }
        rows.push(LogRow { fixation, label });
    }

    let sample_hz = match (rows.first(), rows.last()) {
        (Some(a), Some(b)) if b.fixation.t > a.fixation.t => {
            Some((rows.len() - 1) as f64 / (b.fixation.t - a.fixation.t))
        }
        _ => None,
    };
    Ok(FixationLog {
        path: path.into(),
        rows,
        dropped,
        sample_hz,
    })
}

/// Writes fixations as CSV, with a label column when `labels` is given.
pub fn write_fixation_csv(path: &Path, fixations: &[Fixation], labels: Option<&[usize]>) -> Result<()> {
    if let Some(l) = labels {
        if l.len() != fixations.len() {
            return Err(Error::usage("labels and fixations differ in length"));
        }
    }
    write_atomic(path, |out| {
        match labels {
            Some(labels) => {
                writeln!(out, "t,x,y,label")?;
                for (f, l) in fixations.iter().zip(labels) {
                    writeln!(out, "{},{},{},{}", f.t, f.x, f.y, l)?;
                }
            }
            None => {
                writeln!(out, "t,x,y")?;
                for f in fixations {
                    writeln!(out, "{},{},{}", f.t, f.x, f.y)?;
                }
            }
        }
        Ok(())
    })
}

pub fn write_page_csv(path: &Path, page: &LabeledPage) -> Result<()> {
    write_fixation_csv(path, &page.fixations, Some(&page.labels))
}

/// Saves a model: one `region y_top y_bottom x_left x_right n_lines` line
/// followed by the HMM parameter block.
pub fn save_model(path: &Path, model: &LdsModel) -> Result<()> {
    let r = &model.region;
    write_atomic(path, |out| {
        writeln!(
            out,
            "region {} {} {} {} {}",
            r.y_top, r.y_bottom, r.x_left, r.x_right, r.n_lines
        )?;
        hmm::write_params(out, &model.params)
    })
}

pub fn load_model(path: &Path) -> Result<LdsModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let to_error = |e: LineError| Error::Parse {
        path: path.into(),
        line: e.line,
        message: e.message,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .skip_while(|(_, l)| l.trim().is_empty() || l.trim_start().starts_with('#'));
    let (line, header) = lines.next().ok_or_else(|| Error::Format {
        path: path.into(),
        message: "empty model file".into(),
    })?;
    let region = parse_region_line(header).map_err(|message| to_error(LineError { line, message }))?;
    let params = hmm::read_params(lines).map_err(to_error)?;
    LdsModel::new(params, region).map_err(|e| Error::Format {
        path: path.into(),
        message: e.to_string(),
    })
}

fn parse_region_line(text: &str) -> std::result::Result<SurveillanceRegion, String> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    let ["region", y_top, y_bottom, x_left, x_right, n_lines] = fields.as_slice() else {
        return Err("expected `region y_top y_bottom x_left x_right n_lines`".into());
    };
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("invalid region value {s:?}"));
    let n_lines = n_lines
        .parse::<usize>()
        .map_err(|_| format!("invalid line count {n_lines:?}"))?;
    SurveillanceRegion::new(num(y_top)?, num(y_bottom)?, num(x_left)?, num(x_right)?, n_lines)
        .map_err(|e| e.to_string())
}
