use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::error::Result;

use super::config::ExperimentConfig;

/// Significant digits written for every float.
pub const SIG_DIGITS: usize = 12;

/// Formats `x` with [`SIG_DIGITS`] significant digits, trailing zeros trimmed.
///
/// Plain notation is used for exponents in `[-5, 12)`, scientific otherwise.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if !s.contains('.') {
        return s.to_string();
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" {
        "0".into()
    } else {
        t.to_string()
    }
}

/// One CSV cell.
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

/// In-memory CSV document with a fixed header.
pub struct CsvTable {
    columns: usize,
    text: String,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            columns: header.len(),
            text: format!("{}\n", header.join(",")),
        }
    }

    /// Appends a row; panics if its width differs from the header.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns, "row width does not match header");
        for (i, cell) in row.into_iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            match cell {
                Cell::Int(v) => write!(self.text, "{v}").expect("write to string"),
                Cell::Float(v) => self.text.push_str(&format_float(v)),
                Cell::Text(v) => self.text.push_str(&v),
            }
        }
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, &self.text)?;
        Ok(())
    }
}

/// Header with `theta1..theta6` spliced in after `prefix`.
pub fn header_with_thetas<'a>(prefix: &[&'a str], suffix: &[&'a str]) -> Vec<&'a str> {
    const THETAS: [&str; 6] = ["theta1", "theta2", "theta3", "theta4", "theta5", "theta6"];
    prefix
        .iter()
        .chain(THETAS.iter())
        .chain(suffix)
        .copied()
        .collect()
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    experiment: &'a str,
    seed: u64,
    config: &'a ExperimentConfig,
    files: &'a [String],
    wall_time_seconds: f64,
}

/// Writes `manifest.json` next to the experiment outputs.
pub fn write_manifest(
    dir: &Path,
    experiment: &str,
    cfg: &ExperimentConfig,
    files: &[String],
    wall: Duration,
) -> Result<PathBuf> {
    let manifest = Manifest {
        tool: "photovqe",
        version: env!("CARGO_PKG_VERSION"),
        experiment,
        seed: cfg.seed,
        config: cfg,
        files,
        wall_time_seconds: wall.as_secs_f64(),
    };
    fs::create_dir_all(dir)?;
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(path)
}
