//! Result records and their CSV / JSON serialisations.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_HEADER: &str = "statistic,value,std_error,target,tolerance,pass";

/// One reported statistic. `pass` is `None` for informational rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatRow {
    pub statistic: String,
    pub value: f64,
    pub std_error: Option<f64>,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
}

impl StatRow {
    pub fn info(statistic: impl Into<String>, value: f64) -> Self {
        Self {
            statistic: statistic.into(),
            value,
            std_error: None,
            target: None,
            tolerance: None,
            pass: None,
        }
    }

    pub fn with_se(mut self, se: f64) -> Self {
        self.std_error = Some(se);
        self
    }

    /// `|value − target| ≤ tolerance`.
    pub fn within(statistic: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        Self {
            target: Some(target),
            tolerance: Some(tolerance),
            pass: Some((value - target).abs() <= tolerance),
            ..Self::info(statistic, value)
        }
    }

    /// `|value − target| ≤ k·SE`.
    pub fn within_se(statistic: impl Into<String>, value: f64, se: f64, target: f64, k: f64) -> Self {
        Self::within(statistic, value, target, k * se).with_se(se)
    }

    /// One-sided: `value > bound` (tolerance column left empty).
    pub fn above(statistic: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            target: Some(bound),
            pass: Some(value > bound),
            ..Self::info(statistic, value)
        }
    }

    /// One-sided: `value ≤ bound` (tolerance column left empty).
    pub fn at_most(statistic: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            target: Some(bound),
            pass: Some(value <= bound),
            ..Self::info(statistic, value)
        }
    }

    /// `1/factor ≤ value/target ≤ factor`; the factor goes in the tolerance column.
    pub fn within_factor(statistic: impl Into<String>, value: f64, target: f64, factor: f64) -> Self {
        let r = value / target;
        Self {
            target: Some(target),
            tolerance: Some(factor),
            pass: Some(r >= 1.0 / factor && r <= factor),
            ..Self::info(statistic, value)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub campaign: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub wall_time_s: f64,
    pub rows: Vec<StatRow>,
    pub config: ExperimentConfig,
}

impl ResultRecord {
    pub fn new(config: &ExperimentConfig, rows: Vec<StatRow>, wall_time_s: f64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            campaign: config.campaign.to_string(),
            config_hash: config.hash(),
            seed: config.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s,
            rows,
            config: config.clone(),
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &StatRow> {
        self.rows.iter().filter(|r| r.pass == Some(false))
    }

    pub fn all_pass(&self) -> bool {
        self.failures().next().is_none()
    }

    /// 0 when every asserted row passes, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            2
        }
    }

    /// Output file stem, `<campaign>-<first 12 hash digits>`.
    pub fn stem(&self) -> String {
        format!("{}-{}", self.campaign, &self.config_hash[..12])
    }
}

/// 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn to_csv(record: &ResultRecord) -> String {
    let opt = |x: Option<f64>| x.map(format_float).unwrap_or_default();
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in &record.rows {
        let pass = match row.pass {
            Some(true) => "true",
            Some(false) => "false",
            None => "",
        };
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            csv_field(&row.statistic),
            format_float(row.value),
            opt(row.std_error),
            opt(row.target),
            opt(row.tolerance),
            pass
        ));
    }
    out
}

pub fn to_json(record: &ResultRecord) -> Result<String> {
    serde_json::to_string_pretty(record).map_err(|e| Error::Io {
        path: String::new(),
        reason: e.to_string(),
    })
}

pub fn from_json(text: &str) -> Result<ResultRecord> {
    serde_json::from_str(text).map_err(|e| Error::Io {
        path: String::new(),
        reason: e.to_string(),
    })
}

/// Writes through a temporary file in the same directory and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |e: std::io::Error| Error::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    };
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn emit_csv(record: &ResultRecord, dir: &Path) -> Result<PathBuf> {
    let path = dir.join(format!("{}.csv", record.stem()));
    write_atomic(&path, &to_csv(record))?;
    Ok(path)
}

pub fn emit_json(record: &ResultRecord, dir: &Path) -> Result<PathBuf> {
    let path = dir.join(format!("{}.json", record.stem()));
    write_atomic(&path, &to_json(record)?)?;
    Ok(path)
}
