//! Campaign orchestration: configuration, dispatch and persisted results.

mod campaigns;
pub mod config;
pub mod record;

use std::path::PathBuf;
use std::time::Instant;

pub use campaigns::{ratio_spec, KS_THRESHOLD, LATTICE_SAMPLES, MAX_ANGLE_ROWS, SE_MULTIPLIER};
pub use config::{Campaign, ConfigPatch, ExperimentConfig, Format, LChoice, OUT_DIR_ENV};
pub use record::{emit_csv, emit_json, from_json, to_csv, to_json, ResultRecord, StatRow, CSV_HEADER, SCHEMA_VERSION};

use crate::error::Result;

/// Computes the campaign's statistics without touching the filesystem.
pub fn execute(config: &ExperimentConfig) -> Result<ResultRecord> {
    config.validate()?;
    let start = Instant::now();
    let rows = match config.campaign {
        Campaign::Sample => campaigns::sample(config)?,
        Campaign::Thm1 => campaigns::thm1(config)?,
        Campaign::Clt => campaigns::clt(config)?,
        Campaign::Ratios => campaigns::ratios(config)?,
        Campaign::Identities => campaigns::identities(config)?,
    };
    Ok(ResultRecord::new(config, rows, start.elapsed().as_secs_f64()))
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub record: ResultRecord,
    pub files: Vec<PathBuf>,
}

/// [`execute`], then writes the requested formats into `config.out_dir`.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    let record = execute(config)?;
    let mut files = Vec::new();
    if config.format.csv() {
        files.push(emit_csv(&record, &config.out_dir)?);
    }
    if config.format.json() {
        files.push(emit_json(&record, &config.out_dir)?);
    }
    Ok(RunOutput { record, files })
}
