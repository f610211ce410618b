use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use cue_spectra::harness::{self, Campaign, ConfigPatch, ExperimentConfig, Format, LChoice};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LRule {
    Sqrt,
}

/// Monte Carlo campaigns on Haar-random unitary spectra.
///
/// Exit status: 0 when every check passes, 2 when a statistical check fails,
/// 1 on usage, configuration or I/O errors.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    campaign: Campaign,
    /// Flat `key = value` file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Matrix sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Mesoscopic scale L (clt).
    #[arg(long, conflicts_with = "l_rule")]
    l: Option<f64>,
    /// Choose L from N instead (`sqrt`: ⌈√N⌉).
    #[arg(long, value_enum)]
    l_rule: Option<LRule>,
    /// Window constants in (0, 1], comma separated.
    #[arg(long, value_delimiter = ',')]
    c: Option<Vec<f64>>,
    /// Moment orders (thm1, identities) or shift-set sizes (ratios).
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<u32>>,
    /// Evaluation point for thm1, in [1 − 1/N, 1].
    #[arg(long)]
    z: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory (default: $CUE_SPECTRA_OUT, else ./results).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Cli {
    fn patch(&self) -> ConfigPatch {
        ConfigPatch {
            campaign: Some(self.campaign),
            n: self.n.clone(),
            l: self.l.map(LChoice::Value).or(self.l_rule.map(|_| LChoice::Sqrt)),
            c: self.c.clone(),
            k_moment: self.k.clone(),
            z: self.z,
            samples: self.samples,
            seed: self.seed,
            workers: self.workers,
            out_dir: self.out.clone(),
            format: self.format,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let base = match &cli.config {
        Some(path) => match ConfigPatch::from_file(path) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        },
        None => ConfigPatch::default(),
    };
    let config = match ExperimentConfig::resolve(base.merge(cli.patch())) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let out = match harness::run(&config) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let record = &out.record;
    let asserted = record.rows.iter().filter(|r| r.pass.is_some()).count();
    let failed: Vec<_> = record.failures().collect();
    for row in &failed {
        eprintln!("FAIL {} = {:e} (target {:?}, tolerance {:?})", row.statistic, row.value, row.target, row.tolerance);
    }
    println!(
        "{}: {} rows, {}/{} checks passed in {:.2}s",
        record.campaign,
        record.rows.len(),
        asserted - failed.len(),
        asserted,
        record.wall_time_s
    );
    for file in &out.files {
        println!("wrote {}", file.display());
    }
    ExitCode::from(record.exit_code() as u8)
}
