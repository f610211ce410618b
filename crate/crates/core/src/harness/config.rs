//! Campaign configuration: a flat `key = value` file merged with CLI flags.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clt::sqrt_rule;
use crate::error::{invalid, Error, Result};
use crate::ratios::MAX_SHIFTS;
use crate::selberg::{Theorem1Params, MIN_MOMENT_SAMPLES};

/// Default output directory when neither `out` nor the environment sets one.
pub const OUT_DIR_ENV: &str = "CUE_SPECTRA_OUT";
pub const DEFAULT_OUT_DIR: &str = "results";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Campaign {
    Sample,
    Thm1,
    Clt,
    Ratios,
    Identities,
}

impl Campaign {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Sample => "sample",
            Self::Thm1 => "thm1",
            Self::Clt => "clt",
            Self::Ratios => "ratios",
            Self::Identities => "identities",
        }
    }

    fn min_samples(self) -> usize {
        match self {
            Self::Sample | Self::Identities => 1,
            Self::Thm1 => MIN_MOMENT_SAMPLES,
            Self::Clt => 60,
            Self::Ratios => crate::ratios::MIN_MONTE_CARLO_SAMPLES,
        }
    }
}

impl fmt::Display for Campaign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Campaign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sample" => Ok(Self::Sample),
            "thm1" => Ok(Self::Thm1),
            "clt" => Ok(Self::Clt),
            "ratios" => Ok(Self::Ratios),
            "identities" => Ok(Self::Identities),
            other => Err(invalid("campaign", format!("unknown campaign `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Self::Csv | Self::Both)
    }
    pub fn json(self) -> bool {
        matches!(self, Self::Json | Self::Both)
    }
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "both" => Ok(Self::Both),
            other => Err(invalid("format", format!("expected csv, json or both, got `{other}`"))),
        }
    }
}

/// Mesoscopic scale: a fixed `L` or `⌈√N⌉`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LChoice {
    Value(f64),
    Sqrt,
}

impl LChoice {
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            Self::Value(l) => l,
            Self::Sqrt => sqrt_rule(n),
        }
    }
}

impl FromStr for LChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sqrt" => Ok(Self::Sqrt),
            v => v
                .parse()
                .map(Self::Value)
                .map_err(|_| invalid("l", format!("expected a number or `sqrt`, got `{v}`"))),
        }
    }
}

/// Partially specified configuration; later layers override earlier ones.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigPatch {
    pub campaign: Option<Campaign>,
    pub n: Option<Vec<usize>>,
    pub l: Option<LChoice>,
    pub c: Option<Vec<f64>>,
    pub k_moment: Option<Vec<u32>>,
    pub z: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<Format>,
}

fn parse_list<T: FromStr>(key: &'static str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|item| {
            item.trim()
                .parse()
                .map_err(|_| invalid(key, format!("cannot parse `{}`", item.trim())))
        })
        .collect()
}

fn parse_one<T: FromStr>(key: &'static str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| invalid(key, format!("cannot parse `{}`", value.trim())))
}

impl ConfigPatch {
    /// Parses `key = value` lines; `#` starts a comment, lists are comma separated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut patch = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| invalid("config", format!("line {}: expected `key = value`", lineno + 1)))?;
            patch.set(key.trim(), value.trim())?;
        }
        Ok(patch)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "campaign" => self.campaign = Some(value.parse()?),
            "n" => self.n = Some(parse_list("n", value)?),
            "l" => self.l = Some(value.parse()?),
            "c" => self.c = Some(parse_list("c", value)?),
            "k" | "k_moment" => self.k_moment = Some(parse_list("k", value)?),
            "z" => self.z = Some(parse_one("z", value)?),
            "samples" => self.samples = Some(parse_one("samples", value)?),
            "seed" => self.seed = Some(parse_one("seed", value)?),
            "workers" => self.workers = Some(parse_one("workers", value)?),
            "out" | "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            "format" => self.format = Some(value.parse()?),
            other => return Err(invalid("config", format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Fields set in `other` win.
    pub fn merge(self, other: Self) -> Self {
        Self {
            campaign: other.campaign.or(self.campaign),
            n: other.n.or(self.n),
            l: other.l.or(self.l),
            c: other.c.or(self.c),
            k_moment: other.k_moment.or(self.k_moment),
            z: other.z.or(self.z),
            samples: other.samples.or(self.samples),
            seed: other.seed.or(self.seed),
            workers: other.workers.or(self.workers),
            out_dir: other.out_dir.or(self.out_dir),
            format: other.format.or(self.format),
        }
    }
}

/// A fully resolved, validated campaign description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub campaign: Campaign,
    pub n: Vec<usize>,
    pub l: Option<LChoice>,
    pub c: Vec<f64>,
    pub k_moment: Vec<u32>,
    pub z: f64,
    pub samples: usize,
    pub seed: u64,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub format: Format,
}

fn required<T>(field: &'static str, value: Option<T>, campaign: Campaign) -> Result<T> {
    value.ok_or_else(|| invalid(field, format!("required by campaign `{campaign}`")))
}

impl ExperimentConfig {
    /// Applies per-campaign defaults and validates every range.
    pub fn resolve(patch: ConfigPatch) -> Result<Self> {
        let campaign = patch
            .campaign
            .ok_or_else(|| invalid("campaign", "no campaign given"))?;
        let (default_c, default_k): (&[f64], &[u32]) = match campaign {
            Campaign::Thm1 => (&[0.25, 0.5, 1.0], &[1]),
            Campaign::Identities => (&[0.25, 0.5, 1.0], &[3]),
            Campaign::Ratios => (&[], &[1, 2]),
            Campaign::Sample | Campaign::Clt => (&[], &[]),
        };
        let out_dir = patch.out_dir.unwrap_or_else(|| {
            std::env::var_os(OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
        });
        let config = Self {
            campaign,
            n: required("n", patch.n, campaign)?,
            l: match campaign {
                Campaign::Clt => Some(patch.l.unwrap_or(LChoice::Sqrt)),
                _ => None,
            },
            c: patch.c.unwrap_or_else(|| default_c.to_vec()),
            k_moment: patch.k_moment.unwrap_or_else(|| default_k.to_vec()),
            z: patch.z.unwrap_or(1.0),
            samples: required("samples", patch.samples, campaign)?,
            seed: required("seed", patch.seed, campaign)?,
            workers: patch.workers.unwrap_or(1),
            out_dir,
            format: patch.format.unwrap_or(Format::Csv),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() {
            return Err(invalid("n", "at least one matrix size is required"));
        }
        if let Some(bad) = self.n.iter().find(|&&n| n == 0) {
            return Err(invalid("n", format!("matrix size must be positive, got {bad}")));
        }
        if self.workers == 0 {
            return Err(invalid("workers", "must be at least 1"));
        }
        let min = self.campaign.min_samples();
        if self.samples < min {
            return Err(invalid(
                "samples",
                format!("campaign `{}` needs at least {min}, got {}", self.campaign, self.samples),
            ));
        }
        if let Some(bad) = self.c.iter().find(|c| !(**c > 0.0 && **c <= 1.0)) {
            return Err(invalid("c", format!("each c must lie in (0, 1], got {bad}")));
        }
        match self.campaign {
            Campaign::Thm1 | Campaign::Identities => {
                if self.c.is_empty() || self.k_moment.is_empty() {
                    return Err(invalid("c", "c and k lists must be non-empty"));
                }
                for &n in &self.n {
                    if n < 2 {
                        return Err(invalid("n", "need N >= 2 so that z0 = 1 - 1/N > 0"));
                    }
                    for &c in &self.c {
                        for &k in &self.k_moment {
                            let z = if self.campaign == Campaign::Thm1 { self.z } else { 1.0 };
                            Theorem1Params::new(n, c, k, z)?;
                        }
                    }
                }
            }
            Campaign::Clt => {
                let l = self.l.unwrap_or(LChoice::Sqrt);
                for &n in &self.n {
                    let value = l.resolve(n);
                    if !(value > 1.0 && value < n as f64 / 2.0) {
                        return Err(invalid("l", format!("need 1 < L < N/2, got L={value} at N={n}")));
                    }
                }
            }
            Campaign::Ratios => {
                if let Some(bad) = self.k_moment.iter().find(|&&k| k == 0 || k as usize > MAX_SHIFTS) {
                    return Err(invalid("k", format!("shift-set size must be in 1..={MAX_SHIFTS}, got {bad}")));
                }
            }
            Campaign::Sample => {}
        }
        Ok(())
    }

    /// Canonical text of every field that affects results (not workers, output
    /// location or format).
    pub fn canonical(&self) -> String {
        let join = |xs: Vec<String>| xs.join(",");
        let mut out = String::new();
        let mut fields = BTreeMap::new();
        fields.insert("campaign", self.campaign.to_string());
        fields.insert("n", join(self.n.iter().map(|x| x.to_string()).collect()));
        fields.insert(
            "l",
            match self.l {
                None => String::new(),
                Some(LChoice::Sqrt) => "sqrt".into(),
                Some(LChoice::Value(v)) => format!("{v:?}"),
            },
        );
        fields.insert("c", join(self.c.iter().map(|x| format!("{x:?}")).collect()));
        fields.insert("k", join(self.k_moment.iter().map(|x| x.to_string()).collect()));
        fields.insert("z", format!("{:?}", self.z));
        fields.insert("samples", self.samples.to_string());
        fields.insert("seed", self.seed.to_string());
        for (k, v) in fields {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// Hex SHA-256 of [`canonical`](Self::canonical).
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .fold(String::with_capacity(64), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            })
    }
}
