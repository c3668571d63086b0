//! Experiment parameters and their TOML form.

use std::path::Path;

use ifbm::generator::{default_pivot, plan_bilateral, plan_unilateral};
use ifbm::pathstats::Stat;
use ifbm::powerlaw::standard_windows;
use ifbm::{GenPlan, HurstParams, Interval};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, CliResult};

/// Largest grid length accepted without `allow_large`. Predictor storage is
/// `T²/2` doubles, 1 GiB at this size.
pub const MAX_DEFAULT_LEN: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub interval: Interval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<usize>,
    #[serde(serialize_with = "ser_seed", deserialize_with = "de_seed")]
    pub master_seed: u64,
    pub windows: Vec<(f64, f64)>,
    pub stats: Vec<Stat>,
    pub workers: usize,
    #[serde(default)]
    pub allow_large: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            h: 0.5,
            t: 2048,
            n: 1000,
            interval: Interval::Unilateral,
            k0: None,
            master_seed: 0,
            windows: standard_windows(),
            stats: vec![Stat::M, Stat::G, Stat::A, Stat::Z],
            workers: default_workers(),
            allow_large: false,
        }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

// TOML integers are signed 64-bit, so seeds above i64::MAX go out as strings.
fn ser_seed<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
    match i64::try_from(*seed) {
        Ok(v) => s.serialize_i64(v),
        Err(_) => s.serialize_str(&seed.to_string()),
    }
}

fn de_seed<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Str(String),
    }
    match Raw::deserialize(d)? {
        Raw::Int(v) => u64::try_from(v).map_err(|_| serde::de::Error::custom("master_seed must be non-negative")),
        Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> CliResult<()> {
        HurstParams::new(self.h)?;
        if self.t < 2 {
            return Err(CliError::invalid(format!("T must be at least 2, got {}", self.t)));
        }
        if self.t > MAX_DEFAULT_LEN && !self.allow_large {
            return Err(CliError::invalid(format!(
                "T = {} exceeds {MAX_DEFAULT_LEN}; predictor storage needs about {:.1} GiB, pass --allow-large to proceed",
                self.t,
                (self.t * self.t / 2 * 8) as f64 / (1u64 << 30) as f64
            )));
        }
        if self.n == 0 {
            return Err(CliError::invalid("N must be at least 1"));
        }
        if self.workers == 0 {
            return Err(CliError::invalid("workers must be at least 1"));
        }
        match self.interval {
            Interval::Unilateral => {
                if self.k0.is_some() {
                    return Err(CliError::invalid("a pivot k0 only applies to bilateral intervals"));
                }
            }
            Interval::Bilateral => {
                if self.stats.contains(&Stat::Z) {
                    return Err(CliError::invalid("statistic Z is only defined on unilateral intervals"));
                }
                if let Some(k0) = self.k0 {
                    if k0 == 0 || k0 >= self.t {
                        return Err(CliError::invalid(format!("pivot must satisfy 1 <= k0 <= T-1, got {k0}")));
                    }
                }
            }
        }
        for &(lo, hi) in &self.windows {
            if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
                return Err(CliError::invalid(format!("window must satisfy 0 <= lo < hi, got ({lo}, {hi})")));
            }
        }
        Ok(())
    }

    /// Pivot actually used: `k0`, or `⌈T/2⌉` for bilateral runs without one.
    pub fn pivot(&self) -> Option<usize> {
        match self.interval {
            Interval::Unilateral => None,
            Interval::Bilateral => Some(self.k0.unwrap_or_else(|| default_pivot(self.t))),
        }
    }

    pub fn plan(&self) -> CliResult<GenPlan> {
        self.validate()?;
        let p = HurstParams::new(self.h)?;
        Ok(match self.pivot() {
            None => plan_unilateral(p, self.t)?,
            Some(k0) => plan_bilateral(p, self.t, k0)?,
        })
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::invalid(format!("cannot serialize config: {e}")))
    }

    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::invalid(format!("bad config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }
}

/// Parses `lo:hi` pairs separated by commas, or `standard`.
pub fn parse_windows(s: &str) -> CliResult<Vec<(f64, f64)>> {
    if s.trim() == "standard" {
        return Ok(standard_windows());
    }
    s.split(',')
        .map(|w| {
            let (lo, hi) = w
                .split_once(':')
                .ok_or_else(|| CliError::invalid(format!("window '{w}' must look like lo:hi")))?;
            Ok((parse_f64(lo)?, parse_f64(hi)?))
        })
        .collect()
}

pub fn parse_scales(s: &str) -> CliResult<Vec<f64>> {
    s.split(',').map(parse_f64).collect()
}

pub fn parse_stats(s: &str) -> CliResult<Vec<Stat>> {
    s.split(',').map(|x| x.trim().parse::<Stat>().map_err(CliError::from)).collect()
}

fn parse_f64(s: &str) -> CliResult<f64> {
    s.trim().parse().map_err(|_| CliError::invalid(format!("'{s}' is not a number")))
}
