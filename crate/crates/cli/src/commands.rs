//! The five subcommands as library functions.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ifbm::burgers::{default_scales, dim_experiment, DimReport};
use ifbm::montecarlo::for_each_ordered;
use ifbm::pathstats::{self, write_stats_row, Ecdf, PathStats, Stat, STATS_HEADER};
use ifbm::powerlaw::{guarded_window, mle_theta, mle_theta_lattice, stability, FitMethod, Stability};
use ifbm::{Interval, SeedTag};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

pub const STATS_FILE: &str = "stats.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const BURGERS_CSV: &str = "burgers.csv";
pub const BURGERS_JSON: &str = "burgers.json";

/// Probabilities reported in the Monte Carlo summary.
pub const SUMMARY_PROBS: [f64; 9] = [0.001, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99];

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::io(path, e.into()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

/// Writes sample `sample` of the configured experiment as `index,value` CSV.
pub fn cmd_gen(cfg: &ExperimentConfig, sample: u64, out: &Path) -> CliResult<()> {
    let plan = cfg.plan()?;
    let path = plan.generate(SeedTag::new(cfg.master_seed, sample));
    let mut w = create(out)?;
    path.write_csv(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(out, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub stat: Stat,
    pub probs: Vec<f64>,
    /// `None` when every path is an atom.
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub interval: Interval,
    pub k0: Option<usize>,
    pub master_seed: u64,
    pub atom_mass: f64,
    pub boundary_fraction: f64,
    pub quantiles: Vec<Quantiles>,
}

/// Generates `N` paths, streams their statistics to `out_dir/stats.csv` in
/// sample order and writes `out_dir/summary.json`.
pub fn cmd_mc(cfg: &ExperimentConfig, out_dir: &Path) -> CliResult<McSummary> {
    let plan = cfg.plan()?;
    let csv_path = out_dir.join(STATS_FILE);
    let mut w = create(&csv_path)?;
    writeln!(w, "{STATS_HEADER}").map_err(|e| CliError::io(&csv_path, e))?;

    let mut stats: Vec<PathStats> = Vec::with_capacity(cfg.n as usize);
    let mut io_err = None;
    let work = |seeds: &[SeedTag]| -> Vec<PathStats> {
        plan.generate_batch(seeds).iter().map(|p| pathstats::extract(p).expect("generated paths are non-empty")).collect()
    };
    for_each_ordered(cfg.master_seed, cfg.n, cfg.workers, work, |i, s| {
        if io_err.is_none() {
            io_err = write_stats_row(&mut w, i, &s).err();
        }
        stats.push(s);
        Ok(())
    })?;
    if let Some(e) = io_err {
        return Err(CliError::io(&csv_path, e));
    }
    w.flush().map_err(|e| CliError::io(&csv_path, e))?;

    let n = stats.len() as f64;
    let atom_flags: Vec<bool> = stats.iter().map(|s| s.atom).collect();
    let quantiles = cfg
        .stats
        .iter()
        .map(|&stat| {
            let (vals, flags): (Vec<f64>, Vec<bool>) =
                stats.iter().zip(&atom_flags).filter_map(|(s, &a)| stat.value(s).map(|v| (v, a))).unzip();
            let values = Ecdf::new(&vals, Some(&flags), false)
                .ok()
                .map(|e| SUMMARY_PROBS.iter().map(|&p| e.quantile(p)).collect());
            Quantiles { stat, probs: SUMMARY_PROBS.to_vec(), values }
        })
        .collect();
    let summary = McSummary {
        h: cfg.h,
        t: cfg.t,
        n: cfg.n,
        interval: cfg.interval,
        k0: cfg.pivot(),
        master_seed: cfg.master_seed,
        atom_mass: atom_flags.iter().filter(|&&a| a).count() as f64 / n,
        boundary_fraction: stats.iter().filter(|s| s.boundary).count() as f64 / n,
        quantiles,
    };
    write_json(&out_dir.join(SUMMARY_FILE), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
struct StatsRow {
    #[allow(dead_code)]
    sample_index: u64,
    #[serde(rename = "M")]
    m: f64,
    #[serde(rename = "G")]
    g: f64,
    #[serde(rename = "A_plus")]
    a_plus: f64,
    #[serde(rename = "Z")]
    z: Option<f64>,
    atom: bool,
}

/// Rows of a stats CSV as `PathStats`. The boundary flag is not stored and
/// reads back as `false`.
pub fn read_stats(path: &Path) -> CliResult<Vec<PathStats>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    csv::Reader::from_reader(file)
        .deserialize::<StatsRow>()
        .map(|row| {
            let r = row.map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
            Ok(PathStats { m: r.m, g: r.g, a_plus: r.a_plus, z: r.z, atom: r.atom, boundary: false })
        })
        .collect()
}

/// What the fit needs to know about the run that produced a stats file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunMeta {
    pub h: Option<f64>,
    pub t: Option<usize>,
    pub interval: Option<Interval>,
}

impl RunMeta {
    /// Reads `summary.json` next to a stats file, if there is one.
    pub fn beside(stats_path: &Path) -> CliResult<Self> {
        let path = stats_path.parent().map_or_else(|| PathBuf::from(SUMMARY_FILE), |d| d.join(SUMMARY_FILE));
        if !path.exists() {
            return Ok(Self::default());
        }
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let s: McSummary =
            serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
        Ok(Self { h: Some(s.h), t: Some(s.t), interval: Some(s.interval) })
    }

    /// Fields of `over` win where set.
    pub fn or(self, over: RunMeta) -> Self {
        Self { h: over.h.or(self.h), t: over.t.or(self.t), interval: over.interval.or(self.interval) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowFit {
    #[serde(rename = "H")]
    pub h: Option<f64>,
    pub interval_type: Option<Interval>,
    pub stat: Stat,
    pub window: (f64, f64),
    /// Window after raising its lower edge to the grid resolution guard.
    pub fitted_window: Option<(f64, f64)>,
    pub theta_hat: Option<f64>,
    pub stderr: Option<f64>,
    pub n: usize,
    pub atom_mass: f64,
    pub method: Option<FitMethod>,
    pub lattice: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaReport {
    pub stat: Stat,
    pub fits: Vec<WindowFit>,
    pub stability: Option<Stability>,
}

/// Grid spacing of a statistic's values on a length-`T` grid, for those
/// that live on a lattice.
pub fn lattice_spacing(stat: Stat, t: usize) -> Option<f64> {
    match stat {
        Stat::G => Some(1.0 / t as f64),
        Stat::A => Some(1.0 / (t + 1) as f64),
        Stat::M | Stat::Z => None,
    }
}

/// Power-law exponent of `stat` near zero in each window.
///
/// With a known grid length every window starts at the resolution guard
/// and lattice-valued statistics use the interval-censored likelihood.
/// Otherwise each window gets the continuous truncated MLE as given.
pub fn fit_theta(stats: &[PathStats], stat: Stat, windows: &[(f64, f64)], meta: RunMeta) -> CliResult<ThetaReport> {
    let rows: Vec<&PathStats> = stats.iter().filter(|s| stat.value(s).is_some()).collect();
    if rows.is_empty() {
        return Err(CliError::invalid(format!("statistic {stat} has no values in the stats file")));
    }
    let values: Vec<f64> = rows.iter().filter_map(|s| stat.value(s)).collect();
    let atom_mass = rows.iter().filter(|s| s.atom).count() as f64 / rows.len() as f64;
    let spacing = meta.t.and_then(|t| lattice_spacing(stat, t));

    let fits: Vec<WindowFit> = windows
        .iter()
        .map(|&window| {
            let fitted = match meta.t {
                Some(t) => guarded_window(window, t),
                None => Some(window),
            };
            let result = match (fitted, spacing) {
                (None, _) => Err(format!("window lies below the resolution guard for T = {}", meta.t.unwrap_or(0))),
                (Some((lo, hi)), Some(s)) => mle_theta_lattice(&values, lo, hi, s).map_err(|e| e.to_string()),
                (Some((lo, hi)), None) => mle_theta(&values, lo, hi).map_err(|e| e.to_string()),
            };
            let (lo, hi) = fitted.unwrap_or(window);
            let n_in = values.iter().filter(|&&v| v > lo && v < hi).count();
            let base = WindowFit {
                h: meta.h,
                interval_type: meta.interval,
                stat,
                window,
                fitted_window: fitted,
                theta_hat: None,
                stderr: None,
                n: n_in,
                atom_mass,
                method: None,
                lattice: spacing.is_some(),
                error: None,
            };
            match result {
                Ok(f) => WindowFit {
                    theta_hat: Some(f.theta_hat),
                    stderr: Some(f.stderr),
                    n: f.n_in_window,
                    method: Some(f.method),
                    ..base
                },
                Err(e) => WindowFit { error: Some(e), ..base },
            }
        })
        .collect();

    let ok: Vec<_> = fits
        .iter()
        .filter_map(|f| {
            Some(ifbm::powerlaw::PowerLawFit {
                theta_hat: f.theta_hat?,
                window: f.window,
                n_in_window: f.n,
                stderr: f.stderr?,
                method: f.method?,
            })
        })
        .collect();
    Ok(ThetaReport { stat, fits, stability: stability(&ok) })
}

/// Fits every requested statistic in a stats file and writes the reports
/// as a JSON array to `out` when given.
pub fn cmd_theta(
    stats_path: &Path,
    stats: &[Stat],
    windows: &[(f64, f64)],
    overrides: RunMeta,
    out: Option<&Path>,
) -> CliResult<Vec<ThetaReport>> {
    let meta = RunMeta::beside(stats_path)?.or(overrides);
    let rows = read_stats(stats_path)?;
    let reports = stats.iter().map(|&s| fit_theta(&rows, s, windows, meta)).collect::<CliResult<Vec<_>>>()?;
    if let Some(out) = out {
        write_json(out, &reports)?;
    }
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurgersSummary {
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "N")]
    pub n: u64,
    pub k0: usize,
    pub master_seed: u64,
    pub report: DimReport,
}

/// Box-counting dimension experiment; writes per-scale counts as CSV and
/// the full report as JSON into `out_dir`.
pub fn cmd_burgers(cfg: &ExperimentConfig, scales: Option<&[f64]>, out_dir: &Path) -> CliResult<BurgersSummary> {
    if cfg.interval != Interval::Bilateral {
        return Err(CliError::invalid("the Burgers experiment needs a bilateral interval"));
    }
    let plan = cfg.plan()?;
    let scales = scales.map_or_else(|| default_scales(cfg.t), <[f64]>::to_vec);
    let report = dim_experiment(&plan, cfg.n, &scales, cfg.master_seed, cfg.workers)?;

    let csv_path = out_dir.join(BURGERS_CSV);
    let mut w = csv::Writer::from_writer(create(&csv_path)?);
    let io = |e: csv::Error| CliError::io(&csv_path, e.into());
    w.write_record(["delta", "N_boxes", "n_paths", "mean_log_count"]).map_err(io)?;
    for s in &report.per_scale {
        w.write_record([s.delta.to_string(), s.n_boxes.to_string(), s.n_paths.to_string(), s.mean_log_count.to_string()])
            .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(&csv_path, e))?;

    let summary = BurgersSummary {
        h: cfg.h,
        t: cfg.t,
        n: cfg.n,
        k0: plan.origin(),
        master_seed: cfg.master_seed,
        report,
    };
    write_json(&out_dir.join(BURGERS_JSON), &summary)?;
    Ok(summary)
}
