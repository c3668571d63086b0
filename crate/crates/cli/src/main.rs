use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ifbm::pathstats::Stat;
use ifbm::Interval;
use ifbm_cli::config::{parse_scales, parse_stats, parse_windows};
use ifbm_cli::verify::require_pass;
use ifbm_cli::{cmd_burgers, cmd_gen, cmd_mc, cmd_theta, cmd_verify, CliError, CliResult, ExperimentConfig};
use ifbm_cli::{RunMeta, Suite, VerifyOptions};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "ifbm", version, about = "Exact IFBM simulation, small-value exponents and Burgers dimension experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write one sample path as CSV.
    Gen {
        #[command(flatten)]
        exp: ExpArgs,
        /// Sample index within the seeded campaign.
        #[arg(long, default_value_t = 0)]
        sample: u64,
        #[arg(long, default_value = "path.csv")]
        out: PathBuf,
    },
    /// Monte Carlo campaign: stats.csv and summary.json in the output directory.
    Mc {
        #[command(flatten)]
        exp: ExpArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Fit power-law exponents near zero to a stats file.
    Theta {
        /// Stats CSV written by `mc`.
        file: PathBuf,
        /// Statistics to fit, comma separated (M, G, A, Z).
        #[arg(long, default_value = "G")]
        stats: String,
        /// `lo:hi` pairs separated by commas, or `standard`.
        #[arg(long, default_value = "standard")]
        windows: String,
        /// Overrides H from the neighbouring summary.json.
        #[arg(long)]
        hurst: Option<f64>,
        /// Overrides T from the neighbouring summary.json.
        #[arg(long)]
        len: Option<usize>,
        #[arg(long)]
        interval: Option<Interval>,
        /// JSON output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Box-counting dimension of regular Lagrangian points.
    Burgers {
        #[command(flatten)]
        exp: ExpArgs,
        /// Box sizes separated by commas; defaults to 2^-3 down to 8/T.
        #[arg(long)]
        scales: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run invariant suites; exits with status 2 if any check fails.
    Verify {
        #[arg(long, value_enum)]
        suite: Option<Suite>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        len: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        workers: Option<usize>,
        /// JSON output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExpArgs {
    /// TOML experiment config; flags given alongside override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    hurst: Option<f64>,
    #[arg(long)]
    len: Option<usize>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    interval: Option<Interval>,
    /// Bilateral pivot k0; defaults to ceil(T/2).
    #[arg(long)]
    pivot: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    windows: Option<String>,
    #[arg(long)]
    stats: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// Accept T above 2^14 despite the quadratic memory cost.
    #[arg(long)]
    allow_large: bool,
}

impl ExpArgs {
    fn resolve(&self, default_interval: Interval) -> CliResult<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig { interval: default_interval, ..Default::default() },
        };
        c.h = self.hurst.unwrap_or(c.h);
        c.t = self.len.unwrap_or(c.t);
        c.n = self.samples.unwrap_or(c.n);
        c.interval = self.interval.unwrap_or(c.interval);
        c.k0 = self.pivot.or(c.k0);
        c.master_seed = self.seed.unwrap_or(c.master_seed);
        c.workers = self.workers.unwrap_or(c.workers);
        c.allow_large |= self.allow_large;
        if let Some(w) = &self.windows {
            c.windows = parse_windows(w)?;
        }
        match &self.stats {
            Some(s) => c.stats = parse_stats(s)?,
            None if self.config.is_none() && c.interval == Interval::Bilateral => c.stats.retain(|&s| s != Stat::Z),
            None => {}
        }
        c.validate()?;
        Ok(c)
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&PathBuf>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::invalid(e.to_string()))?;
    match out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| CliError::io(path, e)),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gen { exp, sample, out } => {
            cmd_gen(&exp.resolve(Interval::Unilateral)?, sample, &out)?;
            eprintln!("wrote {}", out.display());
        }
        Command::Mc { exp, out } => {
            let s = cmd_mc(&exp.resolve(Interval::Unilateral)?, &out)?;
            eprintln!("wrote {} paths to {} (atom mass {:.4})", s.n, out.display(), s.atom_mass);
        }
        Command::Theta { file, stats, windows, hurst, len, interval, out } => {
            let meta = RunMeta { h: hurst, t: len, interval };
            let reports = cmd_theta(&file, &parse_stats(&stats)?, &parse_windows(&windows)?, meta, None)?;
            emit(&reports, out.as_ref())?;
        }
        Command::Burgers { exp, scales, out } => {
            let cfg = exp.resolve(Interval::Bilateral)?;
            let scales = scales.as_deref().map(parse_scales).transpose()?;
            let s = cmd_burgers(&cfg, scales.as_deref(), &out)?;
            eprintln!(
                "dim_hat {:.4}, bootstrap interval ({:.4}, {:.4}){}",
                s.report.dim_hat,
                s.report.bootstrap_interval.0,
                s.report.bootstrap_interval.1,
                if s.report.low_confidence { ", low confidence" } else { "" }
            );
        }
        Command::Verify { suite, samples, len, seed, workers, out } => {
            let opts = VerifyOptions { samples, len, seed, workers: workers.unwrap_or(VerifyOptions::default().workers) };
            let suites = suite.map_or(Suite::ALL.to_vec(), |s| vec![s]);
            let reports = suites.iter().map(|&s| cmd_verify(s, &opts)).collect::<CliResult<Vec<_>>>()?;
            emit(&reports, out.as_ref())?;
            for r in &reports {
                require_pass(r)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
