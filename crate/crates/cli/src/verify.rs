//! Invariant suites run by `ifbm verify`.

use ifbm::analytic::{beta_q, psi_inequality_report, r_terms, slepian_gap, TimeChangePair};
use ifbm::generator::{covariance_oracle, plan_bilateral, plan_fbm, plan_unilateral};
use ifbm::kernels::{fgn_autocov, mu_vec};
use ifbm::montecarlo::{fbm_argmax, for_each_ordered};
use ifbm::toeplitz::{dense_oracle, factorize};
use ifbm::{GenPlan, HurstParams};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Cov,
    Toeplitz,
    Analytic,
    Psi,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Cov, Suite::Toeplitz, Suite::Analytic, Suite::Psi];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub check: String,
    pub parameters: Value,
    pub worst_value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(check: &str, parameters: Value, worst: f64, threshold: f64) -> Self {
        Self { check: check.into(), parameters, worst_value: worst, threshold, pass: worst <= threshold }
    }

    fn at_least(check: &str, parameters: Value, worst: f64, threshold: f64) -> Self {
        Self { check: check.into(), parameters, worst_value: worst, threshold, pass: worst >= threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Monte Carlo sample count; each suite has its own default.
    pub samples: Option<u64>,
    /// Grid length for the ψ suite.
    pub len: Option<usize>,
    pub seed: u64,
    pub workers: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { samples: None, len: None, seed: 0, workers: crate::config::default_workers() }
    }
}

/// Runs one suite. Failed checks are reported in the result, not as errors.
pub fn cmd_verify(suite: Suite, opts: &VerifyOptions) -> CliResult<VerifyReport> {
    let checks = match suite {
        Suite::Cov => cov_suite(opts)?,
        Suite::Toeplitz => toeplitz_suite()?,
        Suite::Analytic => analytic_suite()?,
        Suite::Psi => psi_suite(opts)?,
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { suite, checks, pass })
}

const COV_LEN: usize = 32;

fn cov_plans(h: f64) -> CliResult<Vec<(String, GenPlan)>> {
    let p = HurstParams::new(h)?;
    let mut out = vec![("unilateral".to_string(), plan_unilateral(p, COV_LEN)?)];
    for k0 in [1, COV_LEN / 2, COV_LEN - 1] {
        out.push((format!("bilateral k0={k0}"), plan_bilateral(p, COV_LEN, k0)?));
    }
    Ok(out)
}

fn cov_suite(opts: &VerifyOptions) -> CliResult<Vec<Check>> {
    let n = opts.samples.unwrap_or(200_000);
    let mut checks = Vec::new();
    for h in [0.2, 0.5, 0.8] {
        let p = HurstParams::new(h)?;
        for (label, plan) in cov_plans(h)? {
            let exact = covariance_oracle(&p, &plan.grid());
            let d = plan.len() + 1;
            let cols = plan.noise_len();
            let map = plan.noise_map();
            let mut worst: f64 = 0.0;
            for i in 0..d {
                for j in 0..d {
                    let mmt: f64 = (0..cols).map(|c| map[i * cols + c] * map[j * cols + c]).sum();
                    worst = worst.max((mmt - exact[i * d + j]).abs());
                }
            }
            let params = json!({"H": h, "T": COV_LEN, "interval": label});
            checks.push(Check::at_most("noise_map_covariance", params.clone(), worst, 1e-8));

            let z = mc_covariance_z(&plan, &exact, n, opts)?;
            let params = json!({"H": h, "T": COV_LEN, "interval": label, "N": n, "seed": opts.seed});
            checks.push(Check::at_most("mc_covariance_max_z", params, z, 4.0));
        }
    }
    Ok(checks)
}

/// Largest `|Ĉ - Γ| / se` over the upper triangle, with known zero mean.
fn mc_covariance_z(plan: &GenPlan, exact: &[f64], n: u64, opts: &VerifyOptions) -> CliResult<f64> {
    let d = plan.len() + 1;
    let mut sum = vec![0.0; d * d];
    let mut sum_sq = vec![0.0; d * d];
    let work = |seeds: &[ifbm::SeedTag]| plan.generate_batch(seeds).into_iter().map(|p| p.values).collect();
    for_each_ordered(opts.seed, n, opts.workers, work, |_, x: Vec<f64>| {
        for a in 0..d {
            for b in a..d {
                let v = x[a] * x[b];
                sum[a * d + b] += v;
                sum_sq[a * d + b] += v * v;
            }
        }
        Ok(())
    })?;
    let nf = n as f64;
    let mut worst: f64 = 0.0;
    for a in 0..d {
        for b in a..d {
            let m = sum[a * d + b] / nf;
            let se = ((sum_sq[a * d + b] / nf - m * m) / nf).sqrt();
            let gap = (m - exact[a * d + b]).abs();
            if se > 0.0 {
                worst = worst.max(gap / se);
            } else if gap > 0.0 {
                worst = f64::INFINITY;
            }
        }
    }
    Ok(worst)
}

fn toeplitz_suite() -> CliResult<Vec<Check>> {
    let mut checks = Vec::new();
    for h in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let p = HurstParams::new(h)?;
        let n = 512;
        let r = mu_vec(&p, n);
        let model = factorize(&r, n)?;
        let x: Vec<f64> = (0..n).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let back = model.solve(&model.apply(&x)?)?;
        let err = back.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        checks.push(Check::at_most("solve_round_trip", json!({"H": h, "n": n}), err, 1e-6));

        let kmax = model.reflection().iter().map(|k| k.abs()).fold(0.0, f64::max);
        checks.push(Check::at_most("reflection_magnitude", json!({"H": h, "n": n}), kmax, 1.0 - 1e-12));
        let vmin = model.variances().iter().copied().fold(f64::INFINITY, f64::min);
        checks.push(Check::at_least("prediction_variance", json!({"H": h, "n": n}), vmin, f64::MIN_POSITIVE));

        let m = 64;
        let r = fgn_autocov(&p, m);
        let l = factorize(&r, m)?.dense_factor();
        let c = dense_oracle(&r, m)?;
        let diff = l.iter().zip(&c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        checks.push(Check::at_most("factor_vs_cholesky", json!({"H": h, "n": m}), diff, 1e-9));
    }
    Ok(checks)
}

const GAP_PAIRS: [(f64, f64); 4] = [(0.7, 0.6), (0.9, 0.55), (0.8, 0.6), (0.95, 0.51)];

fn analytic_suite() -> CliResult<Vec<Check>> {
    let mut checks = Vec::new();
    for (h, h0) in GAP_PAIRS {
        let pair = TimeChangePair::new(h, h0)?;
        let params = json!({"H": h, "H0": h0});
        let gap = slepian_gap(&pair, 100)?;
        checks.push(Check::at_least("slepian_gap_min", json!({"H": h, "H0": h0, "lattice": 100}), gap.min_gap, -1e-12));

        let (mut r1, mut r2, mut resid): (f64, f64, f64) = (f64::INFINITY, f64::INFINITY, 0.0);
        for i in 1..=1000 {
            let rho = i as f64 / 1001.0;
            let r = r_terms(&pair, rho)?;
            r1 = r1.min(r.r1);
            r2 = r2.min(r.r2);
            let y = rho.powf(pair.theta);
            let gap = beta_q(&pair, 1.0, rho)? - beta_q(&pair.reference(), 1.0, rho)?;
            let rhs = (pair.q - pair.q0) * (1.0 - y) / (pair.q0 - 1.0) * r.r1 + pair.q0 / (pair.q0 - 1.0) * r.r2;
            resid = resid.max((2.0 * gap - rhs).abs());
        }
        checks.push(Check::at_least("r1_grid_min", params.clone(), r1, -1e-10));
        checks.push(Check::at_least("r2_grid_min", params.clone(), r2, -1e-10));
        checks.push(Check::at_most("gap_decomposition_residual", params.clone(), resid, 1e-10));

        let small: f64 = 1e-3;
        let y = small.powf(pair.theta);
        let lead = y * y * (pair.q0 - 1.0) / 2.0;
        let dev_small = (r_terms(&pair, small)?.r1 / lead - 1.0).abs();
        checks.push(Check::at_most("r1_small_rho_ratio", json!({"H": h, "H0": h0, "rho": small}), dev_small, 0.05));
        let near = 1.0 - 1e-3;
        let ybar = 1.0 - f64::powf(near, pair.theta);
        let dev_near = (r_terms(&pair, near)?.r1 / ybar - 1.0).abs();
        checks.push(Check::at_most("r1_rho_near_one_ratio", json!({"H": h, "H0": h0, "rho": near}), dev_near, 0.05));
    }
    Ok(checks)
}

fn psi_suite(opts: &VerifyOptions) -> CliResult<Vec<Check>> {
    let n = opts.samples.unwrap_or(50_000);
    let len = opts.len.unwrap_or(1024);
    let bins = 20;
    let plan = plan_fbm(HurstParams::new(0.5)?, len)?;
    let g = fbm_argmax(&plan, opts.seed, n, opts.workers)?;
    let r = psi_inequality_report(&g, bins)?;
    let params = json!({
        "H": 0.5, "T": len, "N": n, "bins": bins, "seed": opts.seed,
        "n_interior": r.n_used, "worst_pair": r.worst_pair,
    });
    Ok(vec![Check::at_least("psi_worst_z", params, r.worst_z, -5.0)])
}

/// Turns a failed report into the verification error.
pub fn require_pass(report: &VerifyReport) -> CliResult<()> {
    if report.pass {
        return Ok(());
    }
    let failed: Vec<&str> = report.checks.iter().filter(|c| !c.pass).map(|c| c.check.as_str()).collect();
    Err(CliError::Verification(format!("{} check(s) failed: {}", failed.len(), failed.join(", "))))
}
