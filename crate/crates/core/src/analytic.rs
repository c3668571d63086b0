//! Closed-form comparison results and their numerical checks.
//!
//! `ξ_q(x) = y₁(x^θ)` time-changes the normalised process
//! `y₁ = √q ∫ b_H` so that its variance is `|x|^{q0}` for every `H`; here
//! `q = 2H+2`, `q0 = 2H0+2` and `θ = q0/q`. Slepian's inequality then
//! compares maxima across `H` once `β_q ≥ β_{q0}` pointwise.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::plan_unilateral;
use crate::kernels::HurstParams;
use crate::montecarlo;
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeChangePair {
    pub h: f64,
    pub h0: f64,
    pub q: f64,
    pub q0: f64,
    pub theta: f64,
}

impl TimeChangePair {
    /// Requires `1/2 < H0 <= H < 1`; `H0 = H` is the identity time change.
    pub fn new(h: f64, h0: f64) -> Result<Self> {
        if !(0.5 < h0 && h0 <= h && h < 1.0) {
            return Err(Error::InvalidParameter(format!("need 1/2 < H0 <= H < 1, got H = {h}, H0 = {h0}")));
        }
        let (q, q0) = (2.0 * h + 2.0, 2.0 * h0 + 2.0);
        Ok(Self { h, h0, q, q0, theta: q0 / q })
    }

    /// The reference process, `θ = 1`.
    pub fn reference(&self) -> Self {
        Self::new(self.h0, self.h0).expect("reference parameters already validated")
    }
}

/// `E ξ_q(t) ξ_q(s)` for `0 < s <= t`.
pub fn beta_q(pair: &TimeChangePair, t: f64, s: f64) -> Result<f64> {
    if !(s > 0.0 && s <= t) {
        return Err(Error::DomainError(format!("beta_q needs 0 < s <= t, got t = {t}, s = {s}")));
    }
    let TimeChangePair { q0, theta, .. } = *pair;
    if s == t {
        return Ok(t.powf(q0));
    }
    let rho = s / t;
    let r_theta = rho.powf(theta);
    let lead = q0 / (q0 - theta) * (r_theta + rho.powf(q0 - theta));
    let bracket = ((1.0 - r_theta).powf(q0 / theta) - (1.0 + rho.powf(q0))) * theta / (q0 - theta);
    Ok(0.5 * t.powf(q0) * (lead + bracket))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub min_gap: f64,
    pub at: (f64, f64),
}

/// Minimum of `β_q - β_{q0}` over `t = i/n`, `s = j/n`, `1 <= j <= i <= n`.
pub fn slepian_gap(pair: &TimeChangePair, n: usize) -> Result<GapReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("lattice needs at least one point".into()));
    }
    let reference = pair.reference();
    let mut best = GapReport { min_gap: f64::INFINITY, at: (0.0, 0.0) };
    for i in 1..=n {
        let t = i as f64 / n as f64;
        for j in 1..=i {
            let s = j as f64 / n as f64;
            let gap = beta_q(pair, t, s)? - beta_q(&reference, t, s)?;
            if gap < best.min_gap {
                best = GapReport { min_gap: gap, at: (t, s) };
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RTerms {
    pub r1: f64,
    pub r2: f64,
}

/// The two remainder terms whose signs give `β_q >= β_{q0}`.
pub fn r_terms(pair: &TimeChangePair, rho: f64) -> Result<RTerms> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::DomainError(format!("r_terms needs 0 < rho < 1, got {rho}")));
    }
    if pair.q == pair.q0 {
        return Err(Error::DomainError("r_terms needs H0 < H".into()));
    }
    let TimeChangePair { q, q0, theta, .. } = *pair;
    let y = rho.powf(theta);
    let log_ybar = (-y).ln_1p();
    // 1 - ȳ^{q-1} and ȳ^{q0-1} - ȳ^{q-1} without cancellation.
    let one_minus_ybar = -((q - 1.0) * log_ybar).exp_m1();
    let ybar_diff = ((q - 1.0) * log_ybar).exp() * ((q0 - q) * log_ybar).exp_m1();
    let r1 = (one_minus_ybar - y.powf(q - 1.0)) / (q - 1.0) - ybar_diff / (q - q0);

    let integrand = |a: f64| {
        let ra = rho.powf(a);
        ra - rho.powf(q0 - a) - (1.0 - ra).powf(q0 - 1.0) * ra
    };
    let (integral, _) = quad::integrate(integrand, theta, 1.0, 1e-12);
    Ok(RTerms { r1, r2: integral * (1.0 / rho).ln() })
}

/// The `R2` integrand at `α`, for pointwise sign checks.
pub fn r2_integrand(pair: &TimeChangePair, rho: f64, alpha: f64) -> f64 {
    let ra = rho.powf(alpha);
    ra - rho.powf(pair.q0 - alpha) - (1.0 - ra).powf(pair.q0 - 1.0) * ra
}

pub const PSI_MIN_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiReport {
    /// Most negative slack in standard errors.
    pub worst_z: f64,
    /// Bin indices `(t, s)` of the worst pair.
    pub worst_pair: (usize, usize),
    pub n_used: usize,
    pub bins: usize,
}

/// Histogram check of `ψ(t) <= ψ(s)·max(s/t, (1-s)/(1-t))` for an argmax
/// density on `(0, 1)`.
///
/// Bin averages obey the same inequality with the factor taken at its
/// supremum over the two bins, `max(b_s/a_t, (1-a_s)/(1-b_t))`; pairs
/// where that is infinite hold trivially and are skipped.
pub fn psi_inequality_report(g_samples: &[f64], bins: usize) -> Result<PsiReport> {
    if bins < 10 {
        return Err(Error::InvalidParameter(format!("need at least 10 bins, got {bins}")));
    }
    let inside: Vec<f64> = g_samples.iter().copied().filter(|&g| g > 0.0 && g < 1.0).collect();
    if inside.len() < PSI_MIN_SAMPLES {
        return Err(Error::TooFewSamples { needed: PSI_MIN_SAMPLES, found: inside.len() });
    }
    let n = inside.len() as f64;
    let w = 1.0 / bins as f64;
    let mut counts = vec![0usize; bins];
    for g in &inside {
        counts[((g * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let p: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let density: Vec<f64> = p.iter().map(|pi| pi / w).collect();

    let mut worst = PsiReport { worst_z: f64::INFINITY, worst_pair: (0, 0), n_used: inside.len(), bins };
    for i in 0..bins {
        let (ai, bi) = (i as f64 * w, (i + 1) as f64 * w);
        for j in 0..bins {
            if i == j {
                continue;
            }
            let (aj, bj) = (j as f64 * w, (j + 1) as f64 * w);
            let factor = (bj / ai).max((1.0 - aj) / (1.0 - bi));
            if !factor.is_finite() {
                continue;
            }
            let slack = density[j] * factor - density[i];
            let var = (factor * factor * p[j] * (1.0 - p[j]) + p[i] * (1.0 - p[i]) + 2.0 * factor * p[i] * p[j])
                / (n * w * w);
            if var <= 0.0 {
                continue;
            }
            let z = slack / var.sqrt();
            if z < worst.worst_z {
                worst.worst_z = z;
                worst.worst_pair = (i, j);
            }
        }
    }
    Ok(worst)
}

pub const FM_MIN_SAMPLES: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmTable {
    pub h_grid: Vec<f64>,
    pub x_grid: Vec<f64>,
    /// `cdf[i][k]` is `P(max y₁ < x_k)` at `H = h_grid[i]`.
    pub cdf: Vec<Vec<f64>>,
    /// `(i, k, z)` for drops `F(x_k | H_{i+1}) < F(x_k | H_i)` beyond 3
    /// standard errors.
    pub violations: Vec<(usize, usize, f64)>,
}

/// Empirical law of the maximum of `√(2H+2) y` on `[0, 1]` across an
/// increasing `H` grid, with monotonicity violations flagged.
pub fn fm_monotonicity_mc(
    h_grid: &[f64],
    x_grid: &[f64],
    n: u64,
    len: usize,
    master: u64,
    workers: usize,
) -> Result<FmTable> {
    if h_grid.iter().any(|&h| !(h > 0.5 && h < 1.0)) || h_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("H grid must be increasing inside (1/2, 1)".into()));
    }
    if n < FM_MIN_SAMPLES {
        return Err(Error::TooFewSamples { needed: FM_MIN_SAMPLES as usize, found: n as usize });
    }
    let mut cdf = Vec::with_capacity(h_grid.len());
    for &h in h_grid {
        let params = HurstParams::new(h)?;
        let plan = plan_unilateral(params, len)?;
        let scale = params.q().sqrt();
        let stats = montecarlo::path_stats(&plan, master, n, workers)?;
        let maxima: Vec<f64> = stats.iter().map(|s| scale * s.m).collect();
        cdf.push(
            x_grid
                .iter()
                .map(|&x| maxima.iter().filter(|&&m| m < x).count() as f64 / n as f64)
                .collect::<Vec<_>>(),
        );
    }
    let nf = n as f64;
    let mut violations = Vec::new();
    for (i, pair) in cdf.windows(2).enumerate() {
        for (k, (&a, &b)) in pair[0].iter().zip(&pair[1]).enumerate() {
            let se = ((a * (1.0 - a) + b * (1.0 - b)) / nf).sqrt();
            let diff = b - a;
            if diff < 0.0 && (se == 0.0 || diff < -3.0 * se) {
                violations.push((i, k, if se > 0.0 { diff / se } else { f64::NEG_INFINITY }));
            }
        }
    }
    Ok(FmTable { h_grid: h_grid.to_vec(), x_grid: x_grid.to_vec(), cdf, violations })
}
