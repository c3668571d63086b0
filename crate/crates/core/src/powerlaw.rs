//! Exponent of `F(x) ≈ C x^θ` near zero.
//!
//! The main estimator is maximum likelihood under a truncated power law on a
//! window `(lo, hi)`, i.e. density `θ x^{θ-1} / (hi^θ - lo^θ)`. This is an
//! exponential family in `θ`, so the score is strictly decreasing and has at
//! most one root.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathstats::Ecdf;

pub const MIN_WINDOW_SAMPLES: usize = 30;
pub const THETA_BRACKET: (f64, f64) = (1e-6, 50.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    Mle,
    Slope,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub theta_hat: f64,
    pub window: (f64, f64),
    pub n_in_window: usize,
    pub stderr: f64,
    pub method: FitMethod,
}

/// The windows `(1e-3, 1e-2)·i`, `i = 1..=5`.
pub fn standard_windows() -> Vec<(f64, f64)> {
    (1..=5).map(|i| (1e-3 * i as f64, 1e-2 * i as f64)).collect()
}

/// Samples below `10/T` sit in the range where grid discreteness bends the
/// distribution.
pub fn resolution_guard(len: usize) -> f64 {
    10.0 / len as f64
}

/// Raises the lower edge of `window` to the resolution guard. `None` when
/// nothing of the window is left.
pub fn guarded_window(window: (f64, f64), len: usize) -> Option<(f64, f64)> {
    let lo = window.0.max(resolution_guard(len));
    (lo < window.1).then_some((lo, window.1))
}

fn check_window(lo: f64, hi: f64) -> Result<()> {
    if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!("window must satisfy 0 <= lo < hi, got ({lo}, {hi})")));
    }
    Ok(())
}

struct Score {
    n: f64,
    sum_log: f64,
    // ln(lo/hi); -inf for the untruncated window.
    log_r: f64,
}

impl Score {
    // r^θ L / (1 - r^θ) and its θ-derivative r^θ L² / (1 - r^θ)².
    fn truncation(&self, theta: f64) -> (f64, f64) {
        if self.log_r == f64::NEG_INFINITY {
            return (0.0, 0.0);
        }
        let l = self.log_r;
        let one_minus = -(theta * l).exp_m1();
        let rt = (theta * l).exp();
        (rt * l / one_minus, rt * l * l / (one_minus * one_minus))
    }

    fn value(&self, theta: f64) -> f64 {
        self.n / theta + self.sum_log + self.n * self.truncation(theta).0
    }

    fn information(&self, theta: f64) -> f64 {
        self.n * (1.0 / (theta * theta) - self.truncation(theta).1)
    }
}

/// Maximum-likelihood exponent from the samples falling in `(lo, hi)`.
///
/// `lo = 0` gives the untruncated law `(x/hi)^θ` with the closed form
/// `θ = n / Σ ln(hi/x)`.
pub fn mle_theta(samples: &[f64], lo: f64, hi: f64) -> Result<PowerLawFit> {
    check_window(lo, hi)?;
    let inside: Vec<f64> = samples.iter().copied().filter(|&x| x > lo && x < hi).collect();
    if inside.len() < MIN_WINDOW_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_WINDOW_SAMPLES, found: inside.len() });
    }
    let score = Score {
        n: inside.len() as f64,
        sum_log: inside.iter().map(|&x| (x / hi).ln()).sum(),
        log_r: (lo / hi).ln(),
    };

    let (mut a, mut b) = THETA_BRACKET;
    if score.value(a) <= 0.0 {
        return Err(Error::NoRoot { boundary: a });
    }
    if score.value(b) >= 0.0 {
        return Err(Error::NoRoot { boundary: b });
    }

    // Newton from the untruncated estimate, falling back to bisection
    // whenever a step leaves the bracket.
    let mut theta = (score.n / -score.sum_log).clamp(a, b);
    for _ in 0..200 {
        let s = score.value(theta);
        if s > 0.0 {
            a = theta;
        } else {
            b = theta;
        }
        let mut next = theta + s / score.information(theta);
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        let step = (next - theta).abs();
        theta = next;
        if step <= 1e-14 * theta || b - a <= 1e-14 * theta {
            break;
        }
    }

    Ok(PowerLawFit {
        theta_hat: theta,
        window: (lo, hi),
        n_in_window: inside.len(),
        stderr: score.information(theta).sqrt().recip(),
        method: FitMethod::Mle,
    })
}

// ρ^θ L / (1 - ρ^θ) and its θ-derivative, with L = ln ρ.
fn cell_terms(log_rho: f64, theta: f64) -> (f64, f64) {
    let one_minus = -(theta * log_rho).exp_m1();
    let rt = (theta * log_rho).exp();
    (rt * log_rho / one_minus, rt * log_rho * log_rho / (one_minus * one_minus))
}

/// [`mle_theta`] for samples on the lattice `k·spacing`, such as argmax
/// positions `k/T`.
///
/// A lattice value stands for the cell `[(k-½)s, (k+½)s)`, and the
/// likelihood is that of the cell counts under the truncated power law on
/// the union of cells whose centres lie in `(lo, hi)`. Without this, window
/// edges cutting through cells bias narrow windows.
pub fn mle_theta_lattice(samples: &[f64], lo: f64, hi: f64, spacing: f64) -> Result<PowerLawFit> {
    check_window(lo, hi)?;
    if !(spacing > 0.0) {
        return Err(Error::InvalidParameter(format!("lattice spacing must be positive, got {spacing}")));
    }
    let k_min = ((lo / spacing).floor() as i64 + 1).max(1);
    let mut k_max = (hi / spacing).ceil() as i64 - 1;
    if (k_max as f64) * spacing >= hi {
        k_max -= 1;
    }
    let mut counts = std::collections::BTreeMap::<i64, usize>::new();
    for &x in samples {
        let k = (x / spacing).round() as i64;
        if x > lo && x < hi && (k_min..=k_max).contains(&k) {
            *counts.entry(k).or_default() += 1;
        }
    }
    let n: usize = counts.values().sum();
    if n < MIN_WINDOW_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_WINDOW_SAMPLES, found: n });
    }
    let top = (k_max as f64 + 0.5) * spacing;
    let log_rho0 = ((k_min as f64 - 0.5) * spacing / top).ln();
    // Per cell: count and ln(a/b).
    let cells: Vec<(f64, f64)> = counts
        .iter()
        .map(|(&k, &c)| (c as f64, ((k as f64 - 0.5) / (k as f64 + 0.5)).ln()))
        .collect();
    let log_top: f64 = counts.iter().map(|(&k, &c)| c as f64 * ((k as f64 + 0.5) * spacing / top).ln()).sum();
    let nf = n as f64;
    let score = |theta: f64| {
        let inner: f64 = cells.iter().map(|&(c, l)| c * cell_terms(l, theta).0).sum();
        log_top + nf * cell_terms(log_rho0, theta).0 - inner
    };
    let information = |theta: f64| {
        let inner: f64 = cells.iter().map(|&(c, l)| c * cell_terms(l, theta).1).sum();
        inner - nf * cell_terms(log_rho0, theta).1
    };

    let (mut a, mut b) = THETA_BRACKET;
    if score(a) <= 0.0 {
        return Err(Error::NoRoot { boundary: a });
    }
    if score(b) >= 0.0 {
        return Err(Error::NoRoot { boundary: b });
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if score(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= 1e-13 * b {
            break;
        }
    }
    let theta = 0.5 * (a + b);
    let info = information(theta);
    Ok(PowerLawFit {
        theta_hat: theta,
        window: (lo, hi),
        n_in_window: n,
        stderr: info.max(0.0).sqrt().recip(),
        method: FitMethod::Mle,
    })
}

/// Least-squares slope of `ln F` against `ln x` on `n_points` log-spaced
/// abscissae in `[lo, hi]`.
pub fn slope_theta(ecdf: &Ecdf, lo: f64, hi: f64, n_points: usize) -> Result<PowerLawFit> {
    let mut fit = slope_theta_fn(|x| ecdf.eval(x), lo, hi, n_points)?;
    let v = ecdf.values();
    fit.n_in_window = v.partition_point(|&x| x < hi) - v.partition_point(|&x| x <= lo);
    Ok(fit)
}

/// [`slope_theta`] for an arbitrary distribution function.
pub fn slope_theta_fn<F: Fn(f64) -> f64>(cdf: F, lo: f64, hi: f64, n_points: usize) -> Result<PowerLawFit> {
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::InvalidParameter(format!("window must satisfy 0 < lo < hi, got ({lo}, {hi})")));
    }
    if n_points < 2 {
        return Err(Error::TooFewPoints { needed: 2, found: n_points });
    }
    let (la, lb) = (lo.ln(), hi.ln());
    let mut xs = Vec::with_capacity(n_points);
    let mut ys = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let lx = la + (lb - la) * i as f64 / (n_points - 1) as f64;
        let f = cdf(lx.exp());
        if !(f > 0.0) {
            return Err(Error::NoData { atom_mass: 0.0 });
        }
        xs.push(lx);
        ys.push(f.ln());
    }
    let (slope, stderr) = least_squares(&xs, &ys);
    Ok(PowerLawFit {
        theta_hat: slope,
        window: (lo, hi),
        n_in_window: 0,
        stderr,
        method: FitMethod::Slope,
    })
}

/// Slope of the least-squares line and its standard error.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    if xs.len() <= 2 {
        return (slope, 0.0);
    }
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
    (slope, (rss / (n - 2.0) / sxx).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub spread: f64,
    pub max_stderr: f64,
    pub stable: bool,
}

/// Spread of `θ̂` across windows; stable when `max - min < 3·max stderr`.
pub fn stability(fits: &[PowerLawFit]) -> Option<Stability> {
    if fits.is_empty() {
        return None;
    }
    let max = fits.iter().map(|f| f.theta_hat).fold(f64::NEG_INFINITY, f64::max);
    let min = fits.iter().map(|f| f.theta_hat).fold(f64::INFINITY, f64::min);
    let max_stderr = fits.iter().map(|f| f.stderr).fold(0.0, f64::max);
    let spread = max - min;
    Some(Stability { spread, max_stderr, stable: spread < 3.0 * max_stderr })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn untruncated_closed_form() {
        let hi = 0.2;
        let samples = vec![hi * (-1f64).exp(); 40];
        let fit = mle_theta(&samples, 0.0, hi).unwrap();
        assert!((fit.theta_hat - 1.0).abs() < 1e-12);
        assert!((fit.stderr - 1.0 / 40f64.sqrt()).abs() < 1e-12);
        assert_eq!(fit.n_in_window, 40);
    }

    #[test]
    fn too_few_samples() {
        let samples = [0.5; 29];
        assert_eq!(mle_theta(&samples, 0.1, 1.0), Err(Error::TooFewSamples { needed: 30, found: 29 }));
        assert!(mle_theta(&samples, 0.6, 1.0).is_err());
    }

    #[test]
    fn no_root_reports_boundary() {
        // Everything at the top edge: the likelihood keeps growing with θ.
        let samples = [0.999_999_999; 50];
        assert_eq!(mle_theta(&samples, 0.0, 1.0), Err(Error::NoRoot { boundary: 50.0 }));
    }

    #[test]
    fn bad_window() {
        assert!(matches!(mle_theta(&[0.5; 40], 0.3, 0.2), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn slope_of_exact_power() {
        let fit = slope_theta_fn(|x| x.powf(0.7), 1e-3, 1e-1, 20).unwrap();
        assert!((fit.theta_hat - 0.7).abs() < 1e-12);
        let flat = slope_theta_fn(|_| 0.4, 1e-3, 1e-1, 20).unwrap();
        assert!(flat.theta_hat.abs() < 1e-12);
        assert_eq!(slope_theta_fn(|_| 0.0, 1e-3, 1e-1, 5), Err(Error::NoData { atom_mass: 0.0 }));
    }

    #[test]
    fn guard_trims_low_edge() {
        assert_eq!(guarded_window((1e-3, 1e-2), 8192), Some((10.0 / 8192.0, 1e-2)));
        assert_eq!(guarded_window((3e-3, 3e-2), 1000), Some((1e-2, 3e-2)));
        assert_eq!(guarded_window((1e-3, 1e-2), 100), None);
    }

    #[test]
    fn stability_rule() {
        let fit = |t: f64, se: f64| PowerLawFit {
            theta_hat: t,
            window: (0.1, 0.2),
            n_in_window: 100,
            stderr: se,
            method: FitMethod::Mle,
        };
        assert!(stability(&[fit(0.5, 0.02), fit(0.55, 0.02)]).unwrap().stable);
        assert!(!stability(&[fit(0.5, 0.01), fit(0.55, 0.01)]).unwrap().stable);
        assert_eq!(stability(&[]), None);
    }
}
